#include "ranslice/policy/template.hpp"

#include <algorithm>

namespace ranslice::policy {

bool QosMatch::is_wildcard_only() const {
  return !pairs.empty() && std::all_of(pairs.begin(), pairs.end(), [](const QosPattern& p) { return p.is_wildcard(); });
}

bool matches(const QosPattern& pattern, const QosProfile& q) {
  return (!pattern.qci || *pattern.qci == q.qci) && (!pattern.arp || *pattern.arp == q.arp);
}

bool matches(const QosMatch& match, const QosProfile& q) {
  return std::any_of(match.pairs.begin(), match.pairs.end(),
                     [&](const QosPattern& p) { return matches(p, q); });
}

bool overlaps(const QosMatch& a, const QosMatch& b) {
  auto component = [](const std::optional<std::uint8_t>& x, const std::optional<std::uint8_t>& y) {
    return !x || !y || *x == *y;
  };
  for (const auto& pa : a.pairs)
    for (const auto& pb : b.pairs)
      if (component(pa.qci, pb.qci) && component(pa.arp, pb.arp)) return true;
  return false;
}

bool L3Descriptor::has_scope(Scope s) const {
  return std::any_of(rules.begin(), rules.end(), [s](const CapacityRule& r) { return r.scope == s; });
}

std::optional<double> L2Descriptor::wrr_share() const {
  if (const auto* wrr = std::get_if<InterSliceWrr>(&inter_slice)) return wrr->share_percent;
  return std::nullopt;
}

std::uint32_t SliceCounters::total_drbs() const {
  std::uint32_t n = 0;
  for (const auto& [q, count] : active_drbs) n += count;
  return n;
}

double SliceCounters::value(Metric metric, const QosMatch& match) const {
  auto sum = [&](const auto& per_qos) {
    double total = 0.0;
    for (const auto& [q, v] : per_qos)
      if (matches(match, q)) total += static_cast<double>(v);
    return total;
  };
  switch (metric) {
    case Metric::DrbCount:
      return sum(active_drbs);
    case Metric::UeCount:
      return connected_ues;
    case Metric::RadioLoadPercent:
      return sum(radio_load_percent);
    case Metric::AggregatedBitRateBps:
      return sum(bitrate_bps);
  }
  return 0.0;
}

SliceCounters& SliceCounters::operator+=(const SliceCounters& other) {
  for (const auto& [q, v] : other.active_drbs) active_drbs[q] += v;
  connected_ues += other.connected_ues;
  for (const auto& [q, v] : other.radio_load_percent) radio_load_percent[q] += v;
  for (const auto& [q, v] : other.bitrate_bps) bitrate_bps[q] += v;
  return *this;
}

std::string to_string(Metric m) {
  switch (m) {
    case Metric::RadioLoadPercent:
      return "radio_load_percent";
    case Metric::AggregatedBitRateBps:
      return "aggregated_bitrate_bps";
    case Metric::DrbCount:
      return "drb_count";
    case Metric::UeCount:
      return "ue_count";
  }
  return "?";
}

std::string to_string(Scope s) { return s == Scope::Cell ? "cell" : "slice"; }
std::string to_string(Bound b) { return b == Bound::Min ? "min" : "max"; }

std::string to_string(IntraSlicePolicy p) {
  switch (p) {
    case IntraSlicePolicy::RR:
      return "rr";
    case IntraSlicePolicy::PF:
      return "pf";
    case IntraSlicePolicy::MaxCI:
      return "maxci";
  }
  return "?";
}

}  // namespace ranslice::policy
