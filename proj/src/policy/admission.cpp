#include "ranslice/policy/admission.hpp"

#include <algorithm>
#include <cmath>

namespace ranslice::policy {

ValidatedTemplate make_validated(RsiTemplate tpl) { return ValidatedTemplate(std::move(tpl)); }

namespace {

std::string rule_path(const std::string& prefix, std::size_t i) {
  return prefix + ".l3.rules[" + std::to_string(i) + "]";
}

bool same_key(const CapacityRule& a, const CapacityRule& b) {
  return a.metric == b.metric && a.scope == b.scope && a.match == b.match;
}

template <typename T>
void sort_unique(std::vector<T>& v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
}

}  // namespace

std::string to_string(ValidationErrc code) {
  switch (code) {
    case ValidationErrc::DuplicateId:
      return "DuplicateId";
    case ValidationErrc::UnknownCell:
      return "UnknownCell";
    case ValidationErrc::SlicingUnsupported:
      return "SlicingUnsupported";
    case ValidationErrc::InconsistentBounds:
      return "InconsistentBounds";
    case ValidationErrc::ShareOverflow:
      return "ShareOverflow";
    case ValidationErrc::OutOfRange:
      return "OutOfRange";
  }
  return "?";
}

ValidationError::ValidationError(ValidationErrc code, std::string field, const std::string& what)
    : std::runtime_error(to_string(code) + " at " + field + ": " + what), code_(code), field_(std::move(field)) {}

void validate_policy(const RrmPolicy& policy, const std::string& prefix) {
  const auto& l3 = policy.l3;
  if (l3.averaging_window_ms == 0)
    throw ValidationError(ValidationErrc::OutOfRange, prefix + ".l3.averaging_window_ms", "must be positive");

  for (std::size_t i = 0; i < l3.rules.size(); ++i) {
    const auto& r = l3.rules[i];
    if (!std::isfinite(r.value) || r.value < 0)
      throw ValidationError(ValidationErrc::OutOfRange, rule_path(prefix, i) + ".value", "must be nonnegative");
    if (r.metric == Metric::RadioLoadPercent && r.value > 100)
      throw ValidationError(ValidationErrc::OutOfRange, rule_path(prefix, i) + ".value",
                            "radio load is a percentage");
    if (r.match.pairs.empty())
      throw ValidationError(ValidationErrc::OutOfRange, rule_path(prefix, i) + ".match", "must not be empty");
    if (r.metric == Metric::UeCount && !r.match.is_wildcard_only())
      throw ValidationError(ValidationErrc::OutOfRange, rule_path(prefix, i) + ".match",
                            "UE-count rules take the (*,*) match only");
    for (const auto& p : r.match.pairs) {
      if ((p.qci && *p.qci < kMinQci) || (p.arp && (*p.arp < kMinArp || *p.arp > kMaxArp)))
        throw ValidationError(ValidationErrc::OutOfRange, rule_path(prefix, i) + ".match", "QCI/ARP out of range");
    }
  }

  for (std::size_t i = 0; i < l3.rules.size(); ++i) {
    const auto& lo = l3.rules[i];
    if (lo.bound != Bound::Min) continue;
    for (const auto& hi : l3.rules) {
      if (hi.bound == Bound::Max && same_key(lo, hi) && lo.value > hi.value)
        throw ValidationError(ValidationErrc::InconsistentBounds, rule_path(prefix, i),
                              "minimum exceeds the matching maximum");
    }
  }

  if (auto share = policy.l2.wrr_share()) {
    if (!std::isfinite(*share) || *share <= 0 || *share > 100)
      throw ValidationError(ValidationErrc::OutOfRange, prefix + ".l2.inter_slice.share_percent",
                            "share must be in (0, 100]");
  }
}

ValidatedTemplate validate_template(const RsiTemplate& tpl, const RanMap& network,
                                    std::span<const RsiTemplate> existing, std::optional<RsiId> replacing) {
  if (tpl.rsi_id == 0) throw ValidationError(ValidationErrc::OutOfRange, "rsi_id", "0 is reserved");
  for (const auto& other : existing) {
    if (replacing && other.rsi_id == *replacing) continue;
    if (other.rsi_id == tpl.rsi_id)
      throw ValidationError(ValidationErrc::DuplicateId, "rsi_id", "slice " + std::to_string(tpl.rsi_id) + " exists");
  }

  if (tpl.cell_list.empty()) throw ValidationError(ValidationErrc::UnknownCell, "cell_list", "no cells listed");
  for (std::size_t i = 0; i < tpl.cell_list.size(); ++i) {
    const auto& ref = tpl.cell_list[i];
    auto field = "cell_list[" + std::to_string(i) + "]";
    auto it = network.find(ref);
    if (it == network.end())
      throw ValidationError(ValidationErrc::UnknownCell, field,
                            "cell " + std::to_string(ref.cell_id) + " of eNB " + to_hex(ref.enb_id) + " not in RAN map");
    if (!it->second.slicing_supported)
      throw ValidationError(ValidationErrc::SlicingUnsupported, field,
                            "eNB " + to_hex(ref.enb_id) + " does not support slicing");
  }

  validate_policy(tpl.rrm_policy);

  RsiTemplate norm = tpl;
  sort_unique(norm.cell_list);
  sort_unique(norm.nas_id_list);
  sort_unique(norm.plmn_list);

  // Cell-level guarantees in every cell must fit under overlapping slice-level caps.
  const auto& rules = norm.rrm_policy.l3.rules;
  for (std::size_t i = 0; i < rules.size(); ++i) {
    const auto& cap = rules[i];
    if (cap.scope != Scope::Slice || cap.bound != Bound::Max) continue;
    for (const auto& floor : rules) {
      if (floor.scope != Scope::Cell || floor.bound != Bound::Min || floor.metric != cap.metric) continue;
      if (!overlaps(floor.match, cap.match)) continue;
      if (floor.value * static_cast<double>(norm.cell_list.size()) > cap.value)
        throw ValidationError(ValidationErrc::InconsistentBounds, rule_path("rrm_policy", i),
                              "per-cell minimum over all cells exceeds the slice maximum");
    }
  }

  if (auto share = norm.rrm_policy.l2.wrr_share()) {
    for (const auto& cell : norm.cell_list) {
      double sum = *share;
      for (const auto& other : existing) {
        if (other.rsi_id == norm.rsi_id || (replacing && other.rsi_id == *replacing)) continue;
        auto other_share = other.rrm_policy.l2.wrr_share();
        if (!other_share) continue;
        if (std::find(other.cell_list.begin(), other.cell_list.end(), cell) != other.cell_list.end())
          sum += *other_share;
      }
      if (sum > 100.0 + 1e-9)
        throw ValidationError(ValidationErrc::ShareOverflow, "rrm_policy.l2.inter_slice.share_percent",
                              "WRR shares on cell " + std::to_string(cell.cell_id) + " of eNB " + to_hex(cell.enb_id) +
                                  " sum to " + std::to_string(sum) + "%");
    }
  }

  return make_validated(std::move(norm));
}

double AdmissionEstimates::load_for(std::uint8_t qci) const {
  auto it = load_percent_per_drb.find(qci);
  return it == load_percent_per_drb.end() ? default_load_percent : it->second;
}

double AdmissionEstimates::bitrate_for(std::uint8_t qci) const {
  auto it = bitrate_bps_per_drb.find(qci);
  return it == bitrate_bps_per_drb.end() ? default_bitrate_bps : it->second;
}

AdmissionEstimates AdmissionEstimates::video_defaults() {
  AdmissionEstimates e;
  e.load_percent_per_drb[7] = 22.0;
  e.bitrate_bps_per_drb[7] = 3'000'000.0;
  return e;
}

std::string to_string(CellDecision d) {
  switch (d) {
    case CellDecision::AcceptLocal:
      return "AcceptLocal";
    case CellDecision::Escalate:
      return "Escalate";
    case CellDecision::RejectLocal:
      return "RejectLocal";
  }
  return "?";
}

std::string to_string(SliceDecision d) { return d == SliceDecision::Accept ? "Accept" : "Reject"; }

std::optional<double> projected_value(const CapacityRule& rule, const SliceCounters& counters,
                                      const AdmissionRequest& req, const AdmissionEstimates& est) {
  double delta = 0.0;
  bool touched = rule.metric == Metric::UeCount;
  for (const auto& d : req.drbs) {
    if (!matches(rule.match, d.qos)) continue;
    touched = true;
    auto n = static_cast<double>(d.count);
    switch (rule.metric) {
      case Metric::DrbCount:
        delta += n;
        break;
      case Metric::RadioLoadPercent:
        delta += n * est.load_for(d.qos.qci);
        break;
      case Metric::AggregatedBitRateBps:
        delta += n * est.bitrate_for(d.qos.qci);
        break;
      case Metric::UeCount:
        break;
    }
  }
  if (!touched) return std::nullopt;
  if (rule.metric == Metric::UeCount && req.new_ue) delta = 1.0;
  return counters.value(rule.metric, rule.match) + delta;
}

CellDecision evaluate_cell(const L3Descriptor& l3, const SliceCounters& cell, const AdmissionRequest& req,
                           const AdmissionEstimates& est) {
  bool any_min = false;
  bool within_guarantee = true;
  for (const auto& rule : l3.rules) {
    if (rule.scope != Scope::Cell) continue;
    auto post = projected_value(rule, cell, req, est);
    if (!post) continue;
    if (rule.bound == Bound::Max) {
      if (*post > rule.value) return CellDecision::RejectLocal;
    } else {
      any_min = true;
      within_guarantee = within_guarantee && *post <= rule.value;
    }
  }
  if (any_min && within_guarantee) return CellDecision::AcceptLocal;
  if (l3.has_scope(Scope::Slice)) return CellDecision::Escalate;
  return CellDecision::AcceptLocal;
}

SliceDecision evaluate_slice(const L3Descriptor& l3, const SliceView& slice, const AdmissionRequest& req,
                             const AdmissionEstimates& est) {
  for (const auto& cap : l3.rules) {
    if (cap.scope != Scope::Slice || cap.bound != Bound::Max) continue;
    auto post = projected_value(cap, slice.total, req, est);
    if (!post) continue;
    double reserved = 0.0;
    for (const auto& other : slice.other_cells) {
      double unused = 0.0;
      for (const auto& floor : l3.rules) {
        if (floor.scope != Scope::Cell || floor.bound != Bound::Min || floor.metric != cap.metric) continue;
        if (!overlaps(floor.match, cap.match)) continue;
        unused = std::max(unused, floor.value - other.value(floor.metric, floor.match));
      }
      reserved += unused;
    }
    if (*post + reserved > cap.value) return SliceDecision::Reject;
  }
  return SliceDecision::Accept;
}

}  // namespace ranslice::policy
