#include "ranslice/mac/scheduler.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <utility>

namespace ranslice::mac {

namespace {
constexpr std::uint64_t kHistoryTti = 10'000;
}

CqiTable::CqiTable(const std::array<std::uint32_t, 15>& bits_per_prb) : bits_(bits_per_prb) {
  for (std::size_t i = 0; i < bits_.size(); ++i) {
    if (bits_[i] == 0) throw CqiError("CQI table entry " + std::to_string(i + 1) + " is zero");
    if (i && bits_[i] < bits_[i - 1])
      throw CqiError("CQI table decreases at CQI " + std::to_string(i + 1));
  }
}

CqiTable CqiTable::default_table() {
  return CqiTable({18, 28, 45, 72, 105, 141, 177, 230, 289, 328, 399, 468, 543, 614, 667});
}

std::uint32_t CqiTable::per_prb(int cqi) const {
  if (cqi < 1 || cqi > 15) throw CqiError("CQI " + std::to_string(cqi) + " outside 1..15");
  return bits_[static_cast<std::size_t>(cqi - 1)];
}

std::uint32_t prbs_to_drain(std::uint64_t bytes, std::uint32_t bits_per_prb) {
  if (bytes == 0) return 0;
  auto bits = bytes * 8;
  auto prbs = (bits + bits_per_prb - 1) / bits_per_prb;
  return static_cast<std::uint32_t>(std::min<std::uint64_t>(prbs, 0xFFFFFFFFu));
}

Partition inter_slice_partition(std::span<const PartitionSlice> slices, std::uint32_t n_prb,
                                bool work_conserving, std::uint64_t rotation) {
  const std::size_t n = slices.size();
  Partition out{std::vector<std::uint32_t>(n, 0), std::vector<std::uint32_t>(n, 0)};
  if (n == 0) return out;

  std::vector<double> remainder(n, 0.0);
  std::vector<std::size_t> rr;
  std::uint32_t wrr_sum = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (!slices[i].share) {
      rr.push_back(i);
      continue;
    }
    double exact = *slices[i].share * n_prb / 100.0;
    auto q = static_cast<std::uint32_t>(std::floor(exact + 1e-9));
    q = std::min(q, n_prb - wrr_sum);
    out.nominal[i] = q;
    remainder[i] = std::max(0.0, exact - q);
    wrr_sum += q;
  }
  if (!rr.empty()) {
    std::uint32_t free = n_prb - wrr_sum;
    auto k = static_cast<std::uint32_t>(rr.size());
    auto start = static_cast<std::uint32_t>(rotation % k);
    for (std::uint32_t j = 0; j < k; ++j) {
      std::uint32_t pos = (j + k - start) % k;
      out.nominal[rr[j]] = free / k + (pos < free % k ? 1 : 0);
    }
  }

  std::uint32_t taken = 0;
  for (std::size_t i = 0; i < n; ++i) {
    out.granted[i] = std::min(out.nominal[i], slices[i].demand);
    taken += out.granted[i];
  }
  if (!work_conserving) return out;

  std::uint32_t pool = n_prb - taken;
  auto residual = [&](std::size_t i) { return slices[i].demand - out.granted[i]; };

  std::vector<std::size_t> by_remainder;
  for (std::size_t i = 0; i < n; ++i)
    if (remainder[i] > 0) by_remainder.push_back(i);
  std::stable_sort(by_remainder.begin(), by_remainder.end(),
                   [&](std::size_t a, std::size_t b) { return remainder[a] > remainder[b]; });
  for (auto i : by_remainder) {
    if (pool == 0) break;
    if (residual(i) > 0) {
      ++out.granted[i];
      --pool;
    }
  }

  auto start = static_cast<std::size_t>(rotation % n);
  while (pool > 0) {
    bool progressed = false;
    for (std::size_t j = 0; j < n && pool > 0; ++j) {
      auto i = (start + j) % n;
      if (residual(i) == 0) continue;
      ++out.granted[i];
      --pool;
      progressed = true;
    }
    if (!progressed) break;
  }
  return out;
}

std::vector<Grant> intra_slice_schedule(policy::IntraSlicePolicy policy, std::uint32_t quota,
                                        std::span<const UeView> ues, std::uint64_t rr_cursor,
                                        const CqiTable& table) {
  const std::size_t m = ues.size();
  std::vector<std::uint32_t> prbs(m, 0);
  auto left = [&](std::size_t i) { return ues[i].need - prbs[i]; };

  switch (policy) {
    case policy::IntraSlicePolicy::RR: {
      std::vector<std::size_t> order(m);
      for (std::size_t j = 0; j < m; ++j) order[j] = (static_cast<std::size_t>(rr_cursor % (m ? m : 1)) + j) % m;
      std::uint32_t q = quota;
      while (q > 0) {
        std::vector<std::size_t> wanting;
        for (auto i : order)
          if (left(i) > 0) wanting.push_back(i);
        if (wanting.empty()) break;
        auto share = static_cast<std::uint32_t>((q + wanting.size() - 1) / wanting.size());
        for (auto i : wanting) {
          auto g = std::min({share, left(i), q});
          prbs[i] += g;
          q -= g;
          if (q == 0) break;
        }
      }
      break;
    }
    case policy::IntraSlicePolicy::PF: {
      const double alpha = 1.0 / kPfWindowTti;
      std::vector<double> tentative(m, 0.0);
      for (std::uint32_t p = 0; p < quota; ++p) {
        std::optional<std::size_t> best;
        double best_metric = 0.0;
        for (std::size_t i = 0; i < m; ++i) {
          if (left(i) == 0) continue;
          double projected = (1.0 - alpha) * ues[i].pf_avg + alpha * tentative[i];
          double metric = table.per_prb(ues[i].cqi) / std::max(projected, 1e-9);
          if (!best || metric > best_metric) {
            best = i;
            best_metric = metric;
          }
        }
        if (!best) break;
        ++prbs[*best];
        tentative[*best] += table.per_prb(ues[*best].cqi);
      }
      break;
    }
    case policy::IntraSlicePolicy::MaxCI: {
      std::vector<std::size_t> order(m);
      std::iota(order.begin(), order.end(), 0);
      std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        auto ra = table.per_prb(ues[a].cqi), rb = table.per_prb(ues[b].cqi);
        return ra != rb ? ra > rb : ues[a].rnti < ues[b].rnti;
      });
      std::uint32_t q = quota;
      for (auto i : order) {
        auto g = std::min(q, left(i));
        prbs[i] += g;
        q -= g;
      }
      break;
    }
  }

  std::vector<Grant> grants;
  for (std::size_t i = 0; i < m; ++i)
    if (prbs[i]) grants.push_back({ues[i].rnti, prbs[i], table.bits(ues[i].cqi, prbs[i])});
  return grants;
}

double AccountingBasis::load_percent(std::uint64_t prb_used, std::uint32_t n_prb, std::uint32_t interval_tti) const {
  double base = kind == AccountingKind::PerTtiCapacity ? double(n_prb) * interval_tti : divisor * interval_tti / 1000.0;
  return base > 0 ? 100.0 * static_cast<double>(prb_used) / base : 0.0;
}

std::uint32_t TtiAllocation::total_granted() const {
  std::uint32_t n = 0;
  for (const auto& s : slices) n += s.granted;
  return n;
}

Cell::Cell(CellParams params) : params_(std::move(params)) {}

void Cell::add_slice(RsiId id, const policy::L2Descriptor& l2, bool active) {
  auto& s = slices_[id];
  s = SliceState{};
  s.l2 = l2;
  s.active = active;
}

void Cell::remove_slice(RsiId id) {
  slices_.erase(id);
  for (auto it = ues_.begin(); it != ues_.end();) {
    if (it->second.slice == id)
      it = ues_.erase(it);
    else
      ++it;
  }
}

void Cell::stage_update(RsiId id, const policy::L2Descriptor& l2) {
  if (auto it = slices_.find(id); it != slices_.end()) it->second.staged_l2 = l2;
}

void Cell::stage_active(RsiId id, bool active) {
  if (auto it = slices_.find(id); it != slices_.end()) it->second.staged_active = active;
}

std::optional<policy::L2Descriptor> Cell::descriptor(RsiId id) const {
  auto it = slices_.find(id);
  if (it == slices_.end()) return std::nullopt;
  return it->second.l2;
}

bool Cell::is_active(RsiId id) const {
  auto it = slices_.find(id);
  return it != slices_.end() && it->second.active;
}

void Cell::add_ue(Rnti rnti, RsiId slice, int cqi) {
  auto& ue = ues_[rnti];
  ue = UeState{};
  ue.slice = slice;
  ue.cqi = cqi;
  ue.pf_avg = params_.cqi_table.per_prb(cqi);
}

void Cell::remove_ue(Rnti rnti) { ues_.erase(rnti); }

void Cell::set_cqi(Rnti rnti, int cqi) {
  params_.cqi_table.per_prb(cqi);
  if (auto it = ues_.find(rnti); it != ues_.end()) it->second.cqi = cqi;
}

void Cell::enqueue(Rnti rnti, std::uint8_t drb_id, std::uint64_t bytes) {
  if (bytes == 0) return;
  if (auto it = ues_.find(rnti); it != ues_.end()) it->second.queues[drb_id] += bytes;
}

std::uint64_t Cell::queue_bytes(Rnti rnti) const {
  auto it = ues_.find(rnti);
  if (it == ues_.end()) return 0;
  std::uint64_t total = 0;
  for (const auto& [drb, q] : it->second.queues) total += q;
  return total;
}

std::optional<double> Cell::pf_avg(Rnti rnti) const {
  auto it = ues_.find(rnti);
  if (it == ues_.end()) return std::nullopt;
  return it->second.pf_avg;
}

UeUsage Cell::usage(Rnti rnti, std::uint32_t window_ms) const {
  UeUsage u;
  auto it = ues_.find(rnti);
  if (it == ues_.end()) return u;
  for (const auto& [t, rec] : it->second.history) {
    if (t + window_ms < tti_) continue;
    u.prbs += rec.prbs;
    u.bits += rec.bits;
  }
  return u;
}

void Cell::apply_staged() {
  for (auto& [id, s] : slices_) {
    if (s.staged_l2) s.l2 = *std::exchange(s.staged_l2, std::nullopt);
    if (s.staged_active) s.active = *std::exchange(s.staged_active, std::nullopt);
  }
}

std::uint32_t Cell::need_of(const UeState& ue) const {
  std::uint64_t total = 0;
  for (const auto& [drb, q] : ue.queues) total += q;
  return prbs_to_drain(total, params_.cqi_table.per_prb(ue.cqi));
}

void Cell::drain(UeState& ue, std::uint64_t bits) {
  auto bytes = bits / 8;
  for (auto it = ue.queues.begin(); it != ue.queues.end() && bytes > 0;) {
    auto take = std::min(bytes, it->second);
    it->second -= take;
    bytes -= take;
    if (it->second == 0)
      it = ue.queues.erase(it);
    else
      ++it;
  }
}

TtiAllocation Cell::step_tti() {
  apply_staged();
  TtiAllocation alloc;
  alloc.tti = tti_;

  std::vector<RsiId> ids;
  std::vector<PartitionSlice> input;
  std::vector<std::vector<UeView>> views;
  for (const auto& [id, s] : slices_) {
    if (!s.active) continue;
    std::vector<UeView> v;
    std::uint64_t demand = 0;
    for (const auto& [rnti, ue] : ues_) {
      if (ue.slice != id) continue;
      auto need = need_of(ue);
      v.push_back({rnti, ue.cqi, need, ue.pf_avg});
      demand += need;
    }
    ids.push_back(id);
    input.push_back({s.l2.wrr_share(), static_cast<std::uint32_t>(std::min<std::uint64_t>(demand, params_.n_prb))});
    views.push_back(std::move(v));
  }

  auto part = inter_slice_partition(input, params_.n_prb, params_.work_conserving, tti_);
  const double alpha = 1.0 / kPfWindowTti;

  for (std::size_t i = 0; i < ids.size(); ++i) {
    auto& slice = slices_.at(ids[i]);
    SliceAllocation sa;
    sa.rsi_id = ids[i];
    sa.quota = part.nominal[i];
    auto grants = intra_slice_schedule(slice.l2.intra_slice, part.granted[i], views[i], slice.rr_cursor,
                                       params_.cqi_table);
    ++slice.rr_cursor;

    std::map<Rnti, std::uint64_t> served;
    for (auto& g : grants) {
      auto& ue = ues_.at(g.rnti);
      std::uint64_t queued_bits = 0;
      for (const auto& [drb, q] : ue.queues) queued_bits += q * 8;
      g.bits = std::min(g.bits, queued_bits);
      drain(ue, g.bits);
      served[g.rnti] = g.bits;
      ue.history.push_back({tti_, UeUsage{g.prbs, g.bits}});
      sa.granted += g.prbs;
      if (trace_) trace_({tti_, ids[i], g.rnti, g.prbs, g.bits});
    }
    for (const auto& v : views[i]) {
      auto& ue = ues_.at(v.rnti);
      ue.pf_avg = (1.0 - alpha) * ue.pf_avg + alpha * static_cast<double>(served[v.rnti]);
      while (!ue.history.empty() && ue.history.front().first + kHistoryTti < tti_) ue.history.pop_front();
    }
    slice.assigned += sa.quota;
    slice.used += sa.granted;
    sa.grants = std::move(grants);
    alloc.slices.push_back(std::move(sa));
  }

  ++interval_tti_;
  ++tti_;
  return alloc;
}

std::vector<IntervalCounters> Cell::rollup() {
  std::vector<IntervalCounters> out;
  for (auto& [id, s] : slices_) {
    IntervalCounters c;
    c.rsi_id = id;
    c.dl_prb_assigned = s.assigned;
    c.dl_prb_used = s.used;
    c.interval_tti = interval_tti_;
    c.load_percent = params_.accounting.load_percent(s.used, params_.n_prb, interval_tti_);
    out.push_back(c);
    s.assigned = 0;
    s.used = 0;
  }
  interval_tti_ = 0;
  return out;
}

}  // namespace ranslice::mac
