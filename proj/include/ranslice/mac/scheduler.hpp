#pragma once

#include <array>
#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "ranslice/common/ids.hpp"
#include "ranslice/policy/template.hpp"

namespace ranslice::mac {

class CqiError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Bits carried by one PRB in one TTI at each CQI (1..15).
class CqiTable {
 public:
  /// Throws CqiError if the table is not nondecreasing or has a zero entry.
  explicit CqiTable(const std::array<std::uint32_t, 15>& bits_per_prb);
  /// Placeholder table documented in docs/cqi-table.md.
  static CqiTable default_table();

  std::uint32_t per_prb(int cqi) const;
  std::uint64_t bits(int cqi, std::uint32_t prbs) const { return std::uint64_t{per_prb(cqi)} * prbs; }
  const std::array<std::uint32_t, 15>& entries() const { return bits_; }

 private:
  std::array<std::uint32_t, 15> bits_;
};

/// PRBs needed to drain `bytes` at `bits_per_prb`.
std::uint32_t prbs_to_drain(std::uint64_t bytes, std::uint32_t bits_per_prb);

// --- inter-slice -------------------------------------------------------------

struct PartitionSlice {
  /// WRR share in percent; nullopt for an RR slice.
  std::optional<double> share;
  /// PRBs this slice can use this TTI.
  std::uint32_t demand = 0;
};

struct Partition {
  /// Configured quota per slice (floor of share, or the RR split).
  std::vector<std::uint32_t> nominal;
  /// PRBs the slice may hand to its UEs this TTI.
  std::vector<std::uint32_t> granted;
};

/// Splits n_prb among slices. WRR slices get floor(share * n_prb / 100); RR
/// slices split what the WRR slices leave, with the remainder handed out
/// from `rotation` onwards. With work conservation on, PRBs unused by their
/// owner (idle slices, flooring remainders, unconfigured headroom) go to
/// slices that still have demand, by largest WRR remainder first and then
/// one at a time round-robin from `rotation`.
Partition inter_slice_partition(std::span<const PartitionSlice> slices, std::uint32_t n_prb,
                                bool work_conserving, std::uint64_t rotation);

// --- intra-slice -------------------------------------------------------------

struct UeView {
  Rnti rnti = 0;
  int cqi = 1;
  /// PRBs needed to empty the UE's queues.
  std::uint32_t need = 0;
  /// PF average served rate in bits/TTI.
  double pf_avg = 1.0;
};

struct Grant {
  Rnti rnti = 0;
  std::uint32_t prbs = 0;
  std::uint64_t bits = 0;

  bool operator==(const Grant&) const = default;
};

inline constexpr double kPfWindowTti = 100.0;

/// Hands `quota` PRBs to the UEs of one slice. `ues` is ordered by rnti.
/// Grants never exceed a UE's need; leftover PRBs are not assigned.
std::vector<Grant> intra_slice_schedule(policy::IntraSlicePolicy policy, std::uint32_t quota,
                                        std::span<const UeView> ues, std::uint64_t rr_cursor,
                                        const CqiTable& table);

// --- cell --------------------------------------------------------------------

enum class AccountingKind { PerTtiCapacity, PaperBasis };

struct AccountingBasis {
  AccountingKind kind = AccountingKind::PerTtiCapacity;
  /// PRBs per `interval` treated as 100% under PaperBasis.
  double divisor = 10000.0;

  double load_percent(std::uint64_t prb_used, std::uint32_t n_prb, std::uint32_t interval_tti) const;
};

struct CellParams {
  std::uint16_t n_prb = 50;
  bool work_conserving = true;
  CqiTable cqi_table = CqiTable::default_table();
  AccountingBasis accounting;
};

struct SliceAllocation {
  RsiId rsi_id = 0;
  std::uint32_t quota = 0;
  std::uint32_t granted = 0;
  std::vector<Grant> grants;
};

struct TtiAllocation {
  std::uint64_t tti = 0;
  std::vector<SliceAllocation> slices;

  std::uint32_t total_granted() const;
};

struct IntervalCounters {
  RsiId rsi_id = 0;
  std::uint64_t dl_prb_assigned = 0;
  std::uint64_t dl_prb_used = 0;
  std::uint64_t ul_prb_assigned = 0;
  std::uint64_t ul_prb_used = 0;
  std::uint32_t interval_tti = 0;
  double load_percent = 0.0;
};

struct TraceRecord {
  std::uint64_t tti = 0;
  RsiId rsi_id = 0;
  Rnti rnti = 0;
  std::uint32_t prbs = 0;
  std::uint64_t bits = 0;
};

struct UeUsage {
  std::uint64_t prbs = 0;
  std::uint64_t bits = 0;
};

/// One cell's downlink scheduler. Slice descriptor changes and
/// (de)activation are staged and take effect at the start of the next
/// step_tti().
class Cell {
 public:
  explicit Cell(CellParams params);

  const CellParams& params() const { return params_; }
  std::uint64_t tti() const { return tti_; }

  void add_slice(RsiId id, const policy::L2Descriptor& l2, bool active = true);
  void remove_slice(RsiId id);
  bool has_slice(RsiId id) const { return slices_.count(id) != 0; }
  void stage_update(RsiId id, const policy::L2Descriptor& l2);
  void stage_active(RsiId id, bool active);
  std::optional<policy::L2Descriptor> descriptor(RsiId id) const;
  bool is_active(RsiId id) const;

  void add_ue(Rnti rnti, RsiId slice, int cqi);
  void remove_ue(Rnti rnti);
  bool has_ue(Rnti rnti) const { return ues_.count(rnti) != 0; }
  void set_cqi(Rnti rnti, int cqi);
  void enqueue(Rnti rnti, std::uint8_t drb_id, std::uint64_t bytes);
  std::uint64_t queue_bytes(Rnti rnti) const;
  std::optional<double> pf_avg(Rnti rnti) const;
  /// PRBs and bits granted to `rnti` over the last `window_ms` TTIs.
  UeUsage usage(Rnti rnti, std::uint32_t window_ms) const;

  TtiAllocation step_tti();
  /// Interval counters of every slice since the last rollup, then reset.
  std::vector<IntervalCounters> rollup();

  void set_trace_sink(std::function<void(const TraceRecord&)> sink) { trace_ = std::move(sink); }

 private:
  struct SliceState {
    policy::L2Descriptor l2;
    bool active = true;
    std::optional<policy::L2Descriptor> staged_l2;
    std::optional<bool> staged_active;
    std::uint64_t rr_cursor = 0;
    std::uint64_t assigned = 0;
    std::uint64_t used = 0;
  };
  struct UeState {
    RsiId slice = 0;
    int cqi = 1;
    std::map<std::uint8_t, std::uint64_t> queues;
    double pf_avg = 0.0;
    std::deque<std::pair<std::uint64_t, UeUsage>> history;
  };

  void apply_staged();
  std::uint32_t need_of(const UeState& ue) const;
  void drain(UeState& ue, std::uint64_t bits);

  CellParams params_;
  std::map<RsiId, SliceState> slices_;
  std::map<Rnti, UeState> ues_;
  std::uint64_t tti_ = 0;
  std::uint32_t interval_tti_ = 0;
  std::function<void(const TraceRecord&)> trace_;
};

}  // namespace ranslice::mac
