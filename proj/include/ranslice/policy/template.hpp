#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "ranslice/common/ids.hpp"

namespace ranslice::policy {

inline constexpr int kMinQci = 1;
inline constexpr int kMaxQci = 255;
inline constexpr int kMinArp = 1;
inline constexpr int kMaxArp = 15;

struct QosProfile {
  std::uint8_t qci = 9;
  std::uint8_t arp = 15;

  auto operator<=>(const QosProfile&) const = default;
};

/// `count` bearers sharing one QoS profile, as requested for admission.
struct DrbRequest {
  std::uint32_t count = 1;
  QosProfile qos;

  bool operator==(const DrbRequest&) const = default;
};

/// One (QCI, ARP) pattern; an empty component is the wildcard.
struct QosPattern {
  std::optional<std::uint8_t> qci;
  std::optional<std::uint8_t> arp;

  static QosPattern any() { return {}; }
  bool is_wildcard() const { return !qci && !arp; }
  bool operator==(const QosPattern&) const = default;
};

struct QosMatch {
  std::vector<QosPattern> pairs{QosPattern::any()};

  static QosMatch any() { return {}; }
  static QosMatch exactly(QosProfile q) { return QosMatch{{QosPattern{q.qci, q.arp}}}; }
  bool is_wildcard_only() const;
  bool operator==(const QosMatch&) const = default;
};

bool matches(const QosPattern& pattern, const QosProfile& q);
bool matches(const QosMatch& match, const QosProfile& q);
/// True when some profile is matched by both.
bool overlaps(const QosMatch& a, const QosMatch& b);

enum class Metric : std::uint8_t {
  RadioLoadPercent = 0,
  AggregatedBitRateBps = 1,
  DrbCount = 2,
  UeCount = 3,
};
enum class Scope : std::uint8_t { Cell = 0, Slice = 1 };
enum class Bound : std::uint8_t { Min = 0, Max = 1 };

struct CapacityRule {
  Metric metric = Metric::DrbCount;
  QosMatch match;
  Scope scope = Scope::Cell;
  Bound bound = Bound::Max;
  double value = 0.0;

  bool operator==(const CapacityRule&) const = default;
};

struct L3Descriptor {
  std::vector<CapacityRule> rules;
  std::uint32_t averaging_window_ms = 1000;

  bool has_scope(Scope s) const;
  bool operator==(const L3Descriptor&) const = default;
};

struct InterSliceRr {
  bool operator==(const InterSliceRr&) const = default;
};
struct InterSliceWrr {
  double share_percent = 100.0;
  bool operator==(const InterSliceWrr&) const = default;
};
using InterSlicePolicy = std::variant<InterSliceRr, InterSliceWrr>;

enum class IntraSlicePolicy : std::uint8_t { RR = 0, PF = 1, MaxCI = 2 };

struct L2Descriptor {
  InterSlicePolicy inter_slice = InterSliceWrr{};
  IntraSlicePolicy intra_slice = IntraSlicePolicy::RR;

  std::optional<double> wrr_share() const;
  bool operator==(const L2Descriptor&) const = default;
};

struct RrmPolicy {
  L3Descriptor l3;
  L2Descriptor l2;
  /// L1 descriptor, carried through untouched.
  std::optional<std::vector<std::uint8_t>> l1_opaque;

  bool operator==(const RrmPolicy&) const = default;
};

struct Snssai {
  std::string plmn_id;
  std::uint8_t sst = 1;
  std::optional<std::uint32_t> sd;  // 24-bit

  bool operator==(const Snssai&) const = default;
};

struct RsiTemplate {
  RsiId rsi_id = 0;
  std::vector<std::string> plmn_list;
  std::vector<Snssai> snssai_list;
  std::vector<CellRef> cell_list;
  RrmPolicy rrm_policy;
  std::vector<NasId> nas_id_list;

  bool operator==(const RsiTemplate&) const = default;
};

/// A template that passed validate_template(). Only constructible there.
class ValidatedTemplate {
 public:
  const RsiTemplate& get() const { return tpl_; }
  const RsiTemplate* operator->() const { return &tpl_; }
  bool operator==(const ValidatedTemplate&) const = default;

 private:
  friend ValidatedTemplate make_validated(RsiTemplate tpl);
  explicit ValidatedTemplate(RsiTemplate tpl) : tpl_(std::move(tpl)) {}
  RsiTemplate tpl_;
};

/// Usage counters for one slice over one scope: a single cell, or the
/// whole slice across its cells.
struct SliceCounters {
  std::map<QosProfile, std::uint32_t> active_drbs;
  std::uint32_t connected_ues = 0;
  std::map<QosProfile, double> radio_load_percent;
  std::map<QosProfile, double> bitrate_bps;

  std::uint32_t total_drbs() const;
  /// Current value of `metric` restricted to profiles accepted by `match`.
  double value(Metric metric, const QosMatch& match) const;
  SliceCounters& operator+=(const SliceCounters& other);
  bool operator==(const SliceCounters&) const = default;
};

std::string to_string(Metric m);
std::string to_string(Scope s);
std::string to_string(Bound b);
std::string to_string(IntraSlicePolicy p);

}  // namespace ranslice::policy
