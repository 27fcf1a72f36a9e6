#pragma once

#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "ranslice/policy/template.hpp"

namespace ranslice::policy {

enum class ValidationErrc {
  DuplicateId,
  UnknownCell,
  SlicingUnsupported,
  InconsistentBounds,
  ShareOverflow,
  OutOfRange,
};

std::string to_string(ValidationErrc code);

class ValidationError : public std::runtime_error {
 public:
  ValidationError(ValidationErrc code, std::string field, const std::string& what);
  ValidationErrc code() const { return code_; }
  /// Dotted path into the template document, e.g. "rrm_policy.l3.rules[1].value".
  const std::string& field() const { return field_; }

 private:
  ValidationErrc code_;
  std::string field_;
};

/// What the controller knows about one cell from Capabilities.
struct RanCell {
  std::uint16_t n_prb = 0;
  bool slicing_supported = false;
};
using RanMap = std::map<CellRef, RanCell>;

/// Checks identifiers, cells, rule bounds and WRR share budgets against the
/// RAN map and the set of slices that are not decommissioned. The template
/// whose id equals `replacing` (if any) is excluded from the duplicate and
/// share checks, which is how descriptor updates are validated.
ValidatedTemplate validate_template(const RsiTemplate& tpl, const RanMap& network,
                                    std::span<const RsiTemplate> existing,
                                    std::optional<RsiId> replacing = std::nullopt);

/// Checks the descriptor-only invariants (ranges, Min <= Max, window).
void validate_policy(const RrmPolicy& policy, const std::string& field_prefix = "rrm_policy");

/// Nominal per-DRB radio load and bit rate used to project counters for
/// admission, keyed by QCI.
struct AdmissionEstimates {
  std::map<std::uint8_t, double> load_percent_per_drb;
  std::map<std::uint8_t, double> bitrate_bps_per_drb;
  double default_load_percent = 5.0;
  double default_bitrate_bps = 1'000'000.0;

  double load_for(std::uint8_t qci) const;
  double bitrate_for(std::uint8_t qci) const;
  /// QCI 7 video bearers at 3 Mb/s; everything else at the defaults.
  static AdmissionEstimates video_defaults();
};

struct AdmissionRequest {
  std::vector<DrbRequest> drbs;
  /// The requesting UE is not yet counted in connected_ues.
  bool new_ue = true;
};

enum class CellDecision { AcceptLocal, Escalate, RejectLocal };
enum class SliceDecision { Accept, Reject };

std::string to_string(CellDecision d);
std::string to_string(SliceDecision d);

/// Post-admission value of `rule`'s metric, or nullopt when the request does
/// not touch the rule (no requested DRB matches it).
std::optional<double> projected_value(const CapacityRule& rule, const SliceCounters& counters,
                                      const AdmissionRequest& req, const AdmissionEstimates& est);

/// Local (eNB, cell-scope) admission decision.
CellDecision evaluate_cell(const L3Descriptor& l3, const SliceCounters& cell,
                           const AdmissionRequest& req, const AdmissionEstimates& est = {});

/// Slice-wide view the controller evaluates against: the aggregate over all
/// cells of the slice, plus the per-cell counters of every cell other than
/// the requesting one. Unused cell-level minimum guarantees in those other
/// cells stay reserved against slice-level maxima.
struct SliceView {
  SliceCounters total;
  std::vector<SliceCounters> other_cells;
};

/// Centralized (controller, slice-scope) admission decision.
SliceDecision evaluate_slice(const L3Descriptor& l3, const SliceView& slice,
                             const AdmissionRequest& req, const AdmissionEstimates& est = {});

}  // namespace ranslice::policy
