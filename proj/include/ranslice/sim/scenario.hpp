#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "ranslice/controller/controller.hpp"
#include "ranslice/enb/agent.hpp"
#include "ranslice/sim/latency.hpp"

namespace ranslice::sim {

class SpecError : public std::runtime_error {
 public:
  SpecError(std::string field, const std::string& what)
      : std::runtime_error(field.empty() ? what : field + ": " + what), field_(std::move(field)) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

struct EnbSpec {
  enb::EnbConfig config;
  /// Overrides the scenario profile for this eNB's hops and steps.
  std::optional<LatencyProfile> latency;
};

struct ControllerSpec {
  std::uint32_t hello_period_ms = 2000;
  Millis handshake_timeout_ms = 5000;
  Millis commit_timeout_ms = 5000;
  Millis provisional_ttl_ms = 5000;
  /// When false the controller refuses connections (eNBs keep retrying).
  bool up = true;
};

struct SliceSpec {
  Millis at_ms = 0;
  policy::RsiTemplate tpl;
};

enum class ActionKind { Update, Activate, Deactivate, Decommission };
std::string to_string(ActionKind k);

/// Operator action on an existing slice at a given time.
struct ActionSpec {
  Millis at_ms = 0;
  ActionKind kind = ActionKind::Activate;
  RsiId rsi_id = 0;
  std::optional<policy::RrmPolicy> policy;
};

struct UeSpec {
  std::string label;
  NasId nas_id;
  CellRef cell;
  Millis power_on_ms = 0;
  /// Downlink CBR rate; 0 disables traffic.
  std::uint64_t cbr_bps = 0;
  /// CQI per TTI, replayed cyclically; a single value is a constant.
  std::vector<int> cqi{9};
};

struct ScenarioSpec {
  std::string name = "scenario";
  std::uint64_t seed = 1;
  LatencyProfile latency = LatencyProfile::paper_calibrated();
  std::vector<EnbSpec> enbs;
  std::vector<NasId> epc_subscribers;
  ControllerSpec controller;
  std::vector<SliceSpec> slices;
  std::vector<ActionSpec> actions;
  std::vector<UeSpec> ues;
  Millis duration_ms = 7000;
  mac::AccountingBasis accounting;
  policy::AdmissionEstimates estimates = policy::AdmissionEstimates::video_defaults();
};

/// Parses a scenario document. Relative CQI trace paths resolve against
/// `base_dir`. Throws SpecError with the offending field path.
ScenarioSpec spec_from_json(const nlohmann::json& doc, const std::filesystem::path& base_dir = {});
ScenarioSpec load_spec(const std::filesystem::path& file);
nlohmann::json spec_to_json(const ScenarioSpec& spec);
/// Cross-reference checks; throws SpecError.
void validate_spec(const ScenarioSpec& spec);

/// Built-in specs: "section-v" (three UEs, min-1/max-2 DRB policy) and
/// "section-v-noslice" (same UEs, slicing disabled).
std::optional<ScenarioSpec> builtin_spec(const std::string& name);
std::vector<std::string> builtin_names();

}  // namespace ranslice::sim
