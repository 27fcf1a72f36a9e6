#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>

#include "json.hpp"

#include "ranslice/enb/signals.hpp"

namespace ranslice::sim {

/// Constant delay with optional uniform integer jitter in [mean-jitter, mean+jitter].
struct Delay {
  Millis mean = 0;
  Millis jitter = 0;
  bool operator==(const Delay&) const = default;
};

struct LatencyProfile {
  std::string name = "custom";
  std::array<Delay, enb::kStepCount> steps{};

  Delay& operator[](enb::Step s) { return steps[static_cast<std::size_t>(s)]; }
  const Delay& operator[](enb::Step s) const { return steps[static_cast<std::size_t>(s)]; }

  /// Fitted so that the three attach paths land on the testbed's mean times.
  static LatencyProfile paper_calibrated();
  /// Same means, no jitter.
  static LatencyProfile zero_jitter();
  static std::optional<LatencyProfile> named(const std::string& name);

  /// Signalling round trip eNB -> controller -> eNB including controller
  /// processing.
  Millis ac_round_trip() const;
};

/// "paper-calibrated", "zero-jitter", or an object with an optional "base"
/// and per-step {mean, jitter} overrides keyed by step name.
LatencyProfile latency_from_json(const nlohmann::json& doc);
nlohmann::json latency_to_json(const LatencyProfile& p);

std::optional<enb::Step> step_from_string(const std::string& name);

/// Deterministic draws: the n-th draw of a step for a subject depends only on
/// (seed, step, n), never on the global interleaving. Subjects share the
/// sequence, so two UEs (or two scenarios run with one seed) see the same
/// jitter and path comparisons are paired.
class LatencyDraws {
 public:
  LatencyDraws(LatencyProfile profile, std::uint64_t seed) : profile_(std::move(profile)), seed_(seed) {}
  Millis draw(enb::Step step, std::uint64_t subject);
  const LatencyProfile& profile() const { return profile_; }

 private:
  LatencyProfile profile_;
  std::uint64_t seed_;
  std::map<std::pair<enb::Step, std::uint64_t>, std::uint64_t> occurrences_;
};

std::uint64_t splitmix64(std::uint64_t x);
std::uint64_t mix_key(std::uint64_t seed, std::uint64_t a, std::uint64_t b, std::uint64_t c);

}  // namespace ranslice::sim
