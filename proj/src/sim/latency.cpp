#include "ranslice/sim/latency.hpp"

#include <stdexcept>

namespace ranslice::sim {

using enb::Step;

LatencyProfile LatencyProfile::paper_calibrated() {
  LatencyProfile p;
  p.name = "paper-calibrated";
  p[Step::AirLink] = {5, 0};
  p[Step::S1Link] = {5, 0};
  p[Step::ControlLink] = {50, 0};
  p[Step::EnbRrcProc] = {10, 0};
  p[Step::UeRrcProc] = {30, 10};
  p[Step::EpcAttachProc] = {219, 35};
  p[Step::EnbLocalAcProc] = {18, 0};
  p[Step::ControllerAcProc] = {12, 0};
  p[Step::EnbCentralAcceptProc] = {79, 30};
  p[Step::EnbContextSetupProc] = {71, 0};
  p[Step::UeReconfigProc] = {40, 10};
  p[Step::EpcReleaseProc] = {5, 0};
  return p;
}

LatencyProfile LatencyProfile::zero_jitter() {
  auto p = paper_calibrated();
  p.name = "zero-jitter";
  for (auto& d : p.steps) d.jitter = 0;
  return p;
}

std::optional<LatencyProfile> LatencyProfile::named(const std::string& name) {
  if (name == "paper-calibrated") return paper_calibrated();
  if (name == "zero-jitter") return zero_jitter();
  return std::nullopt;
}

Millis LatencyProfile::ac_round_trip() const {
  return 2 * (*this)[Step::ControlLink].mean + (*this)[Step::ControllerAcProc].mean;
}

std::optional<Step> step_from_string(const std::string& name) {
  for (std::size_t i = 0; i < enb::kStepCount; ++i)
    if (enb::to_string(static_cast<Step>(i)) == name) return static_cast<Step>(i);
  return std::nullopt;
}

LatencyProfile latency_from_json(const nlohmann::json& doc) {
  if (doc.is_string()) {
    auto p = LatencyProfile::named(doc.get<std::string>());
    if (!p) throw std::invalid_argument("unknown latency profile '" + doc.get<std::string>() + "'");
    return *p;
  }
  if (!doc.is_object()) throw std::invalid_argument("latency must be a profile name or an object");
  LatencyProfile p = LatencyProfile::zero_jitter();
  p.name = "custom";
  if (doc.contains("base")) {
    p = latency_from_json(doc.at("base"));
    p.name = "custom";
  }
  for (const auto& [key, value] : doc.items()) {
    if (key == "base") continue;
    auto step = step_from_string(key);
    if (!step) throw std::invalid_argument("unknown latency step '" + key + "'");
    Delay d;
    if (value.is_number_integer()) {
      d.mean = value.get<Millis>();
    } else {
      d.mean = value.at("mean").get<Millis>();
      d.jitter = value.value("jitter", Millis{0});
    }
    if (d.mean < 0 || d.jitter < 0) throw std::invalid_argument("latency step '" + key + "' must be non-negative");
    p[*step] = d;
  }
  return p;
}

nlohmann::json latency_to_json(const LatencyProfile& p) {
  nlohmann::json out = nlohmann::json::object();
  for (std::size_t i = 0; i < enb::kStepCount; ++i)
    out[enb::to_string(static_cast<Step>(i))] = {{"mean", p.steps[i].mean}, {"jitter", p.steps[i].jitter}};
  return out;
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t mix_key(std::uint64_t seed, std::uint64_t a, std::uint64_t b, std::uint64_t c) {
  auto h = splitmix64(seed);
  h = splitmix64(h ^ a);
  h = splitmix64(h ^ b);
  return splitmix64(h ^ c);
}

Millis LatencyDraws::draw(Step step, std::uint64_t subject) {
  const auto& d = profile_[step];
  auto n = occurrences_[{step, subject}]++;
  if (d.jitter == 0) return d.mean;
  auto span = static_cast<std::uint64_t>(2 * d.jitter + 1);
  auto offset = static_cast<Millis>(mix_key(seed_, static_cast<std::uint64_t>(step), n, 0) % span) - d.jitter;
  return std::max<Millis>(0, d.mean + offset);
}

}  // namespace ranslice::sim
