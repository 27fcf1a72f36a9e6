#pragma once

#include <cstdint>
#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"

#include "ranslice/controller/controller.hpp"
#include "ranslice/enb/agent.hpp"
#include "ranslice/sim/event_loop.hpp"
#include "ranslice/sim/latency.hpp"
#include "ranslice/sim/scenario.hpp"

namespace ranslice::sim {

enum class Outcome { Pending, Accepted, Rejected };
std::string to_string(Outcome o);

struct AttachOutcome {
  std::size_t index = 0;  // 1-based, in spec order
  std::string label;
  NasId nas_id;
  CellRef cell;
  std::optional<Rnti> rnti;
  Millis power_on_ms = 0;
  Outcome outcome = Outcome::Pending;
  enb::AcPath path = enb::AcPath::None;
  std::string reason;
  std::uint32_t ac_requests = 0;
  std::uint32_t ac_responses = 0;
  // eNB-side timestamps
  std::optional<Millis> rrc_request_at;
  std::optional<Millis> rrc_setup_complete_at;
  std::optional<Millis> registration_end_at;
  std::optional<Millis> ac_request_at;
  std::optional<Millis> ac_response_at;
  std::optional<Millis> drb_active_at;

  std::optional<Millis> rrc_setup_ms() const;
  std::optional<Millis> registration_ms() const;
  std::optional<Millis> ac_exchange_ms() const;
};

struct RunReport {
  std::string scenario;
  std::uint64_t seed = 0;
  std::string latency_profile;
  Millis duration_ms = 0;
  std::vector<AttachOutcome> ues;
  /// Final controller view per slice, including its measurement series.
  nlohmann::ordered_json slices = nlohmann::ordered_json::array();
  std::map<std::string, std::uint64_t> wire_counts;
  std::uint64_t wire_frames = 0;
  /// Sum of dl_prb_used over every SliceMeas frame seen on the wire.
  std::uint64_t wire_dl_prb_used = 0;
  std::vector<std::string> errors;
  std::optional<std::string> trace_path;

  bool ok() const { return errors.empty(); }
};

nlohmann::ordered_json report_to_json(const RunReport& r);

struct RunOptions {
  std::string wire_log_path;
  std::string event_log_path;
  std::string trace_path;
  /// Keeps the event log in memory (World::events()).
  bool capture_events = false;
};

/// One simulated deployment: controller, eNBs, EPC stub and UEs on a shared
/// event loop.
class World {
 public:
  explicit World(ScenarioSpec spec, RunOptions options = {});
  ~World();
  World(const World&) = delete;
  World& operator=(const World&) = delete;

  /// Schedules the spec (eNB start, slices, actions, power-ons) and runs to
  /// the end of the scenario.
  RunReport run();

  /// Lower-level driving for tests: boot() schedules the spec without
  /// running; advance() runs the loop to an absolute time.
  void boot();
  void advance(Millis until);
  RunReport report() const;

  EventLoop& loop() { return loop_; }
  controller::Controller& controller() { return *controller_; }
  enb::Enb& enb(EnbId id);
  const ScenarioSpec& spec() const { return spec_; }
  const std::vector<AttachOutcome>& outcomes() const { return outcomes_; }
  const std::vector<std::string>& events() const { return events_; }
  /// Transitions observed on the controller, in order.
  const std::vector<controller::Transition>& transitions() const { return transitions_; }
  const std::vector<std::string>& controller_log() const { return controller_log_; }

  /// Powers on an extra UE at an absolute time; returns its handle.
  enb::UeHandle add_ue(UeSpec ue);
  /// Cuts an eNB's control connection from the network side.
  void sever(EnbId id);
  void set_controller_up(bool up) { spec_.controller.up = up; }

 private:
  class EnbPort;
  class ControllerPort;
  struct UeSim {
    UeSpec spec;
    enb::UeHandle handle = 0;
    std::optional<Rnti> rnti;
    bool attached = false;
    bool released = false;
    std::uint64_t cbr_acc = 0;
    std::size_t cqi_pos = 0;
  };
  struct ControlConn {
    EnbId enb = 0;
    bool open = true;
  };

  Millis draw(enb::Step step, EnbId enb, std::uint64_t subject);
  Millis link_delivery(const std::string& link, Millis delay);
  void event(nlohmann::ordered_json record);
  void wire_frame(const std::string& from, const std::string& to, std::span<const std::uint8_t> frame);

  void ue_receive(const enb::SignalMsg& msg);
  void enb_receive_radio(const enb::SignalMsg& msg);
  void epc_receive(const enb::SignalMsg& msg);
  void enb_receive_s1(const enb::SignalMsg& msg);
  void send_radio_up(const UeSim& ue, enb::SignalMsg msg);
  void send_s1_down(enb::SignalMsg msg);
  void tick();
  UeSim* ue_by_rnti(EnbId enb, Rnti rnti);

  ScenarioSpec spec_;
  RunOptions options_;
  EventLoop loop_;
  std::unique_ptr<ControllerPort> controller_port_;
  std::unique_ptr<controller::Controller> controller_;
  std::map<EnbId, std::unique_ptr<EnbPort>> ports_;
  std::map<EnbId, std::unique_ptr<enb::Enb>> enbs_;
  std::map<EnbId, LatencyDraws> draws_;
  std::map<controller::ConnId, ControlConn> conns_;
  std::map<EnbId, controller::ConnId> conn_of_;
  controller::ConnId next_conn_ = 1;
  std::vector<UeSim> ues_;
  std::vector<AttachOutcome> outcomes_;
  std::set<NasId> subscribers_;
  std::map<std::string, Millis> link_last_;
  std::vector<std::string> events_;
  std::vector<controller::Transition> transitions_;
  std::vector<std::string> controller_log_;
  std::map<std::string, std::uint64_t> wire_counts_;
  std::uint64_t wire_frames_ = 0;
  std::uint64_t wire_dl_prb_used_ = 0;
  std::vector<std::string> errors_;
  std::ofstream wire_log_;
  std::ofstream event_log_;
  std::ofstream trace_;
  bool booted_ = false;
};

RunReport run(const ScenarioSpec& spec, const RunOptions& options = {});

struct StageStats {
  double mean = 0.0;
  double stddev = 0.0;
  std::size_t n = 0;
};

/// Summary of `n` runs with derived seeds, grouped by decision path
/// ("none", "local", "centralized", and "rejected" for denied attaches).
struct RepeatReport {
  std::string scenario;
  std::size_t runs = 0;
  std::map<std::string, StageStats> rrc_setup;
  std::map<std::string, StageStats> registration;
  std::map<std::string, StageStats> ac_exchange;
  /// Accept/reject outcome per UE index is the same in every run.
  bool outcomes_stable = true;
  std::vector<std::string> errors;
};

std::uint64_t derived_seed(std::uint64_t seed, std::size_t run);
StageStats summarize(const std::vector<double>& samples);
RepeatReport repeat(const ScenarioSpec& spec, std::size_t n);
nlohmann::ordered_json repeat_to_json(const RepeatReport& r);
std::string path_group(const AttachOutcome& o);

}  // namespace ranslice::sim
