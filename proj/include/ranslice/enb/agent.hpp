#pragma once

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ranslice/enb/signals.hpp"
#include "ranslice/mac/scheduler.hpp"
#include "ranslice/policy/admission.hpp"
#include "ranslice/wire/message.hpp"
#include "ranslice/wire/session.hpp"

namespace ranslice::enb {

using TimerId = std::uint64_t;

struct CellConfig {
  CellId cell_id = 0;
  std::uint32_t dl_earfcn = 3100;
  std::uint32_t ul_earfcn = 21100;
  std::uint16_t n_prb = 50;
};

struct EnbConfig {
  EnbId enb_id = 1;
  std::string plmn_id = "21491";
  std::vector<CellConfig> cells{CellConfig{}};
  bool slicing_supported = true;
  std::uint32_t hello_period_ms = 2000;
  std::uint32_t meas_period_ms = 1000;
  Millis ac_guard_ms = 1000;
  Millis reconnect_initial_ms = 1000;
  Millis reconnect_cap_ms = 30'000;
  Rnti first_rnti = 0x46;
  /// Slice that takes UEs not listed by any active slice.
  std::optional<RsiId> default_slice;
  bool work_conserving = true;
  mac::CqiTable cqi_table = mac::CqiTable::default_table();
  mac::AccountingBasis accounting;
  policy::AdmissionEstimates estimates = policy::AdmissionEstimates::video_defaults();
};

/// How an attach was decided.
enum class AcPath { None, Local, Centralized };
std::string to_string(AcPath p);

struct AdmissionRecord {
  UeHandle ue = 0;
  CellId cell_id = 0;
  Rnti rnti = 0;
  std::optional<RsiId> rsi_id;
  AcPath path = AcPath::None;
  bool accepted = false;
  std::string reason;
};

/// What the eNB needs from its surroundings: a clock and timers, the three
/// signalling links, and the latency model's processing delays.
class EnbHost {
 public:
  virtual ~EnbHost() = default;
  virtual Millis now() const = 0;
  virtual TimerId schedule(Millis delay, std::function<void()> fn) = 0;
  virtual void cancel(TimerId id) = 0;
  /// Processing delay of `step` for `subject` (usually the UE handle).
  virtual Millis processing(Step step, std::uint64_t subject) = 0;

  /// Opens the control connection; false when refused.
  virtual bool connect_controller() = 0;
  virtual void send_controller(std::vector<std::uint8_t> frame) = 0;
  virtual void send_radio(const SignalMsg& msg) = 0;
  virtual void send_s1(const SignalMsg& msg) = 0;

  virtual void on_admission(const AdmissionRecord&) {}
  virtual void on_slice_measurement(CellId, const mac::IntervalCounters&) {}
};

enum class AssocErrc { NoMatchingSlice, AmbiguousAssociation };

struct Association {
  std::optional<RsiId> rsi_id;
  std::optional<AssocErrc> error;
};

enum class AttachStage { RrcConnected, ContextRequested, AcPending, DrbActive, Released };

struct AttachContext {
  UeHandle ue = 0;
  CellId cell_id = 0;
  Rnti rnti = 0;
  NasId nas_id;
  std::optional<RsiId> rsi_id;
  AttachStage stage = AttachStage::RrcConnected;
  AcPath path = AcPath::None;
  std::vector<policy::DrbRequest> drbs;
  /// Bearers counted against the slice (decision taken, maybe not yet active).
  bool admitted = false;
  std::uint32_t ac_xid = 0;
  std::optional<TimerId> guard;
};

struct SliceEntry {
  RsiId rsi_id = 0;
  policy::RsiTemplate tpl;
  bool active = false;
  std::vector<CellId> cells;
};

/// Simulated eNB control plane with its agent.
class Enb {
 public:
  Enb(EnbConfig config, EnbHost& host);

  const EnbConfig& config() const { return config_; }
  EnbId id() const { return config_.enb_id; }

  /// Connects to the controller (retrying with backoff) and starts the
  /// heartbeat.
  void start();
  bool connected() const { return connected_; }
  void on_controller_frame(std::span<const std::uint8_t> frame);
  void on_controller_lost();

  void on_radio(const SignalMsg& msg);
  void on_s1(const SignalMsg& msg);

  /// Runs one TTI on every cell; emits SliceMeas first when a measurement
  /// period ends at `now`.
  void tti();

  /// Downlink payload for an attached UE; dropped unless its DRB is active.
  void deliver_dl(CellId cell, Rnti rnti, std::uint64_t bytes);
  void set_cqi(CellId cell, Rnti rnti, int cqi);

  Association associate(const NasId& nas) const;
  const std::map<RsiId, SliceEntry>& slices() const { return slices_; }
  const std::map<Rnti, AttachContext>& contexts() const { return contexts_; }
  std::optional<Rnti> rnti_of(UeHandle ue) const;
  mac::Cell& cell(CellId id);
  const mac::Cell& cell(CellId id) const;
  /// Counters of slice `rsi` in `cell` over admitted UEs.
  policy::SliceCounters counters(RsiId rsi, CellId cell) const;
  wire::UeReportResp inventory() const;
  wire::RanSliceResp slice_view() const;

 private:
  void try_connect();
  void send_hello();
  /// Returns the xid the message went out with.
  std::uint32_t send(wire::Message msg, bool request);
  void send_ue_report();
  void handle(const wire::Message& msg);
  void handle_add_slice(const wire::Message& msg, const wire::AddSliceReq& req);
  void handle_remove_slice(const wire::Message& msg, const wire::RemoveSliceReq& req);
  void handle_ran_slice(const wire::Message& msg, const wire::RanSliceReq& req);
  void handle_ac_resp(const wire::AcResp& resp, std::uint32_t xid);
  void reply_error(const wire::Message& req, wire::Body body, wire::AgentErrc code);

  void on_setup_complete(const SignalMsg& msg);
  void local_admission(Rnti rnti);
  void accept(Rnti rnti, AcPath path);
  void reject(Rnti rnti, AcPath path, const std::string& reason);
  void release(Rnti rnti);
  void detach(Rnti rnti, const std::string& cause);
  void emit_measurements();

  EnbConfig config_;
  EnbHost& host_;
  std::map<CellId, mac::Cell> cells_;
  std::map<RsiId, SliceEntry> slices_;
  std::map<Rnti, AttachContext> contexts_;
  Rnti next_rnti_;
  wire::Session session_;
  bool connected_ = false;
  Millis backoff_ms_;
  std::optional<TimerId> hello_timer_;
  std::uint64_t epoch_ = 0;
};

}  // namespace ranslice::enb
