#pragma once

#include <deque>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "ranslice/mac/scheduler.hpp"
#include "ranslice/policy/admission.hpp"
#include "ranslice/wire/message.hpp"
#include "ranslice/wire/session.hpp"

namespace ranslice::controller {

using ConnId = std::uint64_t;
using TimerId = std::uint64_t;
using JobId = std::uint64_t;

/// Transport and clock the controller runs on: simulated links in the
/// scenario harness, sockets in `serve` mode.
class ControllerHost {
 public:
  virtual ~ControllerHost() = default;
  virtual Millis now() const = 0;
  virtual void send(ConnId conn, std::vector<std::uint8_t> frame) = 0;
  virtual void close(ConnId conn) = 0;
  virtual TimerId schedule(Millis delay, std::function<void()> fn) = 0;
  virtual void cancel(TimerId id) = 0;
};

struct ControllerConfig {
  std::uint32_t hello_period_ms = 2000;
  /// Heartbeat silence longer than this many periods disconnects an eNB.
  std::uint32_t liveness_periods = 3;
  /// Period of the self-scheduled liveness check; 0 leaves it to the caller.
  Millis liveness_check_ms = 1000;
  Millis handshake_timeout_ms = 5000;
  Millis commit_timeout_ms = 5000;
  /// Centralized admission processing time per request.
  Millis ac_processing_ms = 12;
  /// Lifetime of a provisional admission not yet confirmed by a UE report.
  Millis provisional_ttl_ms = 5000;
  mac::AccountingBasis accounting;
  policy::AdmissionEstimates estimates = policy::AdmissionEstimates::video_defaults();
  /// Append-only state journal; empty disables persistence.
  std::string journal_path;
};

enum class Errc {
  ValidationFailed,
  UnknownSlice,
  UnknownEnb,
  InvalidState,
  NotSynced,
  AlreadyRegistered,
};

std::string to_string(Errc code);

class ControllerError : public std::runtime_error {
 public:
  ControllerError(Errc code, const std::string& what, std::string field = {})
      : std::runtime_error(what), code_(code), field_(std::move(field)) {}
  Errc code() const { return code_; }
  const std::string& field() const { return field_; }

 private:
  Errc code_;
  std::string field_;
};

enum class EnbState { Registered, Connected, Synced };
std::string to_string(EnbState s);

struct EnbRecord {
  EnbId enb_id = 0;
  EnbState state = EnbState::Registered;
  Millis last_seen = 0;
  std::optional<wire::CapsResp> caps;
  std::set<EnbId> links;
  std::optional<ConnId> conn;
};

enum class SliceState { Defined, Commissioned, Active, Deactivated, Decommissioned };
std::string to_string(SliceState s);
/// True for the transitions the lifecycle allows.
bool legal_transition(SliceState from, SliceState to);

enum class CellStatus { Pending, Acked, Degraded, Removed };
std::string to_string(CellStatus s);

struct MeasurementRecord {
  Millis at = 0;
  EnbId enb_id = 0;
  CellId cell_id = 0;
  wire::SliceMeas meas;
  double load_percent = 0.0;
};

struct SliceRecord {
  policy::RsiTemplate tpl;
  SliceState state = SliceState::Defined;
  std::map<CellRef, CellStatus> cells;
  std::vector<MeasurementRecord> history;
};

struct UeEntry {
  EnbId enb_id = 0;
  CellId cell_id = 0;
  Rnti rnti = 0;
  NasId nas_id;
  std::string plmn_id;
  std::optional<RsiId> rsi_id;
  std::vector<wire::DrbInfo> drbs;
};

enum class JobKind { Commission, Update, Decommission };
enum class JobState { Pending, Succeeded, Failed };
std::string to_string(JobKind k);
std::string to_string(JobState s);

struct Job {
  JobId id = 0;
  JobKind kind = JobKind::Commission;
  RsiId rsi_id = 0;
  JobState state = JobState::Pending;
  std::string message;
  Millis created = 0;
  Millis finished = 0;
};

struct Transition {
  RsiId rsi_id = 0;
  std::optional<SliceState> from;
  SliceState to = SliceState::Defined;
  Millis at = 0;
};

/// SD-RAN controller core. Single-threaded: every entry point must be called
/// from the thread (or simulated loop) that owns the host.
class Controller {
 public:
  Controller(ControllerConfig config, ControllerHost& host);
  ~Controller();
  Controller(const Controller&) = delete;
  Controller& operator=(const Controller&) = delete;

  const ControllerConfig& config() const { return config_; }

  // device manager
  /// Whitelists an eNB; false (and no change) when it already is.
  bool register_enb(EnbId id);
  void on_connect(ConnId conn);
  void on_bytes(ConnId conn, std::span<const std::uint8_t> bytes);
  void on_disconnect(ConnId conn);
  /// Disconnects eNBs whose heartbeat went silent; returns them.
  std::vector<EnbId> liveness_tick();

  // topology
  void add_link(EnbId a, EnbId b);
  void remove_link(EnbId a, EnbId b);

  // slice lifecycle; all throw ControllerError
  JobId commission(const policy::RsiTemplate& tpl);
  JobId update(RsiId rsi, const policy::RrmPolicy& policy);
  void activate(RsiId rsi);
  void deactivate(RsiId rsi);
  JobId decommission(RsiId rsi);

  // views
  const std::map<EnbId, EnbRecord>& enbs() const { return enbs_; }
  const std::map<RsiId, SliceRecord>& slices() const { return slices_; }
  const SliceRecord* slice(RsiId rsi) const;
  std::optional<Job> job(JobId id) const;
  std::vector<UeEntry> ues() const;
  std::vector<MeasurementRecord> measurements(RsiId rsi, Millis since = 0) const;
  policy::RanMap ran_map() const;
  /// Reconciled plus provisional counters of `rsi`, optionally for one cell.
  policy::SliceCounters counters(RsiId rsi, std::optional<CellRef> cell = std::nullopt) const;
  std::size_t provisional_count() const { return provisional_.size(); }
  std::size_t ac_queue_depth(RsiId rsi) const;

  void set_transition_observer(std::function<void(const Transition&)> fn) { on_transition_ = std::move(fn); }
  void set_logger(std::function<void(const std::string&)> fn) { log_ = std::move(fn); }

  /// JSON renderings used by the REST API and the CLI.
  nlohmann::ordered_json enb_json(const EnbRecord& e) const;
  nlohmann::ordered_json slice_json(RsiId rsi) const;
  nlohmann::ordered_json ue_json(const UeEntry& u) const;
  nlohmann::ordered_json measurement_json(const MeasurementRecord& m) const;
  nlohmann::ordered_json job_json(const Job& j) const;

 private:
  enum class OpKind { Handshake, Commit, Activate, Update, Push, Resync, Remove, Hello };
  struct PendingOp {
    OpKind kind = OpKind::Push;
    JobId job = 0;
    RsiId rsi = 0;
  };
  struct Conn {
    wire::Session session;
    wire::FrameSplitter splitter;
    std::optional<EnbId> enb;
    bool caps_done = false;
    bool ues_done = false;
    bool handshaking = false;
    std::optional<TimerId> handshake_timer;
    std::map<std::uint32_t, PendingOp> ops;
  };
  struct JobState_ {
    Job job;
    std::set<EnbId> waiting;
    std::set<EnbId> acked;
    std::optional<TimerId> timer;
    policy::RrmPolicy new_policy;
  };
  struct AcItem {
    ConnId conn = 0;
    std::uint32_t xid = 0;
    EnbId enb = 0;
    CellId cell = 0;
    Rnti rnti = 0;
    std::vector<policy::DrbRequest> drbs;
  };
  struct AcQueue {
    std::deque<AcItem> items;
    bool busy = false;
  };
  struct Provisional {
    RsiId rsi = 0;
    CellRef cell;
    Rnti rnti = 0;
    std::vector<policy::DrbRequest> drbs;
    Millis expires = 0;
  };

  void log(const std::string& line) const;
  void transition(RsiId rsi, SliceRecord& rec, SliceState to);
  void handle(ConnId conn, Conn& c, const wire::Message& msg);
  void handle_hello(ConnId conn, Conn& c, const wire::Message& msg);
  void handle_response(ConnId conn, Conn& c, const wire::Message& msg, const PendingOp& op);
  void handle_ue_report(EnbId enb, const wire::UeReportResp& r);
  void handle_meas(EnbId enb, const wire::Message& msg, const wire::SliceMeas& m);
  void handle_ac_request(ConnId conn, EnbId enb, const wire::Message& msg, const wire::AcReq& req);
  void process_ac(RsiId rsi);
  void maybe_synced(ConnId conn, Conn& c);
  void drop_connection(ConnId conn, bool close_socket);
  std::uint32_t send_request(EnbId enb, wire::Body body, wire::OpKind op, PendingOp purpose);
  void send_reply(ConnId conn, const wire::Message& req, wire::Body body);

  JobId new_job(JobKind kind, RsiId rsi);
  void finish_job(JobState_& js, bool ok, const std::string& message);
  void fail_commission(RsiId rsi, JobState_& js, const std::string& why);
  void arm_job_timer(JobId id);
  std::vector<policy::RsiTemplate> deployed_templates() const;
  std::set<EnbId> hosting_enbs(const SliceRecord& rec) const;
  void expire_provisional();
  void arm_liveness();

  void journal(const nlohmann::json& record);
  void replay_journal();

  ControllerConfig config_;
  ControllerHost& host_;
  std::map<EnbId, EnbRecord> enbs_;
  std::map<ConnId, Conn> conns_;
  std::map<RsiId, SliceRecord> slices_;
  std::map<JobId, JobState_> jobs_;
  JobId next_job_ = 1;
  std::map<EnbId, std::vector<UeEntry>> inventory_;
  std::vector<Provisional> provisional_;
  std::map<RsiId, AcQueue> ac_queues_;
  std::optional<TimerId> liveness_timer_;
  bool replaying_ = false;
  std::function<void(const Transition&)> on_transition_;
  std::function<void(const std::string&)> log_;
};

}  // namespace ranslice::controller
