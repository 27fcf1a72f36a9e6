#include "ranslice/sim/world.hpp"

#include <cmath>

#include "ranslice/policy/document.hpp"

namespace ranslice::sim {

using enb::Signal;
using enb::SignalMsg;
using enb::Step;
using nlohmann::ordered_json;

std::string to_string(Outcome o) {
  switch (o) {
    case Outcome::Pending:
      return "pending";
    case Outcome::Accepted:
      return "accepted";
    case Outcome::Rejected:
      return "rejected";
  }
  return "?";
}

namespace {
std::optional<Millis> diff(const std::optional<Millis>& end, const std::optional<Millis>& start) {
  if (!end || !start) return std::nullopt;
  return *end - *start;
}

std::string enb_label(EnbId id) { return "enb:" + to_hex(id); }
std::string ue_label(enb::UeHandle ue) { return "ue:" + std::to_string(ue); }

std::string hex_of(std::span<const std::uint8_t> bytes) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string out;
  out.reserve(bytes.size() * 2);
  for (auto b : bytes) {
    out.push_back(kDigits[b >> 4]);
    out.push_back(kDigits[b & 0xf]);
  }
  return out;
}
}  // namespace

std::optional<Millis> AttachOutcome::rrc_setup_ms() const { return diff(rrc_setup_complete_at, rrc_request_at); }
std::optional<Millis> AttachOutcome::registration_ms() const { return diff(registration_end_at, rrc_request_at); }
std::optional<Millis> AttachOutcome::ac_exchange_ms() const { return diff(ac_response_at, ac_request_at); }

// --- host adapters ---------------------------------------------------------------

class World::EnbPort : public enb::EnbHost {
 public:
  EnbPort(World& w, EnbId id) : w_(w), id_(id) {}

  Millis now() const override { return w_.loop_.now(); }
  enb::TimerId schedule(Millis delay, std::function<void()> fn) override { return w_.loop_.schedule(delay, std::move(fn)); }
  void cancel(enb::TimerId id) override { w_.loop_.cancel(id); }
  Millis processing(Step step, std::uint64_t subject) override { return w_.draw(step, id_, subject); }

  bool connect_controller() override {
    if (!w_.spec_.controller.up) {
      w_.event({{"event", "connect"}, {"enb", enb_label(id_)}, {"accepted", false}});
      return false;
    }
    auto conn = w_.next_conn_++;
    w_.conns_[conn] = {id_, true};
    w_.conn_of_[id_] = conn;
    w_.event({{"event", "connect"}, {"enb", enb_label(id_)}, {"accepted", true}});
    w_.controller_->on_connect(conn);
    return true;
  }

  void send_controller(std::vector<std::uint8_t> frame) override {
    auto cit = w_.conn_of_.find(id_);
    if (cit == w_.conn_of_.end() || !w_.conns_.at(cit->second).open) return;
    auto conn = cit->second;
    w_.wire_frame(enb_label(id_), "controller", frame);
    auto t = w_.link_delivery("ctl-up:" + to_hex(id_), w_.draw(Step::ControlLink, id_, id_));
    w_.loop_.schedule_at(t, [this, conn, frame = std::move(frame)] {
      if (!w_.conns_.at(conn).open) return;
      if (auto m = try_decode(frame); m && m->event.action == wire::Action::SliceMeas)
        w_.wire_dl_prb_used_ += std::get<wire::SliceMeas>(m->body).dl_prb_used;
      w_.controller_->on_bytes(conn, frame);
    });
  }

  void send_radio(const SignalMsg& msg) override {
    w_.event({{"event", "signal"},
              {"from", enb_label(id_)},
              {"to", ue_label(msg.ue)},
              {"msg", enb::to_string(msg.signal)},
              {"rnti", to_hex(msg.rnti, 2)}});
    auto t = w_.link_delivery("air-dl:" + std::to_string(msg.ue), w_.draw(Step::AirLink, id_, msg.ue));
    w_.loop_.schedule_at(t, [this, msg] { w_.ue_receive(msg); });
  }

  void send_s1(const SignalMsg& msg) override {
    w_.event({{"event", "signal"},
              {"from", enb_label(id_)},
              {"to", "epc"},
              {"msg", enb::to_string(msg.signal)},
              {"rnti", to_hex(msg.rnti, 2)}});
    auto t = w_.link_delivery("s1-up:" + to_hex(id_), w_.draw(Step::S1Link, id_, msg.ue));
    w_.loop_.schedule_at(t, [this, msg] { w_.epc_receive(msg); });
  }

  void on_admission(const enb::AdmissionRecord& rec) override {
    if (rec.ue == 0 || rec.ue > w_.outcomes_.size()) return;
    auto& o = w_.outcomes_[rec.ue - 1];
    o.outcome = rec.accepted ? Outcome::Accepted : Outcome::Rejected;
    o.path = rec.path;
    o.reason = rec.reason;
    ordered_json j = {{"event", "admission"},
                      {"enb", enb_label(id_)},
                      {"ue", rec.ue},
                      {"rnti", to_hex(rec.rnti, 2)},
                      {"path", enb::to_string(rec.path)},
                      {"accepted", rec.accepted}};
    if (!rec.reason.empty()) j["reason"] = rec.reason;
    w_.event(std::move(j));
    if (!rec.accepted && o.registration_end_at == std::nullopt && rec.path == enb::AcPath::None)
      o.registration_end_at = now();
  }

  static std::optional<wire::Message> try_decode(std::span<const std::uint8_t> frame) {
    try {
      return wire::decode(frame);
    } catch (const wire::WireError&) {
      return std::nullopt;
    }
  }

 private:
  World& w_;
  EnbId id_;
};

class World::ControllerPort : public controller::ControllerHost {
 public:
  explicit ControllerPort(World& w) : w_(w) {}

  Millis now() const override { return w_.loop_.now(); }
  controller::TimerId schedule(Millis delay, std::function<void()> fn) override {
    return w_.loop_.schedule(delay, std::move(fn));
  }
  void cancel(controller::TimerId id) override { w_.loop_.cancel(id); }

  void send(controller::ConnId conn, std::vector<std::uint8_t> frame) override {
    auto it = w_.conns_.find(conn);
    if (it == w_.conns_.end() || !it->second.open) return;
    auto enb = it->second.enb;
    w_.wire_frame("controller", enb_label(enb), frame);
    auto t = w_.link_delivery("ctl-dn:" + to_hex(enb), w_.draw(Step::ControlLink, enb, enb));
    w_.loop_.schedule_at(t, [this, conn, enb, frame = std::move(frame)] {
      if (!w_.conns_.at(conn).open) return;
      if (auto m = EnbPort::try_decode(frame); m && m->event.action == wire::Action::AcResp) {
        if (auto* ue = w_.ue_by_rnti(enb, std::get<wire::AcResp>(m->body).rnti)) {
          auto& o = w_.outcomes_[ue->handle - 1];
          o.ac_response_at = w_.loop_.now();
          ++o.ac_responses;
        }
      }
      w_.enbs_.at(enb)->on_controller_frame(frame);
    });
  }

  void close(controller::ConnId conn) override {
    auto it = w_.conns_.find(conn);
    if (it == w_.conns_.end() || !it->second.open) return;
    it->second.open = false;
    auto enb = it->second.enb;
    w_.event({{"event", "disconnect"}, {"enb", enb_label(enb)}, {"by", "controller"}});
    w_.loop_.schedule(w_.draw(Step::ControlLink, enb, enb), [this, enb, conn] {
      if (w_.conn_of_.at(enb) == conn) w_.enbs_.at(enb)->on_controller_lost();
    });
  }

 private:
  World& w_;
};

// --- world -----------------------------------------------------------------------

World::World(ScenarioSpec spec, RunOptions options) : spec_(std::move(spec)), options_(std::move(options)) {
  validate_spec(spec_);
  if (!options_.wire_log_path.empty()) wire_log_.open(options_.wire_log_path);
  if (!options_.event_log_path.empty()) event_log_.open(options_.event_log_path);
  if (!options_.trace_path.empty()) {
    trace_.open(options_.trace_path);
    trace_ << "tti,enb_id,cell_id,rsi_id,rnti,prbs,bits\n";
  }

  controller::ControllerConfig cc;
  cc.hello_period_ms = spec_.controller.hello_period_ms;
  cc.handshake_timeout_ms = spec_.controller.handshake_timeout_ms;
  cc.commit_timeout_ms = spec_.controller.commit_timeout_ms;
  cc.provisional_ttl_ms = spec_.controller.provisional_ttl_ms;
  cc.ac_processing_ms = spec_.latency[Step::ControllerAcProc].mean;
  cc.accounting = spec_.accounting;
  cc.estimates = spec_.estimates;
  controller_port_ = std::make_unique<ControllerPort>(*this);
  controller_ = std::make_unique<controller::Controller>(cc, *controller_port_);
  controller_->set_logger([this](const std::string& line) { controller_log_.push_back(line); });
  controller_->set_transition_observer([this](const controller::Transition& t) {
    transitions_.push_back(t);
    ordered_json j = {{"event", "slice"}, {"rsi_id", t.rsi_id}};
    j["from"] = t.from ? ordered_json(controller::to_string(*t.from)) : ordered_json(nullptr);
    j["to"] = controller::to_string(t.to);
    event(std::move(j));
  });

  for (const auto& es : spec_.enbs) {
    auto id = es.config.enb_id;
    draws_.emplace(id, LatencyDraws(es.latency.value_or(spec_.latency), mix_key(spec_.seed, id, 0, 0)));
    ports_[id] = std::make_unique<EnbPort>(*this, id);
    enbs_[id] = std::make_unique<enb::Enb>(es.config, *ports_[id]);
    if (trace_.is_open()) {
      for (const auto& c : es.config.cells)
        enbs_[id]->cell(c.cell_id).set_trace_sink([this, id, cell = c.cell_id](const mac::TraceRecord& r) {
          trace_ << r.tti << ',' << to_hex(id) << ',' << cell << ',' << r.rsi_id << ',' << to_hex(r.rnti, 2) << ','
                 << r.prbs << ',' << r.bits << '\n';
        });
    }
  }
  for (const auto& n : spec_.epc_subscribers) subscribers_.insert(n);
}

World::~World() {
  // The controller cancels its timers through the port; keep it alive until then.
  controller_.reset();
}

enb::Enb& World::enb(EnbId id) { return *enbs_.at(id); }

Millis World::draw(Step step, EnbId enb, std::uint64_t subject) {
  auto it = draws_.find(enb);
  if (it == draws_.end()) return spec_.latency[step].mean;
  return it->second.draw(step, subject);
}

Millis World::link_delivery(const std::string& link, Millis delay) {
  // Links are FIFO: a faster draw never overtakes an earlier message.
  auto t = std::max(loop_.now() + delay, link_last_[link]);
  link_last_[link] = t;
  return t;
}

void World::event(ordered_json record) {
  ordered_json out = {{"t", loop_.now()}};
  for (auto& [k, v] : record.items()) out[k] = v;
  if (!event_log_.is_open() && !options_.capture_events) return;
  auto line = out.dump();
  if (event_log_.is_open()) event_log_ << line << '\n';
  if (options_.capture_events) events_.push_back(std::move(line));
}

void World::wire_frame(const std::string& from, const std::string& to, std::span<const std::uint8_t> frame) {
  ++wire_frames_;
  if (wire_log_.is_open()) wire_log_ << loop_.now() << ' ' << from << ' ' << to << ' ' << hex_of(frame) << '\n';
  auto m = EnbPort::try_decode(frame);
  if (!m) {
    ++wire_counts_["undecodable"];
    event({{"event", "wire"}, {"from", from}, {"to", to}, {"msg", "undecodable"}});
    return;
  }
  auto action = wire::to_string(m->event.action);
  ++wire_counts_[action];
  ordered_json j = {{"event", "wire"},
                    {"from", from},
                    {"to", to},
                    {"msg", action},
                    {"op", wire::to_string(m->event.opcode)},
                    {"xid", m->header.xid}};
  std::visit(
      [&](const auto& body) {
        using B = std::decay_t<decltype(body)>;
        if constexpr (std::is_same_v<B, wire::AcReq>) {
          j["rnti"] = to_hex(body.rnti, 2);
          if (auto* ue = ue_by_rnti(m->header.element_id, body.rnti)) {
            auto& o = outcomes_[ue->handle - 1];
            o.ac_request_at = loop_.now();
            ++o.ac_requests;
          }
        } else if constexpr (std::is_same_v<B, wire::AcResp>) {
          j["rnti"] = to_hex(body.rnti, 2);
          j["accepted"] = body.accepted;
        } else if constexpr (std::is_same_v<B, wire::SliceMeas>) {
          j["rsi_id"] = body.rsi_id;
          j["dl_prb_used"] = body.dl_prb_used;
        } else if constexpr (std::is_same_v<B, wire::AddSliceReq> || std::is_same_v<B, wire::AddSliceResp> ||
                             std::is_same_v<B, wire::RemoveSliceReq> || std::is_same_v<B, wire::RemoveSliceResp> ||
                             std::is_same_v<B, wire::RanSliceReq>) {
          j["rsi_id"] = body.rsi_id;
        } else if constexpr (std::is_same_v<B, wire::UeReportResp>) {
          j["ues"] = body.ues.size();
        }
      },
      m->body);
  event(std::move(j));
}

World::UeSim* World::ue_by_rnti(EnbId enb, Rnti rnti) {
  for (auto& u : ues_)
    if (u.rnti == rnti && u.spec.cell.enb_id == enb && !u.released) return &u;
  return nullptr;
}

// --- radio and S1 ----------------------------------------------------------------

void World::send_radio_up(const UeSim& ue, SignalMsg msg) {
  msg.ue = ue.handle;
  msg.enb_id = ue.spec.cell.enb_id;
  msg.cell_id = ue.spec.cell.cell_id;
  ordered_json j = {{"event", "signal"}, {"from", ue_label(ue.handle)}, {"to", enb_label(msg.enb_id)},
                    {"msg", enb::to_string(msg.signal)}};
  if (msg.rnti) j["rnti"] = to_hex(msg.rnti, 2);
  event(std::move(j));
  auto t = link_delivery("air-ul:" + std::to_string(ue.handle), draw(Step::AirLink, msg.enb_id, ue.handle));
  loop_.schedule_at(t, [this, msg] { enb_receive_radio(msg); });
}

void World::ue_receive(const SignalMsg& msg) {
  if (msg.ue == 0 || msg.ue > ues_.size()) return;
  auto& ue = ues_[msg.ue - 1];
  switch (msg.signal) {
    case Signal::RRCConnectionSetup: {
      ue.rnti = msg.rnti;
      outcomes_[msg.ue - 1].rnti = msg.rnti;
      auto handle = ue.handle;
      loop_.schedule(draw(Step::UeRrcProc, ue.spec.cell.enb_id, handle), [this, handle] {
        auto& u = ues_[handle - 1];
        if (u.released) return;
        SignalMsg done;
        done.signal = Signal::RRCConnectionSetupComplete;
        done.rnti = *u.rnti;
        done.nas_id = u.spec.nas_id;
        send_radio_up(u, done);
      });
      break;
    }
    case Signal::RRCConnectionReconfiguration: {
      auto handle = ue.handle;
      loop_.schedule(draw(Step::UeReconfigProc, ue.spec.cell.enb_id, handle), [this, handle] {
        auto& u = ues_[handle - 1];
        if (u.released) return;
        SignalMsg done;
        done.signal = Signal::RRCConnectionReconfigurationComplete;
        done.rnti = *u.rnti;
        send_radio_up(u, done);
      });
      break;
    }
    case Signal::RRCConnectionRelease:
      ue.released = true;
      ue.attached = false;
      break;
    default:
      break;
  }
}

void World::enb_receive_radio(const SignalMsg& msg) {
  auto& o = outcomes_[msg.ue - 1];
  auto& e = *enbs_.at(msg.enb_id);
  switch (msg.signal) {
    case Signal::RRCConnectionRequest:
      o.rrc_request_at = loop_.now();
      break;
    case Signal::RRCConnectionSetupComplete:
      o.rrc_setup_complete_at = loop_.now();
      break;
    case Signal::RRCConnectionReconfigurationComplete:
      if (o.outcome == Outcome::Accepted) o.registration_end_at = loop_.now();
      break;
    default:
      break;
  }
  e.on_radio(msg);
  if (msg.signal == Signal::RRCConnectionReconfigurationComplete) {
    auto it = e.contexts().find(msg.rnti);
    if (it != e.contexts().end() && it->second.stage == enb::AttachStage::DrbActive) {
      auto& ue = ues_[msg.ue - 1];
      ue.attached = true;
      o.drb_active_at = loop_.now();
      e.set_cqi(msg.cell_id, msg.rnti, ue.spec.cqi.front());
    }
  }
}

void World::epc_receive(const SignalMsg& msg) {
  auto reply = [this](SignalMsg out, Step step) {
    loop_.schedule(draw(step, out.enb_id, out.ue), [this, out] { send_s1_down(out); });
  };
  SignalMsg out;
  out.ue = msg.ue;
  out.enb_id = msg.enb_id;
  out.cell_id = msg.cell_id;
  out.rnti = msg.rnti;
  switch (msg.signal) {
    case Signal::InitialUEMessage:
      if (subscribers_.count(msg.nas_id)) {
        out.signal = Signal::InitialContextSetupRequest;
        policy::DrbRequest video;
        video.count = 1;
        video.qos = {7, 9};
        out.drbs = {video};
      } else {
        out.signal = Signal::UEContextReleaseCommand;
        out.cause = "unknown subscriber";
      }
      reply(out, Step::EpcAttachProc);
      break;
    case Signal::InitialContextSetupFailure:
    case Signal::UEContextReleaseRequest:
      out.signal = Signal::UEContextReleaseCommand;
      out.cause = msg.cause;
      reply(out, Step::EpcReleaseProc);
      break;
    default:
      break;
  }
}

void World::send_s1_down(SignalMsg msg) {
  ordered_json j = {{"event", "signal"}, {"from", "epc"}, {"to", enb_label(msg.enb_id)},
                    {"msg", enb::to_string(msg.signal)}, {"rnti", to_hex(msg.rnti, 2)}};
  if (!msg.cause.empty()) j["cause"] = msg.cause;
  event(std::move(j));
  auto t = link_delivery("s1-dn:" + to_hex(msg.enb_id), draw(Step::S1Link, msg.enb_id, msg.ue));
  loop_.schedule_at(t, [this, msg] { enb_receive_s1(msg); });
}

void World::enb_receive_s1(const SignalMsg& msg) {
  if (msg.signal == Signal::UEContextReleaseCommand && msg.ue >= 1 && msg.ue <= outcomes_.size()) {
    auto& o = outcomes_[msg.ue - 1];
    if (o.outcome == Outcome::Pending) {
      o.outcome = Outcome::Rejected;
      o.reason = msg.cause;
    }
    if (o.outcome == Outcome::Rejected && !o.registration_end_at) o.registration_end_at = loop_.now();
  }
  enbs_.at(msg.enb_id)->on_s1(msg);
}

// --- driving ---------------------------------------------------------------------

void World::tick() {
  for (auto& ue : ues_) {
    if (!ue.attached || ue.released || !ue.rnti) continue;
    auto& e = *enbs_.at(ue.spec.cell.enb_id);
    if (ue.spec.cqi.size() > 1) e.set_cqi(ue.spec.cell.cell_id, *ue.rnti, ue.spec.cqi[ue.cqi_pos++ % ue.spec.cqi.size()]);
    ue.cbr_acc += ue.spec.cbr_bps;
    auto bytes = ue.cbr_acc / 8000;
    ue.cbr_acc %= 8000;
    if (bytes) e.deliver_dl(ue.spec.cell.cell_id, *ue.rnti, bytes);
  }
  for (auto& [id, e] : enbs_) e->tti();
  loop_.schedule(1, [this] { tick(); }, 1);
}

enb::UeHandle World::add_ue(UeSpec spec) {
  UeSim ue;
  ue.handle = static_cast<enb::UeHandle>(ues_.size() + 1);
  ue.spec = std::move(spec);
  if (ue.spec.label.empty()) ue.spec.label = "UE#" + std::to_string(ue.handle);
  AttachOutcome o;
  o.index = ue.handle;
  o.label = ue.spec.label;
  o.nas_id = ue.spec.nas_id;
  o.cell = ue.spec.cell;
  o.power_on_ms = ue.spec.power_on_ms;
  outcomes_.push_back(o);
  ues_.push_back(ue);
  auto handle = ue.handle;
  loop_.schedule_at(ue.spec.power_on_ms, [this, handle] {
    event({{"event", "power_on"}, {"ue", handle}, {"label", ues_[handle - 1].spec.label}});
    SignalMsg req;
    req.signal = Signal::RRCConnectionRequest;
    send_radio_up(ues_[handle - 1], req);
  });
  return handle;
}

void World::sever(EnbId id) {
  auto it = conn_of_.find(id);
  if (it == conn_of_.end() || !conns_.at(it->second).open) return;
  conns_.at(it->second).open = false;
  event({{"event", "disconnect"}, {"enb", enb_label(id)}, {"by", "network"}});
  controller_->on_disconnect(it->second);
  enbs_.at(id)->on_controller_lost();
}

void World::boot() {
  if (booted_) return;
  booted_ = true;
  for (const auto& es : spec_.enbs) {
    auto id = es.config.enb_id;
    controller_->register_enb(id);
    loop_.schedule_at(0, [this, id] { enbs_.at(id)->start(); });
  }
  for (const auto& s : spec_.slices) {
    loop_.schedule_at(s.at_ms, [this, tpl = s.tpl] {
      try {
        auto job = controller_->commission(tpl);
        event({{"event", "commission"}, {"rsi_id", tpl.rsi_id}, {"job", job}});
        loop_.schedule(spec_.controller.commit_timeout_ms + 1, [this, job, rsi = tpl.rsi_id] {
          auto j = controller_->job(job);
          if (j && j->state == controller::JobState::Failed)
            errors_.push_back("slice " + std::to_string(rsi) + " commissioning failed: " + j->message);
        });
      } catch (const controller::ControllerError& e) {
        errors_.push_back("slice " + std::to_string(tpl.rsi_id) + ": " + controller::to_string(e.code()) + ": " +
                          e.what());
      }
    });
  }
  for (const auto& a : spec_.actions) {
    loop_.schedule_at(a.at_ms, [this, a] {
      try {
        switch (a.kind) {
          case ActionKind::Update:
            controller_->update(a.rsi_id, *a.policy);
            break;
          case ActionKind::Activate:
            controller_->activate(a.rsi_id);
            break;
          case ActionKind::Deactivate:
            controller_->deactivate(a.rsi_id);
            break;
          case ActionKind::Decommission:
            controller_->decommission(a.rsi_id);
            break;
        }
        event({{"event", "action"}, {"op", to_string(a.kind)}, {"rsi_id", a.rsi_id}});
      } catch (const controller::ControllerError& e) {
        errors_.push_back(to_string(a.kind) + " slice " + std::to_string(a.rsi_id) + ": " +
                          controller::to_string(e.code()) + ": " + e.what());
      }
    });
  }
  for (const auto& u : spec_.ues) add_ue(u);
  loop_.schedule_at(0, [this] { tick(); }, 1);
}

void World::advance(Millis until) {
  boot();
  loop_.run_until(until);
}

RunReport World::run() {
  advance(spec_.duration_ms);
  return report();
}

RunReport World::report() const {
  RunReport r;
  r.scenario = spec_.name;
  r.seed = spec_.seed;
  r.latency_profile = spec_.latency.name;
  r.duration_ms = spec_.duration_ms;
  r.ues = outcomes_;
  for (const auto& [rsi, rec] : controller_->slices()) {
    auto j = controller_->slice_json(rsi);
    ordered_json series = ordered_json::array();
    for (const auto& m : rec.history) series.push_back(controller_->measurement_json(m));
    j["measurements"] = series;
    r.slices.push_back(j);
  }
  r.wire_counts = wire_counts_;
  r.wire_frames = wire_frames_;
  r.wire_dl_prb_used = wire_dl_prb_used_;
  r.errors = errors_;
  if (!options_.trace_path.empty()) r.trace_path = options_.trace_path;
  return r;
}

RunReport run(const ScenarioSpec& spec, const RunOptions& options) {
  World w(spec, options);
  return w.run();
}

// --- reports ---------------------------------------------------------------------

ordered_json report_to_json(const RunReport& r) {
  auto opt = [](const std::optional<Millis>& v) { return v ? ordered_json(*v) : ordered_json(nullptr); };
  ordered_json ues = ordered_json::array();
  for (const auto& o : r.ues) {
    ordered_json u;
    u["index"] = o.index;
    u["label"] = o.label;
    u["nas_id"] = o.nas_id.to_string();
    u["enb_id"] = to_hex(o.cell.enb_id);
    u["cell_id"] = o.cell.cell_id;
    u["rnti"] = o.rnti ? ordered_json(to_hex(*o.rnti, 2)) : ordered_json(nullptr);
    u["power_on_ms"] = o.power_on_ms;
    u["outcome"] = to_string(o.outcome);
    u["path"] = enb::to_string(o.path);
    u["reason"] = o.reason;
    u["ac_requests"] = o.ac_requests;
    u["ac_responses"] = o.ac_responses;
    u["timestamps"] = {{"RRCConnectionRequest", opt(o.rrc_request_at)},
                       {"RRCConnectionSetupComplete", opt(o.rrc_setup_complete_at)},
                       {"AcReq", opt(o.ac_request_at)},
                       {"AcResp", opt(o.ac_response_at)},
                       {"registration_end", opt(o.registration_end_at)},
                       {"drb_active", opt(o.drb_active_at)}};
    u["timings_ms"] = {{"rrc_connection_setup", opt(o.rrc_setup_ms())},
                       {"network_registration", opt(o.registration_ms())},
                       {"ac_exchange", opt(o.ac_exchange_ms())}};
    ues.push_back(u);
  }
  ordered_json by_action = ordered_json::object();
  for (const auto& [k, v] : r.wire_counts) by_action[k] = v;
  ordered_json out;
  out["scenario"] = r.scenario;
  out["seed"] = r.seed;
  out["latency_profile"] = r.latency_profile;
  out["duration_ms"] = r.duration_ms;
  out["ues"] = ues;
  out["slices"] = r.slices;
  out["wire"] = {{"frames", r.wire_frames}, {"by_action", by_action}, {"slice_meas_dl_prb_used", r.wire_dl_prb_used}};
  out["trace"] = r.trace_path ? ordered_json(*r.trace_path) : ordered_json(nullptr);
  out["errors"] = r.errors;
  return out;
}

std::uint64_t derived_seed(std::uint64_t seed, std::size_t run) { return run == 0 ? seed : mix_key(seed, run, 0x5eed, 0); }

StageStats summarize(const std::vector<double>& samples) {
  StageStats s;
  s.n = samples.size();
  if (samples.empty()) return s;
  double sum = 0;
  for (double v : samples) sum += v;
  s.mean = sum / static_cast<double>(s.n);
  if (s.n > 1) {
    double ss = 0;
    for (double v : samples) ss += (v - s.mean) * (v - s.mean);
    s.stddev = std::sqrt(ss / static_cast<double>(s.n - 1));
  }
  return s;
}

std::string path_group(const AttachOutcome& o) {
  switch (o.outcome) {
    case Outcome::Accepted:
      return enb::to_string(o.path);
    case Outcome::Rejected:
      return "rejected";
    case Outcome::Pending:
      break;
  }
  return "pending";
}

RepeatReport repeat(const ScenarioSpec& spec, std::size_t n) {
  RepeatReport rep;
  rep.scenario = spec.name;
  rep.runs = n;
  std::map<std::string, std::vector<double>> rrc, reg, ac;
  std::vector<std::string> first_outcomes;
  for (std::size_t i = 0; i < n; ++i) {
    auto s = spec;
    s.seed = derived_seed(spec.seed, i);
    auto r = run(s);
    std::vector<std::string> outcomes;
    for (const auto& o : r.ues) {
      auto g = path_group(o);
      outcomes.push_back(g);
      if (auto v = o.rrc_setup_ms()) rrc[g].push_back(static_cast<double>(*v));
      if (auto v = o.registration_ms()) reg[g].push_back(static_cast<double>(*v));
      if (auto v = o.ac_exchange_ms()) ac[g].push_back(static_cast<double>(*v));
    }
    if (i == 0)
      first_outcomes = outcomes;
    else if (outcomes != first_outcomes)
      rep.outcomes_stable = false;
    for (const auto& e : r.errors)
      if (std::find(rep.errors.begin(), rep.errors.end(), e) == rep.errors.end()) rep.errors.push_back(e);
  }
  for (auto& [g, v] : rrc) rep.rrc_setup[g] = summarize(v);
  for (auto& [g, v] : reg) rep.registration[g] = summarize(v);
  for (auto& [g, v] : ac) rep.ac_exchange[g] = summarize(v);
  return rep;
}

ordered_json repeat_to_json(const RepeatReport& r) {
  auto stats = [](const std::map<std::string, StageStats>& m) {
    ordered_json j = ordered_json::object();
    for (const auto& [g, s] : m) j[g] = {{"mean_ms", s.mean}, {"stddev_ms", s.stddev}, {"n", s.n}};
    return j;
  };
  return {{"scenario", r.scenario},
          {"runs", r.runs},
          {"rrc_connection_setup", stats(r.rrc_setup)},
          {"network_registration", stats(r.registration)},
          {"ac_exchange", stats(r.ac_exchange)},
          {"outcomes_stable", r.outcomes_stable},
          {"errors", r.errors}};
}

}  // namespace ranslice::sim
