#include "ranslice/controller/controller.hpp"

#include <algorithm>
#include <fstream>

#include "ranslice/policy/document.hpp"

namespace ranslice::controller {

using nlohmann::json;
using nlohmann::ordered_json;
using wire::Action;
using wire::EventType;
using wire::Message;
using wire::Opcode;

std::string to_string(Errc code) {
  switch (code) {
    case Errc::ValidationFailed:
      return "ValidationFailed";
    case Errc::UnknownSlice:
      return "UnknownSlice";
    case Errc::UnknownEnb:
      return "UnknownEnb";
    case Errc::InvalidState:
      return "InvalidState";
    case Errc::NotSynced:
      return "NotSynced";
    case Errc::AlreadyRegistered:
      return "AlreadyRegistered";
  }
  return "?";
}

std::string to_string(EnbState s) {
  switch (s) {
    case EnbState::Registered:
      return "registered";
    case EnbState::Connected:
      return "connected";
    case EnbState::Synced:
      return "synced";
  }
  return "?";
}

std::string to_string(SliceState s) {
  switch (s) {
    case SliceState::Defined:
      return "defined";
    case SliceState::Commissioned:
      return "commissioned";
    case SliceState::Active:
      return "active";
    case SliceState::Deactivated:
      return "deactivated";
    case SliceState::Decommissioned:
      return "decommissioned";
  }
  return "?";
}

namespace {
std::optional<SliceState> slice_state_from(const std::string& s) {
  for (auto st : {SliceState::Defined, SliceState::Commissioned, SliceState::Active, SliceState::Deactivated,
                  SliceState::Decommissioned})
    if (to_string(st) == s) return st;
  return std::nullopt;
}
}  // namespace

bool legal_transition(SliceState from, SliceState to) {
  using S = SliceState;
  if (from == S::Decommissioned) return false;
  if (to == S::Decommissioned) return true;
  return (from == S::Defined && to == S::Commissioned) || (from == S::Commissioned && to == S::Active) ||
         (from == S::Commissioned && to == S::Defined) || (from == S::Active && to == S::Deactivated) ||
         (from == S::Deactivated && to == S::Active);
}

std::string to_string(CellStatus s) {
  switch (s) {
    case CellStatus::Pending:
      return "pending";
    case CellStatus::Acked:
      return "acked";
    case CellStatus::Degraded:
      return "degraded";
    case CellStatus::Removed:
      return "removed";
  }
  return "?";
}

std::string to_string(JobKind k) {
  switch (k) {
    case JobKind::Commission:
      return "commission";
    case JobKind::Update:
      return "update";
    case JobKind::Decommission:
      return "decommission";
  }
  return "?";
}

std::string to_string(JobState s) {
  switch (s) {
    case JobState::Pending:
      return "pending";
    case JobState::Succeeded:
      return "succeeded";
    case JobState::Failed:
      return "failed";
  }
  return "?";
}

Controller::Controller(ControllerConfig config, ControllerHost& host) : config_(std::move(config)), host_(host) {
  if (!config_.journal_path.empty()) replay_journal();
  if (config_.liveness_check_ms > 0) arm_liveness();
}

void Controller::arm_liveness() {
  liveness_timer_ = host_.schedule(config_.liveness_check_ms, [this] {
    liveness_tick();
    arm_liveness();
  });
}

Controller::~Controller() {
  if (liveness_timer_) host_.cancel(*liveness_timer_);
  for (auto& [id, js] : jobs_)
    if (js.timer) host_.cancel(*js.timer);
  for (auto& [id, c] : conns_)
    if (c.handshake_timer) host_.cancel(*c.handshake_timer);
}

void Controller::log(const std::string& line) const {
  if (log_) log_(line);
}

void Controller::transition(RsiId rsi, SliceRecord& rec, SliceState to) {
  auto from = rec.state;
  rec.state = to;
  if (on_transition_) on_transition_({rsi, from, to, host_.now()});
  journal({{"type", "slice"}, {"rsi_id", rsi}, {"state", to_string(to)}, {"template", policy::template_to_json(rec.tpl)}});
}

// --- device manager ---------------------------------------------------------------

bool Controller::register_enb(EnbId id) {
  if (enbs_.count(id)) {
    log("eNB " + to_hex(id) + " already registered");
    return false;
  }
  enbs_[id].enb_id = id;
  journal({{"type", "enb"}, {"enb_id", to_hex(id)}});
  return true;
}

void Controller::on_connect(ConnId conn) {
  auto& c = conns_[conn];
  c.session = wire::Session();
  c.handshake_timer = host_.schedule(config_.handshake_timeout_ms, [this, conn] {
    auto it = conns_.find(conn);
    if (it == conns_.end()) return;
    it->second.handshake_timer.reset();
    bool synced = it->second.enb && enbs_.at(*it->second.enb).state == EnbState::Synced &&
                  enbs_.at(*it->second.enb).conn == conn;
    if (!synced) {
      log("handshake timeout on connection " + std::to_string(conn));
      drop_connection(conn, true);
    }
  });
}

void Controller::on_bytes(ConnId conn, std::span<const std::uint8_t> bytes) {
  auto it = conns_.find(conn);
  if (it == conns_.end()) return;
  it->second.splitter.feed(bytes);
  while (true) {
    auto cit = conns_.find(conn);
    if (cit == conns_.end()) return;
    std::optional<Message> msg;
    try {
      msg = cit->second.splitter.next();
    } catch (const wire::WireError& e) {
      log(std::string("undecodable frame, dropping connection: ") + e.what());
      drop_connection(conn, true);
      return;
    }
    if (!msg) return;
    handle(conn, cit->second, *msg);
  }
}

void Controller::on_disconnect(ConnId conn) { drop_connection(conn, false); }

void Controller::drop_connection(ConnId conn, bool close_socket) {
  auto it = conns_.find(conn);
  if (it == conns_.end()) return;
  if (it->second.handshake_timer) host_.cancel(*it->second.handshake_timer);
  if (auto enb = it->second.enb) {
    auto& rec = enbs_.at(*enb);
    if (rec.conn == conn) {
      rec.state = EnbState::Registered;
      rec.conn.reset();
      for (auto& [rsi, s] : slices_)
        for (auto& [ref, st] : s.cells)
          if (ref.enb_id == *enb && st == CellStatus::Acked) st = CellStatus::Degraded;
      inventory_.erase(*enb);
      std::erase_if(provisional_, [&](const Provisional& p) { return p.cell.enb_id == *enb; });
      log("eNB " + to_hex(*enb) + " disconnected");
    }
  }
  conns_.erase(it);
  if (close_socket) host_.close(conn);
}

std::vector<EnbId> Controller::liveness_tick() {
  std::vector<EnbId> expired;
  auto limit = static_cast<Millis>(config_.liveness_periods) * config_.hello_period_ms;
  for (const auto& [id, rec] : enbs_)
    if (rec.conn && rec.state != EnbState::Registered && host_.now() - rec.last_seen > limit) expired.push_back(id);
  for (auto id : expired) {
    log("eNB " + to_hex(id) + " heartbeat expired");
    drop_connection(*enbs_.at(id).conn, true);
  }
  return expired;
}

void Controller::add_link(EnbId a, EnbId b) {
  if (!enbs_.count(a) || !enbs_.count(b)) throw ControllerError(Errc::UnknownEnb, "link endpoints must be registered");
  enbs_[a].links.insert(b);
  enbs_[b].links.insert(a);
  journal({{"type", "link"}, {"a", to_hex(a)}, {"b", to_hex(b)}, {"present", true}});
}

void Controller::remove_link(EnbId a, EnbId b) {
  if (enbs_.count(a)) enbs_[a].links.erase(b);
  if (enbs_.count(b)) enbs_[b].links.erase(a);
  journal({{"type", "link"}, {"a", to_hex(a)}, {"b", to_hex(b)}, {"present", false}});
}

// --- message handling --------------------------------------------------------------

std::uint32_t Controller::send_request(EnbId enb, wire::Body body, wire::OpKind op, PendingOp purpose) {
  auto eit = enbs_.find(enb);
  if (eit == enbs_.end() || !eit->second.conn) return 0;
  auto conn = *eit->second.conn;
  auto& c = conns_.at(conn);
  auto m = wire::make_message(EventType::Single, enb, 0, Opcode::of(op), std::move(body));
  auto frame = c.session.stamp_and_encode(m, true);
  c.session.track(m, host_.now());
  c.ops[m.header.xid] = purpose;
  host_.send(conn, std::move(frame));
  return m.header.xid;
}

void Controller::send_reply(ConnId conn, const Message& req, wire::Body body) {
  auto it = conns_.find(conn);
  if (it == conns_.end()) return;
  auto m = wire::make_message(EventType::Single, req.header.element_id, req.header.cell_id, Opcode::success(),
                              std::move(body));
  m.header.xid = req.header.xid;
  host_.send(conn, it->second.session.stamp_and_encode(m));
}

void Controller::handle(ConnId conn, Conn& c, const Message& msg) {
  c.session.observe_peer_seq(msg.header.seq);
  if (!c.enb) {
    auto eit = enbs_.find(msg.header.element_id);
    if (msg.event.action != Action::HelloReq || eit == enbs_.end()) {
      log("refusing connection from unregistered eNB " + to_hex(msg.header.element_id));
      drop_connection(conn, true);
      return;
    }
  } else if (msg.header.element_id != *c.enb) {
    log("frame for eNB " + to_hex(msg.header.element_id) + " on connection of " + to_hex(*c.enb) + " ignored");
    return;
  }

  if (msg.event.action == Action::HelloReq) return handle_hello(conn, c, msg);
  EnbId enb = *c.enb;

  if (wire::is_response(msg.event.action)) {
    if (msg.header.xid != 0 && c.session.is_pending(msg.header.xid)) {
      c.session.pair_response(msg);
      auto op = c.ops[msg.header.xid];
      c.ops.erase(msg.header.xid);
      handle_response(conn, c, msg, op);
    } else if (const auto* r = std::get_if<wire::UeReportResp>(&msg.body); r && msg.header.xid == 0) {
      handle_ue_report(enb, *r);
    } else {
      log("unpaired " + wire::to_string(msg.event.action) + " xid=" + std::to_string(msg.header.xid));
    }
    return;
  }
  if (const auto* ac = std::get_if<wire::AcReq>(&msg.body)) return handle_ac_request(conn, enb, msg, *ac);
  if (const auto* m = std::get_if<wire::SliceMeas>(&msg.body)) return handle_meas(enb, msg, *m);
}

void Controller::handle_hello(ConnId conn, Conn& c, const Message& msg) {
  auto& rec = enbs_.at(msg.header.element_id);
  if (!c.enb) {
    c.enb = rec.enb_id;
    if (rec.conn && *rec.conn != conn) drop_connection(*rec.conn, true);
    rec.conn = conn;
  }
  rec.last_seen = host_.now();
  send_reply(conn, msg, wire::HelloResp{});
  if (rec.state == EnbState::Synced || c.handshaking) return;
  rec.state = EnbState::Connected;
  c.handshaking = true;
  c.caps_done = c.ues_done = false;
  send_request(rec.enb_id, wire::CapsReq{}, wire::OpKind::Retrieve, {OpKind::Handshake});
  send_request(rec.enb_id, wire::UeReportReq{}, wire::OpKind::Retrieve, {OpKind::Handshake});
}

void Controller::maybe_synced(ConnId conn, Conn& c) {
  if (!c.caps_done || !c.ues_done || !c.handshaking) return;
  c.handshaking = false;
  if (c.handshake_timer) host_.cancel(*c.handshake_timer);
  c.handshake_timer.reset();
  auto& rec = enbs_.at(*c.enb);
  rec.state = EnbState::Synced;
  log("eNB " + to_hex(rec.enb_id) + " synced");
  (void)conn;
  // Anything the eNB may have been told about, including commits and removals
  // that were cut off by a disconnect.
  bool hosts = false;
  for (const auto& [rsi, s] : slices_)
    for (const auto& [ref, st] : s.cells)
      if (ref.enb_id == rec.enb_id && st != CellStatus::Removed) hosts = true;
  if (hosts) send_request(rec.enb_id, wire::RanSliceReq{}, wire::OpKind::Retrieve, {OpKind::Resync});
}

void Controller::handle_response(ConnId conn, Conn& c, const Message& msg, const PendingOp& op) {
  EnbId enb = *c.enb;
  bool ok = !msg.event.opcode.is_error();
  auto job_it = op.job ? jobs_.find(op.job) : jobs_.end();
  auto rec_it = slices_.find(op.rsi);

  switch (op.kind) {
    case OpKind::Handshake:
      if (const auto* caps = std::get_if<wire::CapsResp>(&msg.body)) {
        enbs_.at(enb).caps = *caps;
        c.caps_done = true;
      } else if (const auto* r = std::get_if<wire::UeReportResp>(&msg.body)) {
        handle_ue_report(enb, *r);
        c.ues_done = true;
      }
      maybe_synced(conn, c);
      return;

    case OpKind::Commit: {
      bool expected = job_it != jobs_.end() && job_it->second.job.state == JobState::Pending &&
                      rec_it != slices_.end() && rec_it->second.state == SliceState::Defined;
      if (!expected) {
        // Late acknowledgement after rollback or decommission: undo it.
        if (ok) send_request(enb, wire::RemoveSliceReq{op.rsi}, wire::OpKind::Delete, {OpKind::Remove, 0, op.rsi});
        return;
      }
      auto& js = job_it->second;
      if (!ok) {
        fail_commission(op.rsi, js, "eNB " + to_hex(enb) + " refused the slice (" + wire::to_string(msg.event.opcode) + ")");
        return;
      }
      js.acked.insert(enb);
      js.waiting.erase(enb);
      for (auto& [ref, st] : rec_it->second.cells)
        if (ref.enb_id == enb) st = CellStatus::Acked;
      if (!js.waiting.empty()) return;
      transition(op.rsi, rec_it->second, SliceState::Commissioned);
      for (auto e : hosting_enbs(rec_it->second)) {
        js.waiting.insert(e);
        send_request(e, wire::RanSliceReq{op.rsi, std::nullopt, true}, wire::OpKind::Update,
                     {OpKind::Activate, js.job.id, op.rsi});
      }
      return;
    }

    case OpKind::Activate: {
      if (job_it == jobs_.end() || job_it->second.job.state != JobState::Pending || rec_it == slices_.end() ||
          rec_it->second.state != SliceState::Commissioned)
        return;
      auto& js = job_it->second;
      const auto* view = std::get_if<wire::RanSliceResp>(&msg.body);
      bool active = ok && view && std::any_of(view->slices.begin(), view->slices.end(), [&](const wire::SliceStatus& s) {
                      return s.rsi_id == op.rsi && s.active;
                    });
      if (!active) {
        fail_commission(op.rsi, js, "eNB " + to_hex(enb) + " did not activate the slice");
        return;
      }
      js.waiting.erase(enb);
      if (!js.waiting.empty()) return;
      transition(op.rsi, rec_it->second, SliceState::Active);
      finish_job(js, true, "active");
      return;
    }

    case OpKind::Update: {
      if (job_it == jobs_.end() || job_it->second.job.state != JobState::Pending) return;
      auto& js = job_it->second;
      if (!ok) {
        finish_job(js, false, "eNB " + to_hex(enb) + " refused the update (" + wire::to_string(msg.event.opcode) + ")");
        return;
      }
      js.waiting.erase(enb);
      if (!js.waiting.empty()) return;
      if (rec_it != slices_.end() && rec_it->second.state != SliceState::Decommissioned) {
        rec_it->second.tpl.rrm_policy = js.new_policy;
        journal({{"type", "slice"},
                 {"rsi_id", op.rsi},
                 {"state", to_string(rec_it->second.state)},
                 {"template", policy::template_to_json(rec_it->second.tpl)}});
      }
      finish_job(js, true, "updated");
      return;
    }

    case OpKind::Resync: {
      const auto* view = std::get_if<wire::RanSliceResp>(&msg.body);
      if (!view) return;
      std::set<RsiId> reported;
      for (const auto& s : view->slices) {
        reported.insert(s.rsi_id);
        auto it = slices_.find(s.rsi_id);
        if (it == slices_.end() || it->second.state == SliceState::Decommissioned ||
            it->second.state == SliceState::Defined) {
          send_request(enb, wire::RemoveSliceReq{s.rsi_id}, wire::OpKind::Delete, {OpKind::Remove, 0, s.rsi_id});
          continue;
        }
        for (auto& [ref, st] : it->second.cells)
          if (ref.enb_id == enb && st == CellStatus::Degraded) st = CellStatus::Acked;
        bool want_active = it->second.state == SliceState::Active;
        if (s.active != want_active && it->second.state != SliceState::Commissioned)
          send_request(enb, wire::RanSliceReq{s.rsi_id, std::nullopt, want_active}, wire::OpKind::Update,
                       {OpKind::Push, 0, s.rsi_id});
      }
      for (auto& [rsi, s] : slices_)
        if (!reported.count(rsi))
          for (auto& [ref, st] : s.cells)
            if (ref.enb_id == enb && st == CellStatus::Degraded) log("slice " + std::to_string(rsi) + " missing on eNB " + to_hex(enb));
      return;
    }

    case OpKind::Remove: {
      if (rec_it != slices_.end())
        for (auto& [ref, st] : rec_it->second.cells)
          if (ref.enb_id == enb) st = CellStatus::Removed;
      if (job_it == jobs_.end() || job_it->second.job.state != JobState::Pending) return;
      auto& js = job_it->second;
      js.waiting.erase(enb);
      if (js.waiting.empty()) finish_job(js, true, "decommissioned");
      return;
    }

    case OpKind::Push:
    case OpKind::Hello:
      if (!ok) log("eNB " + to_hex(enb) + " answered " + wire::to_string(msg.event.opcode));
      return;
  }
}

void Controller::handle_ue_report(EnbId enb, const wire::UeReportResp& r) {
  auto& list = inventory_[enb];
  list.clear();
  for (const auto& u : r.ues) list.push_back({enb, u.cell_id, u.rnti, u.nas_id, u.plmn_id, u.rsi_id, u.drbs});
  // Reports are authoritative: a provisional admission ends once the UE shows
  // up with bearers (now counted from the report) or disappears.
  std::erase_if(provisional_, [&](const Provisional& p) {
    if (p.cell.enb_id != enb) return false;
    auto it = std::find_if(list.begin(), list.end(),
                           [&](const UeEntry& e) { return e.cell_id == p.cell.cell_id && e.rnti == p.rnti; });
    return it == list.end() || !it->drbs.empty();
  });
}

void Controller::handle_meas(EnbId enb, const Message& msg, const wire::SliceMeas& m) {
  auto it = slices_.find(m.rsi_id);
  if (it == slices_.end() || it->second.state == SliceState::Decommissioned) {
    log("measurement for unknown slice " + std::to_string(m.rsi_id) + " dropped");
    return;
  }
  std::uint32_t n_prb = 0;
  if (const auto& caps = enbs_.at(enb).caps)
    for (const auto& cell : caps->cells)
      if (cell.cell_id == msg.header.cell_id) n_prb = cell.n_prb;
  MeasurementRecord rec{host_.now(), enb, msg.header.cell_id, m,
                        config_.accounting.load_percent(m.dl_prb_used, n_prb, m.interval_ms)};
  it->second.history.push_back(rec);
  auto j = measurement_json(rec);
  j["type"] = "measurement";
  journal(json::parse(j.dump()));
}

// --- centralized admission -------------------------------------------------------

void Controller::handle_ac_request(ConnId conn, EnbId enb, const Message& msg, const wire::AcReq& req) {
  std::optional<RsiId> rsi;
  auto inv = inventory_.find(enb);
  if (inv != inventory_.end())
    for (const auto& u : inv->second)
      if (u.cell_id == msg.header.cell_id && u.rnti == req.rnti) rsi = u.rsi_id;
  if (!rsi || !slices_.count(*rsi)) {
    log("AC request for unresolvable UE " + to_hex(req.rnti, 2) + " rejected");
    send_reply(conn, msg, wire::AcResp{req.rnti, false});
    return;
  }
  auto& q = ac_queues_[*rsi];
  q.items.push_back({conn, msg.header.xid, enb, msg.header.cell_id, req.rnti, req.drbs});
  if (!q.busy) process_ac(*rsi);
}

void Controller::process_ac(RsiId rsi) {
  auto& q = ac_queues_[rsi];
  q.busy = true;
  host_.schedule(config_.ac_processing_ms, [this, rsi] {
    auto& queue = ac_queues_[rsi];
    auto item = std::move(queue.items.front());
    queue.items.pop_front();

    bool accepted = false;
    auto it = slices_.find(rsi);
    if (it != slices_.end() && it->second.state == SliceState::Active) {
      expire_provisional();
      policy::SliceView view;
      view.total = counters(rsi);
      CellRef own{item.enb, item.cell};
      for (const auto& ref : it->second.tpl.cell_list)
        if (ref != own) view.other_cells.push_back(counters(rsi, ref));
      policy::AdmissionRequest req{item.drbs, true};
      accepted = policy::evaluate_slice(it->second.tpl.rrm_policy.l3, view, req, config_.estimates) ==
                 policy::SliceDecision::Accept;
      if (accepted) provisional_.push_back({rsi, own, item.rnti, item.drbs, host_.now() + config_.provisional_ttl_ms});
    }

    Message req_msg;
    req_msg.header.element_id = item.enb;
    req_msg.header.cell_id = item.cell;
    req_msg.header.xid = item.xid;
    send_reply(item.conn, req_msg, wire::AcResp{item.rnti, accepted});

    if (!queue.items.empty())
      process_ac(rsi);
    else
      queue.busy = false;
  });
}

void Controller::expire_provisional() {
  auto now = host_.now();
  std::erase_if(provisional_, [&](const Provisional& p) { return p.expires <= now; });
}

std::size_t Controller::ac_queue_depth(RsiId rsi) const {
  auto it = ac_queues_.find(rsi);
  return it == ac_queues_.end() ? 0 : it->second.items.size();
}

policy::SliceCounters Controller::counters(RsiId rsi, std::optional<CellRef> cell) const {
  policy::SliceCounters c;
  auto add = [&](const policy::QosProfile& q, std::uint32_t n) {
    c.active_drbs[q] += n;
    c.radio_load_percent[q] += n * config_.estimates.load_for(q.qci);
    c.bitrate_bps[q] += n * config_.estimates.bitrate_for(q.qci);
  };
  for (const auto& [enb, list] : inventory_) {
    for (const auto& u : list) {
      if (u.rsi_id != rsi || u.drbs.empty()) continue;
      if (cell && (cell->enb_id != enb || cell->cell_id != u.cell_id)) continue;
      ++c.connected_ues;
      for (const auto& d : u.drbs) add(d.qos, 1);
    }
  }
  auto now = host_.now();
  for (const auto& p : provisional_) {
    if (p.rsi != rsi || p.expires <= now) continue;
    if (cell && p.cell != *cell) continue;
    ++c.connected_ues;
    for (const auto& d : p.drbs) add(d.qos, d.count);
  }
  return c;
}

// --- lifecycle -------------------------------------------------------------------

std::vector<policy::RsiTemplate> Controller::deployed_templates() const {
  std::vector<policy::RsiTemplate> out;
  for (const auto& [rsi, s] : slices_)
    if (s.state == SliceState::Commissioned || s.state == SliceState::Active || s.state == SliceState::Deactivated)
      out.push_back(s.tpl);
  return out;
}

std::set<EnbId> Controller::hosting_enbs(const SliceRecord& rec) const {
  std::set<EnbId> out;
  for (const auto& ref : rec.tpl.cell_list) out.insert(ref.enb_id);
  return out;
}

policy::RanMap Controller::ran_map() const {
  policy::RanMap map;
  for (const auto& [id, rec] : enbs_) {
    if (rec.state != EnbState::Synced || !rec.caps) continue;
    for (const auto& c : rec.caps->cells) map[CellRef{id, c.cell_id}] = {c.n_prb, rec.caps->slicing_supported};
  }
  return map;
}

JobId Controller::new_job(JobKind kind, RsiId rsi) {
  JobId id = next_job_++;
  auto& js = jobs_[id];
  js.job = Job{id, kind, rsi, JobState::Pending, "", host_.now(), 0};
  return id;
}

void Controller::finish_job(JobState_& js, bool ok, const std::string& message) {
  if (js.job.state != JobState::Pending) return;
  js.job.state = ok ? JobState::Succeeded : JobState::Failed;
  js.job.message = message;
  js.job.finished = host_.now();
  if (js.timer) host_.cancel(*js.timer);
  js.timer.reset();
  log("job " + std::to_string(js.job.id) + " (" + to_string(js.job.kind) + " slice " + std::to_string(js.job.rsi_id) +
      ") " + to_string(js.job.state) + ": " + message);
}

void Controller::fail_commission(RsiId rsi, JobState_& js, const std::string& why) {
  if (js.job.state != JobState::Pending) return;
  for (auto e : js.acked)
    send_request(e, wire::RemoveSliceReq{rsi}, wire::OpKind::Delete, {OpKind::Remove, 0, rsi});
  auto it = slices_.find(rsi);
  if (it != slices_.end() && it->second.state != SliceState::Decommissioned) {
    if (it->second.state == SliceState::Commissioned) transition(rsi, it->second, SliceState::Defined);
    for (auto& [ref, st] : it->second.cells) st = CellStatus::Pending;
  }
  finish_job(js, false, why + "; rolled back");
}

void Controller::arm_job_timer(JobId id) {
  jobs_.at(id).timer = host_.schedule(config_.commit_timeout_ms, [this, id] {
    auto& js = jobs_.at(id);
    js.timer.reset();
    if (js.job.state != JobState::Pending) return;
    if (js.job.kind == JobKind::Commission)
      fail_commission(js.job.rsi_id, js, "commit timeout");
    else
      finish_job(js, false, "timeout waiting for eNB responses");
  });
}

JobId Controller::commission(const policy::RsiTemplate& tpl) {
  auto existing = slices_.find(tpl.rsi_id);
  if (existing != slices_.end() && existing->second.state == SliceState::Defined) {
    for (const auto& [id, js] : jobs_)
      if (js.job.rsi_id == tpl.rsi_id && js.job.state == JobState::Pending)
        throw ControllerError(Errc::InvalidState, "slice " + std::to_string(tpl.rsi_id) + " is being commissioned");
  }
  for (const auto& ref : tpl.cell_list) {
    auto eit = enbs_.find(ref.enb_id);
    if (eit != enbs_.end() && eit->second.state != EnbState::Synced)
      throw ControllerError(Errc::NotSynced, "eNB " + to_hex(ref.enb_id) + " is not synced", "cell_list");
  }
  auto deployed = deployed_templates();
  policy::RsiTemplate norm;
  try {
    norm = policy::validate_template(tpl, ran_map(), deployed).get();
  } catch (const policy::ValidationError& e) {
    throw ControllerError(Errc::ValidationFailed, e.what(), e.field());
  }

  SliceRecord rec;
  rec.tpl = norm;
  for (const auto& ref : norm.cell_list) rec.cells[ref] = CellStatus::Pending;
  auto& slot = slices_[norm.rsi_id];
  slot = std::move(rec);
  if (on_transition_) on_transition_({norm.rsi_id, std::nullopt, SliceState::Defined, host_.now()});
  journal({{"type", "slice"}, {"rsi_id", norm.rsi_id}, {"state", "defined"}, {"template", policy::template_to_json(norm)}});

  auto id = new_job(JobKind::Commission, norm.rsi_id);
  auto& js = jobs_.at(id);
  for (auto e : hosting_enbs(slot)) {
    js.waiting.insert(e);
    send_request(e, wire::AddSliceReq{norm.rsi_id, norm}, wire::OpKind::Create, {OpKind::Commit, id, norm.rsi_id});
  }
  arm_job_timer(id);
  return id;
}

JobId Controller::update(RsiId rsi, const policy::RrmPolicy& policy) {
  auto it = slices_.find(rsi);
  if (it == slices_.end() || it->second.state == SliceState::Decommissioned)
    throw ControllerError(Errc::UnknownSlice, "no slice " + std::to_string(rsi));
  auto& rec = it->second;
  if (rec.state != SliceState::Active && rec.state != SliceState::Deactivated)
    throw ControllerError(Errc::InvalidState, "slice " + std::to_string(rsi) + " is " + to_string(rec.state));
  auto candidate = rec.tpl;
  candidate.rrm_policy = policy;
  try {
    policy::validate_template(candidate, ran_map(), deployed_templates(), rsi);
  } catch (const policy::ValidationError& e) {
    throw ControllerError(Errc::ValidationFailed, e.what(), e.field());
  }
  auto id = new_job(JobKind::Update, rsi);
  auto& js = jobs_.at(id);
  js.new_policy = policy;
  for (auto e : hosting_enbs(rec)) {
    js.waiting.insert(e);
    send_request(e, wire::RanSliceReq{rsi, policy, std::nullopt}, wire::OpKind::Update, {OpKind::Update, id, rsi});
  }
  arm_job_timer(id);
  return id;
}

void Controller::activate(RsiId rsi) {
  auto it = slices_.find(rsi);
  if (it == slices_.end() || it->second.state == SliceState::Decommissioned)
    throw ControllerError(Errc::UnknownSlice, "no slice " + std::to_string(rsi));
  if (it->second.state != SliceState::Deactivated)
    throw ControllerError(Errc::InvalidState, "slice " + std::to_string(rsi) + " is " + to_string(it->second.state));
  transition(rsi, it->second, SliceState::Active);
  for (auto e : hosting_enbs(it->second))
    send_request(e, wire::RanSliceReq{rsi, std::nullopt, true}, wire::OpKind::Update, {OpKind::Push, 0, rsi});
}

void Controller::deactivate(RsiId rsi) {
  auto it = slices_.find(rsi);
  if (it == slices_.end() || it->second.state == SliceState::Decommissioned)
    throw ControllerError(Errc::UnknownSlice, "no slice " + std::to_string(rsi));
  if (it->second.state != SliceState::Active)
    throw ControllerError(Errc::InvalidState, "slice " + std::to_string(rsi) + " is " + to_string(it->second.state));
  transition(rsi, it->second, SliceState::Deactivated);
  for (auto e : hosting_enbs(it->second))
    send_request(e, wire::RanSliceReq{rsi, std::nullopt, false}, wire::OpKind::Update, {OpKind::Push, 0, rsi});
}

JobId Controller::decommission(RsiId rsi) {
  auto it = slices_.find(rsi);
  if (it == slices_.end() || it->second.state == SliceState::Decommissioned)
    throw ControllerError(Errc::UnknownSlice, "no slice " + std::to_string(rsi));
  for (auto& [jid, js] : jobs_)
    if (js.job.rsi_id == rsi && js.job.state == JobState::Pending) finish_job(js, false, "slice decommissioned");

  auto& rec = it->second;
  std::set<EnbId> targets;
  for (const auto& [ref, st] : rec.cells)
    if (st != CellStatus::Removed && enbs_.count(ref.enb_id) && enbs_.at(ref.enb_id).conn) targets.insert(ref.enb_id);
  transition(rsi, rec, SliceState::Decommissioned);
  std::erase_if(provisional_, [&](const Provisional& p) { return p.rsi == rsi; });

  auto id = new_job(JobKind::Decommission, rsi);
  auto& js = jobs_.at(id);
  for (auto e : targets) {
    js.waiting.insert(e);
    send_request(e, wire::RemoveSliceReq{rsi}, wire::OpKind::Delete, {OpKind::Remove, id, rsi});
  }
  if (js.waiting.empty())
    finish_job(js, true, "decommissioned");
  else
    arm_job_timer(id);
  return id;
}

// --- views -----------------------------------------------------------------------

const SliceRecord* Controller::slice(RsiId rsi) const {
  auto it = slices_.find(rsi);
  return it == slices_.end() ? nullptr : &it->second;
}

std::optional<Job> Controller::job(JobId id) const {
  auto it = jobs_.find(id);
  if (it == jobs_.end()) return std::nullopt;
  return it->second.job;
}

std::vector<UeEntry> Controller::ues() const {
  std::vector<UeEntry> out;
  for (const auto& [enb, list] : inventory_) out.insert(out.end(), list.begin(), list.end());
  return out;
}

std::vector<MeasurementRecord> Controller::measurements(RsiId rsi, Millis since) const {
  std::vector<MeasurementRecord> out;
  if (const auto* rec = slice(rsi))
    for (const auto& m : rec->history)
      if (m.at >= since) out.push_back(m);
  return out;
}

ordered_json Controller::enb_json(const EnbRecord& e) const {
  ordered_json cells = ordered_json::array();
  bool slicing = false;
  if (e.caps) {
    slicing = e.caps->slicing_supported;
    for (const auto& c : e.caps->cells)
      cells.push_back({{"cell_id", c.cell_id}, {"dl_earfcn", c.dl_earfcn}, {"ul_earfcn", c.ul_earfcn}, {"n_prb", c.n_prb}});
  }
  ordered_json links = ordered_json::array();
  for (auto l : e.links) links.push_back(to_hex(l));
  return {{"enb_id", to_hex(e.enb_id)}, {"state", to_string(e.state)}, {"last_seen_ms", e.last_seen},
          {"slicing_supported", slicing}, {"cells", cells}, {"links", links}};
}

ordered_json Controller::slice_json(RsiId rsi) const {
  const auto* rec = slice(rsi);
  if (!rec) return nullptr;
  ordered_json cells = ordered_json::array();
  for (const auto& [ref, st] : rec->cells)
    cells.push_back({{"enb_id", to_hex(ref.enb_id)}, {"cell_id", ref.cell_id}, {"status", to_string(st)}});
  return {{"rsi_id", rsi},
          {"state", to_string(rec->state)},
          {"cells", cells},
          {"counters", ordered_json::parse(policy::counters_to_json(counters(rsi)).dump())},
          {"template", ordered_json::parse(policy::template_to_json(rec->tpl).dump())}};
}

ordered_json Controller::ue_json(const UeEntry& u) const {
  ordered_json drbs = ordered_json::array();
  for (const auto& d : u.drbs) drbs.push_back({{"drb_id", d.drb_id}, {"qci", d.qos.qci}, {"arp", d.qos.arp}});
  return {{"enb_id", to_hex(u.enb_id)},
          {"cell_id", u.cell_id},
          {"rnti", to_hex(u.rnti, 2)},
          {"nas_id", u.nas_id.to_string()},
          {"plmn_id", u.plmn_id},
          {"rsi_id", u.rsi_id ? ordered_json(*u.rsi_id) : ordered_json(nullptr)},
          {"drbs", drbs}};
}

ordered_json Controller::measurement_json(const MeasurementRecord& m) const {
  return {{"at_ms", m.at},
          {"enb_id", to_hex(m.enb_id)},
          {"cell_id", m.cell_id},
          {"rsi_id", m.meas.rsi_id},
          {"dl_prb_assigned", m.meas.dl_prb_assigned},
          {"dl_prb_used", m.meas.dl_prb_used},
          {"ul_prb_assigned", m.meas.ul_prb_assigned},
          {"ul_prb_used", m.meas.ul_prb_used},
          {"interval_ms", m.meas.interval_ms},
          {"load_percent", m.load_percent}};
}

ordered_json Controller::job_json(const Job& j) const {
  return {{"id", j.id},          {"kind", to_string(j.kind)}, {"rsi_id", j.rsi_id},          {"state", to_string(j.state)},
          {"message", j.message}, {"created_ms", j.created},  {"finished_ms", j.finished}};
}

// --- journal ---------------------------------------------------------------------

void Controller::journal(const json& record) {
  if (config_.journal_path.empty() || replaying_) return;
  std::ofstream out(config_.journal_path, std::ios::app);
  out << record.dump() << "\n";
}

void Controller::replay_journal() {
  std::ifstream in(config_.journal_path);
  if (!in) return;
  replaying_ = true;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      auto r = json::parse(line);
      auto type = r.at("type").get<std::string>();
      if (type == "enb") {
        auto id = std::stoull(r.at("enb_id").get<std::string>(), nullptr, 0);
        enbs_[id].enb_id = id;
      } else if (type == "slice") {
        auto rsi = r.at("rsi_id").get<RsiId>();
        auto state = slice_state_from(r.at("state").get<std::string>());
        if (!state) continue;
        auto& rec = slices_[rsi];
        rec.tpl = policy::template_from_json(r.at("template"));
        rec.state = *state;
        if (*state == SliceState::Defined) rec.history.clear();
        rec.cells.clear();
        auto status = *state == SliceState::Defined || *state == SliceState::Decommissioned ? CellStatus::Pending
                                                                                              : CellStatus::Degraded;
        for (const auto& ref : rec.tpl.cell_list) rec.cells[ref] = status;
      } else if (type == "measurement") {
        auto rsi = r.at("rsi_id").get<RsiId>();
        auto it = slices_.find(rsi);
        if (it == slices_.end()) continue;
        MeasurementRecord m;
        m.at = r.at("at_ms").get<Millis>();
        m.enb_id = std::stoull(r.at("enb_id").get<std::string>(), nullptr, 0);
        m.cell_id = r.at("cell_id").get<CellId>();
        m.meas.rsi_id = rsi;
        m.meas.dl_prb_assigned = r.at("dl_prb_assigned").get<std::uint32_t>();
        m.meas.dl_prb_used = r.at("dl_prb_used").get<std::uint32_t>();
        m.meas.ul_prb_assigned = r.at("ul_prb_assigned").get<std::uint32_t>();
        m.meas.ul_prb_used = r.at("ul_prb_used").get<std::uint32_t>();
        m.meas.interval_ms = r.at("interval_ms").get<std::uint32_t>();
        m.load_percent = r.at("load_percent").get<double>();
        it->second.history.push_back(m);
      } else if (type == "link") {
        auto a = std::stoull(r.at("a").get<std::string>(), nullptr, 0);
        auto b = std::stoull(r.at("b").get<std::string>(), nullptr, 0);
        if (r.at("present").get<bool>()) {
          enbs_[a].links.insert(b);
          enbs_[b].links.insert(a);
        } else {
          enbs_[a].links.erase(b);
          enbs_[b].links.erase(a);
        }
      }
    } catch (const std::exception& e) {
      log("journal line " + std::to_string(lineno) + " skipped: " + e.what());
    }
  }
  replaying_ = false;
}

}  // namespace ranslice::controller
