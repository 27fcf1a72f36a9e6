#include "ranslice/enb/agent.hpp"

#include <algorithm>

namespace ranslice::enb {

using wire::Action;
using wire::AgentErrc;
using wire::EventType;
using wire::Message;
using wire::Opcode;
using wire::OpKind;

std::string to_string(Signal s) {
  switch (s) {
    case Signal::RRCConnectionRequest:
      return "RRCConnectionRequest";
    case Signal::RRCConnectionSetup:
      return "RRCConnectionSetup";
    case Signal::RRCConnectionSetupComplete:
      return "RRCConnectionSetupComplete";
    case Signal::RRCConnectionReconfiguration:
      return "RRCConnectionReconfiguration";
    case Signal::RRCConnectionReconfigurationComplete:
      return "RRCConnectionReconfigurationComplete";
    case Signal::RRCConnectionRelease:
      return "RRCConnectionRelease";
    case Signal::InitialUEMessage:
      return "InitialUEMessage";
    case Signal::InitialContextSetupRequest:
      return "InitialContextSetupRequest";
    case Signal::InitialContextSetupResponse:
      return "InitialContextSetupResponse";
    case Signal::InitialContextSetupFailure:
      return "InitialContextSetupFailure";
    case Signal::UEContextReleaseRequest:
      return "UEContextReleaseRequest";
    case Signal::UEContextReleaseCommand:
      return "UEContextReleaseCommand";
    case Signal::UEContextReleaseComplete:
      return "UEContextReleaseComplete";
  }
  return "?";
}

std::string to_string(Step s) {
  static constexpr const char* kNames[kStepCount] = {
      "air_link",       "s1_link",           "control_link",        "enb_rrc_proc",
      "ue_rrc_proc",    "epc_attach_proc",   "enb_local_ac_proc",   "controller_ac_proc",
      "enb_central_accept_proc", "enb_context_setup_proc", "ue_reconfig_proc", "epc_release_proc"};
  auto i = static_cast<std::size_t>(s);
  return i < kStepCount ? kNames[i] : "?";
}

std::string to_string(AcPath p) {
  switch (p) {
    case AcPath::None:
      return "none";
    case AcPath::Local:
      return "local";
    case AcPath::Centralized:
      return "centralized";
  }
  return "?";
}

Enb::Enb(EnbConfig config, EnbHost& host)
    : config_(std::move(config)), host_(host), next_rnti_(config_.first_rnti), backoff_ms_(config_.reconnect_initial_ms) {
  for (const auto& c : config_.cells) {
    mac::CellParams p;
    p.n_prb = c.n_prb;
    p.work_conserving = config_.work_conserving;
    p.cqi_table = config_.cqi_table;
    p.accounting = config_.accounting;
    auto [it, _] = cells_.emplace(c.cell_id, mac::Cell(p));
    // Without slicing every UE lands in one implicit slice owning the cell.
    if (!config_.slicing_supported) it->second.add_slice(0, policy::L2Descriptor{});
  }
}

mac::Cell& Enb::cell(CellId id) { return cells_.at(id); }
const mac::Cell& Enb::cell(CellId id) const { return cells_.at(id); }

// --- control connection ----------------------------------------------------------

void Enb::start() { try_connect(); }

void Enb::try_connect() {
  if (connected_) return;
  if (host_.connect_controller()) {
    connected_ = true;
    session_ = wire::Session{};
    backoff_ms_ = config_.reconnect_initial_ms;
    send_hello();
    return;
  }
  auto delay = backoff_ms_;
  backoff_ms_ = std::min(backoff_ms_ * 2, config_.reconnect_cap_ms);
  host_.schedule(delay, [this, e = epoch_] {
    if (e == epoch_) try_connect();
  });
}

void Enb::on_controller_lost() {
  if (!connected_) return;
  connected_ = false;
  ++epoch_;
  if (hello_timer_) host_.cancel(*hello_timer_);
  hello_timer_.reset();
  backoff_ms_ = config_.reconnect_initial_ms;
  host_.schedule(backoff_ms_, [this, e = epoch_] {
    if (e == epoch_) try_connect();
  });
}

void Enb::send_hello() {
  if (!connected_) return;
  // Unanswered heartbeats are not worth remembering.
  for (auto it = session_.pending().begin(); it != session_.pending().end();) {
    auto xid = it->first;
    bool hello = it->second.request.event.action == Action::HelloReq;
    ++it;
    if (hello) session_.forget(xid);
  }
  send(wire::make_message(EventType::Scheduled, id(), 0, Opcode::of(OpKind::Retrieve), wire::HelloReq{},
                          config_.hello_period_ms),
       true);
  hello_timer_ = host_.schedule(config_.hello_period_ms, [this, e = epoch_] {
    if (e == epoch_) send_hello();
  });
}

std::uint32_t Enb::send(Message msg, bool request) {
  if (!connected_) return 0;
  msg.header.element_id = id();
  auto frame = session_.stamp_and_encode(msg, request);
  if (request) session_.track(msg, host_.now());
  host_.send_controller(std::move(frame));
  return msg.header.xid;
}

void Enb::reply_error(const Message& req, wire::Body body, AgentErrc code) {
  auto m = wire::make_message(EventType::Single, id(), req.header.cell_id, Opcode::error(code), std::move(body));
  m.header.xid = req.header.xid;
  send(std::move(m), false);
}

void Enb::send_ue_report() {
  send(wire::make_message(EventType::Triggered, id(), 0, Opcode::success(), inventory()), false);
}

void Enb::on_controller_frame(std::span<const std::uint8_t> frame) {
  Message msg;
  try {
    msg = wire::decode(frame);
  } catch (const wire::WireError&) {
    return;
  }
  session_.observe_peer_seq(msg.header.seq);
  handle(msg);
}

void Enb::handle(const Message& msg) {
  auto reply = [&](wire::Body body) {
    auto m = wire::make_message(EventType::Single, id(), msg.header.cell_id, Opcode::success(), std::move(body));
    m.header.xid = msg.header.xid;
    send(std::move(m), false);
  };

  if (wire::is_response(msg.event.action)) {
    try {
      session_.pair_response(msg);
    } catch (const wire::WireError&) {
      return;
    }
    if (const auto* ac = std::get_if<wire::AcResp>(&msg.body)) handle_ac_resp(*ac, msg.header.xid);
    return;
  }

  std::visit(
      [&](const auto& body) {
        using T = std::decay_t<decltype(body)>;
        if constexpr (std::is_same_v<T, wire::CapsReq>) {
          wire::CapsResp caps;
          caps.enb_id = id();
          caps.slicing_supported = config_.slicing_supported;
          for (const auto& c : config_.cells) caps.cells.push_back({c.cell_id, c.dl_earfcn, c.ul_earfcn, c.n_prb});
          reply(std::move(caps));
        } else if constexpr (std::is_same_v<T, wire::UeReportReq>) {
          reply(inventory());
        } else if constexpr (std::is_same_v<T, wire::AddSliceReq>) {
          handle_add_slice(msg, body);
        } else if constexpr (std::is_same_v<T, wire::RemoveSliceReq>) {
          handle_remove_slice(msg, body);
        } else if constexpr (std::is_same_v<T, wire::RanSliceReq>) {
          handle_ran_slice(msg, body);
        }
      },
      msg.body);
}

void Enb::handle_add_slice(const Message& msg, const wire::AddSliceReq& req) {
  wire::AddSliceResp resp{req.rsi_id};
  if (!config_.slicing_supported) return reply_error(msg, resp, AgentErrc::SlicingUnsupported);
  if (slices_.count(req.rsi_id) || req.rsi_id == 0) return reply_error(msg, resp, AgentErrc::DuplicateSlice);

  std::vector<CellId> mine;
  for (const auto& ref : req.tpl.cell_list)
    if (ref.enb_id == id() && cells_.count(ref.cell_id)) mine.push_back(ref.cell_id);
  if (mine.empty()) return reply_error(msg, resp, AgentErrc::BadRequest);

  if (auto share = req.tpl.rrm_policy.l2.wrr_share()) {
    for (auto c : mine) {
      double sum = *share;
      for (const auto& [sid, s] : slices_) {
        auto other = s.tpl.rrm_policy.l2.wrr_share();
        if (other && std::find(s.cells.begin(), s.cells.end(), c) != s.cells.end()) sum += *other;
      }
      if (sum > 100.0 + 1e-9) return reply_error(msg, resp, AgentErrc::ShareOverflow);
    }
  }

  SliceEntry entry{req.rsi_id, req.tpl, false, mine};
  entry.tpl.rsi_id = req.rsi_id;
  for (auto c : mine) cells_.at(c).add_slice(req.rsi_id, req.tpl.rrm_policy.l2, false);
  slices_.emplace(req.rsi_id, std::move(entry));

  auto m = wire::make_message(EventType::Single, id(), msg.header.cell_id, Opcode::success(), resp);
  m.header.xid = msg.header.xid;
  send(std::move(m), false);
}

void Enb::handle_remove_slice(const Message& msg, const wire::RemoveSliceReq& req) {
  wire::RemoveSliceResp resp{req.rsi_id};
  auto it = slices_.find(req.rsi_id);
  if (it == slices_.end()) return reply_error(msg, resp, AgentErrc::UnknownSlice);

  std::vector<Rnti> victims;
  for (const auto& [rnti, ctx] : contexts_)
    if (ctx.rsi_id == req.rsi_id) victims.push_back(rnti);
  for (auto rnti : victims) detach(rnti, "slice removed");
  for (auto c : it->second.cells) cells_.at(c).remove_slice(req.rsi_id);
  slices_.erase(it);

  auto m = wire::make_message(EventType::Single, id(), msg.header.cell_id, Opcode::success(), resp);
  m.header.xid = msg.header.xid;
  send(std::move(m), false);
  if (!victims.empty()) send_ue_report();
}

void Enb::handle_ran_slice(const Message& msg, const wire::RanSliceReq& req) {
  if (msg.event.opcode.kind != OpKind::Retrieve) {
    auto it = slices_.find(req.rsi_id);
    if (it == slices_.end()) return reply_error(msg, wire::RanSliceResp{}, AgentErrc::UnknownSlice);
    auto& entry = it->second;
    if (req.policy) {
      try {
        policy::validate_policy(*req.policy);
      } catch (const policy::ValidationError&) {
        return reply_error(msg, wire::RanSliceResp{}, AgentErrc::BadRequest);
      }
      if (auto share = req.policy->l2.wrr_share()) {
        for (auto c : entry.cells) {
          double sum = *share;
          for (const auto& [sid, s] : slices_) {
            if (sid == entry.rsi_id) continue;
            auto other = s.tpl.rrm_policy.l2.wrr_share();
            if (other && std::find(s.cells.begin(), s.cells.end(), c) != s.cells.end()) sum += *other;
          }
          if (sum > 100.0 + 1e-9) return reply_error(msg, wire::RanSliceResp{}, AgentErrc::ShareOverflow);
        }
      }
      entry.tpl.rrm_policy = *req.policy;
      for (auto c : entry.cells) cells_.at(c).stage_update(entry.rsi_id, req.policy->l2);
    }
    if (req.active) {
      entry.active = *req.active;
      for (auto c : entry.cells) cells_.at(c).stage_active(entry.rsi_id, *req.active);
    }
  }
  auto m = wire::make_message(EventType::Single, id(), msg.header.cell_id, Opcode::success(), slice_view());
  m.header.xid = msg.header.xid;
  send(std::move(m), false);
}

// --- views ---------------------------------------------------------------------

Association Enb::associate(const NasId& nas) const {
  Association a;
  std::vector<RsiId> hits;
  for (const auto& [sid, s] : slices_) {
    if (!s.active) continue;
    const auto& list = s.tpl.nas_id_list;
    if (std::find(list.begin(), list.end(), nas) != list.end()) hits.push_back(sid);
  }
  if (hits.size() > 1) {
    a.error = AssocErrc::AmbiguousAssociation;
  } else if (hits.size() == 1) {
    a.rsi_id = hits.front();
  } else if (config_.default_slice && slices_.count(*config_.default_slice) &&
             slices_.at(*config_.default_slice).active) {
    a.rsi_id = config_.default_slice;
  } else {
    a.error = AssocErrc::NoMatchingSlice;
  }
  return a;
}

std::optional<Rnti> Enb::rnti_of(UeHandle ue) const {
  for (const auto& [rnti, ctx] : contexts_)
    if (ctx.ue == ue) return rnti;
  return std::nullopt;
}

policy::SliceCounters Enb::counters(RsiId rsi, CellId cell_id) const {
  policy::SliceCounters c;
  auto it = slices_.find(rsi);
  std::uint32_t window = it == slices_.end() ? 1000 : it->second.tpl.rrm_policy.l3.averaging_window_ms;
  const auto& mac_cell = cells_.at(cell_id);
  for (const auto& [rnti, ctx] : contexts_) {
    if (!ctx.admitted || ctx.rsi_id != rsi || ctx.cell_id != cell_id) continue;
    ++c.connected_ues;
    for (const auto& d : ctx.drbs) c.active_drbs[d.qos] += d.count;
    if (ctx.drbs.empty() || window == 0) continue;
    auto used = mac_cell.usage(rnti, window);
    const auto& q = ctx.drbs.front().qos;
    c.radio_load_percent[q] += 100.0 * static_cast<double>(used.prbs) / (double(mac_cell.params().n_prb) * window);
    c.bitrate_bps[q] += static_cast<double>(used.bits) * 1000.0 / window;
  }
  return c;
}

wire::UeReportResp Enb::inventory() const {
  wire::UeReportResp r;
  for (const auto& [rnti, ctx] : contexts_) {
    wire::UeRecord rec;
    rec.cell_id = ctx.cell_id;
    rec.plmn_id = config_.plmn_id;
    rec.nas_id = ctx.nas_id;
    rec.rnti = rnti;
    rec.rsi_id = ctx.rsi_id;
    if (ctx.stage == AttachStage::DrbActive) {
      std::uint8_t drb_id = 1;
      for (const auto& d : ctx.drbs)
        for (std::uint32_t k = 0; k < d.count; ++k) rec.drbs.push_back({drb_id++, d.qos});
    }
    r.ues.push_back(std::move(rec));
  }
  return r;
}

wire::RanSliceResp Enb::slice_view() const {
  wire::RanSliceResp r;
  for (const auto& [sid, s] : slices_) {
    wire::SliceStatus st;
    st.rsi_id = sid;
    st.policy = s.tpl.rrm_policy;
    st.active = s.active;
    for (const auto& [rnti, ctx] : contexts_)
      if (ctx.admitted && ctx.rsi_id == sid) ++st.ue_count;
    r.slices.push_back(std::move(st));
  }
  return r;
}

// --- attach pipeline -----------------------------------------------------------

void Enb::on_radio(const SignalMsg& msg) {
  switch (msg.signal) {
    case Signal::RRCConnectionRequest: {
      if (!cells_.count(msg.cell_id)) return;
      Rnti rnti = next_rnti_++;
      AttachContext ctx;
      ctx.ue = msg.ue;
      ctx.cell_id = msg.cell_id;
      ctx.rnti = rnti;
      contexts_[rnti] = ctx;
      host_.schedule(host_.processing(Step::EnbRrcProc, msg.ue), [this, rnti, ue = msg.ue, cell = msg.cell_id] {
        if (!contexts_.count(rnti)) return;
        SignalMsg setup;
        setup.signal = Signal::RRCConnectionSetup;
        setup.ue = ue;
        setup.enb_id = id();
        setup.cell_id = cell;
        setup.rnti = rnti;
        host_.send_radio(setup);
      });
      break;
    }
    case Signal::RRCConnectionSetupComplete:
      host_.schedule(host_.processing(Step::EnbRrcProc, msg.ue), [this, msg] { on_setup_complete(msg); });
      break;
    case Signal::RRCConnectionReconfigurationComplete: {
      auto it = contexts_.find(msg.rnti);
      if (it == contexts_.end() || !it->second.admitted) return;
      auto& ctx = it->second;
      ctx.stage = AttachStage::DrbActive;
      auto& c = cells_.at(ctx.cell_id);
      c.add_ue(msg.rnti, ctx.rsi_id.value_or(0), 9);
      send_ue_report();
      break;
    }
    default:
      break;
  }
}

void Enb::on_setup_complete(const SignalMsg& msg) {
  auto it = contexts_.find(msg.rnti);
  if (it == contexts_.end()) return;
  auto& ctx = it->second;
  ctx.nas_id = msg.nas_id;

  if (config_.slicing_supported) {
    auto assoc = associate(ctx.nas_id);
    if (assoc.error) {
      AdmissionRecord rec{ctx.ue, ctx.cell_id, ctx.rnti, std::nullopt, AcPath::None, false,
                          *assoc.error == AssocErrc::NoMatchingSlice ? "no matching slice" : "ambiguous association"};
      SignalMsg rel;
      rel.signal = Signal::RRCConnectionRelease;
      rel.ue = ctx.ue;
      rel.enb_id = id();
      rel.cell_id = ctx.cell_id;
      rel.rnti = ctx.rnti;
      rel.cause = rec.reason;
      contexts_.erase(it);
      host_.on_admission(rec);
      host_.send_radio(rel);
      return;
    }
    ctx.rsi_id = assoc.rsi_id;
  }
  ctx.stage = AttachStage::ContextRequested;
  send_ue_report();

  SignalMsg ium;
  ium.signal = Signal::InitialUEMessage;
  ium.ue = ctx.ue;
  ium.enb_id = id();
  ium.cell_id = ctx.cell_id;
  ium.rnti = ctx.rnti;
  ium.nas_id = ctx.nas_id;
  host_.send_s1(ium);
}

void Enb::on_s1(const SignalMsg& msg) {
  switch (msg.signal) {
    case Signal::InitialContextSetupRequest: {
      auto it = contexts_.find(msg.rnti);
      if (it == contexts_.end()) return;
      it->second.drbs = msg.drbs;
      if (!config_.slicing_supported) {
        accept(msg.rnti, AcPath::None);
        return;
      }
      host_.schedule(host_.processing(Step::EnbLocalAcProc, it->second.ue),
                     [this, rnti = msg.rnti] { local_admission(rnti); });
      break;
    }
    case Signal::UEContextReleaseCommand: {
      SignalMsg done;
      done.signal = Signal::UEContextReleaseComplete;
      done.ue = msg.ue;
      done.enb_id = id();
      done.cell_id = msg.cell_id;
      done.rnti = msg.rnti;
      auto it = contexts_.find(msg.rnti);
      if (it != contexts_.end()) {
        SignalMsg rel;
        rel.signal = Signal::RRCConnectionRelease;
        rel.ue = it->second.ue;
        rel.enb_id = id();
        rel.cell_id = it->second.cell_id;
        rel.rnti = msg.rnti;
        rel.cause = msg.cause;
        release(msg.rnti);
        host_.send_radio(rel);
        host_.send_s1(done);
        send_ue_report();
      } else {
        host_.send_s1(done);
      }
      break;
    }
    default:
      break;
  }
}

void Enb::local_admission(Rnti rnti) {
  auto it = contexts_.find(rnti);
  if (it == contexts_.end()) return;
  auto& ctx = it->second;
  auto sit = ctx.rsi_id ? slices_.find(*ctx.rsi_id) : slices_.end();
  if (sit == slices_.end() || !sit->second.active) return reject(rnti, AcPath::Local, "slice not active");

  const auto& l3 = sit->second.tpl.rrm_policy.l3;
  policy::AdmissionRequest req{ctx.drbs, true};
  auto decision = policy::evaluate_cell(l3, counters(*ctx.rsi_id, ctx.cell_id), req, config_.estimates);
  switch (decision) {
    case policy::CellDecision::AcceptLocal:
      return accept(rnti, AcPath::Local);
    case policy::CellDecision::RejectLocal:
      return reject(rnti, AcPath::Local, "cell limit reached");
    case policy::CellDecision::Escalate:
      break;
  }

  if (!connected_) return reject(rnti, AcPath::Centralized, "controller unreachable");
  ctx.stage = AttachStage::AcPending;
  ctx.path = AcPath::Centralized;
  wire::AcReq body{rnti, ctx.drbs};
  ctx.ac_xid = send(wire::make_message(EventType::Single, id(), ctx.cell_id, Opcode::of(OpKind::Create), body), true);
  ctx.guard = host_.schedule(config_.ac_guard_ms, [this, rnti, xid = ctx.ac_xid] {
    auto g = contexts_.find(rnti);
    if (g == contexts_.end() || g->second.stage != AttachStage::AcPending || g->second.ac_xid != xid) return;
    g->second.guard.reset();
    session_.forget(xid);
    reject(rnti, AcPath::Centralized, "AC guard timeout");
  });
}

void Enb::handle_ac_resp(const wire::AcResp& resp, std::uint32_t xid) {
  auto it = std::find_if(contexts_.begin(), contexts_.end(), [&](const auto& kv) {
    return kv.second.stage == AttachStage::AcPending && kv.second.ac_xid == xid;
  });
  if (it == contexts_.end() || it->first != resp.rnti) return;
  auto& ctx = it->second;
  if (ctx.guard) host_.cancel(*ctx.guard);
  ctx.guard.reset();
  if (resp.accepted)
    accept(resp.rnti, AcPath::Centralized);
  else
    reject(resp.rnti, AcPath::Centralized, "slice limit reached");
}

void Enb::accept(Rnti rnti, AcPath path) {
  auto& ctx = contexts_.at(rnti);
  ctx.admitted = true;
  ctx.path = path;
  ctx.stage = AttachStage::ContextRequested;
  host_.on_admission({ctx.ue, ctx.cell_id, rnti, ctx.rsi_id, path, true, ""});

  Millis delay = host_.processing(Step::EnbContextSetupProc, ctx.ue);
  if (path == AcPath::Centralized) delay += host_.processing(Step::EnbCentralAcceptProc, ctx.ue);
  host_.schedule(delay, [this, rnti] {
    auto it = contexts_.find(rnti);
    if (it == contexts_.end()) return;
    const auto& c = it->second;
    SignalMsg ok;
    ok.signal = Signal::InitialContextSetupResponse;
    ok.ue = c.ue;
    ok.enb_id = id();
    ok.cell_id = c.cell_id;
    ok.rnti = rnti;
    ok.drbs = c.drbs;
    host_.send_s1(ok);
    SignalMsg reconf = ok;
    reconf.signal = Signal::RRCConnectionReconfiguration;
    host_.send_radio(reconf);
  });
}

void Enb::reject(Rnti rnti, AcPath path, const std::string& reason) {
  auto& ctx = contexts_.at(rnti);
  ctx.path = path;
  ctx.stage = AttachStage::Released;
  host_.on_admission({ctx.ue, ctx.cell_id, rnti, ctx.rsi_id, path, false, reason});
  SignalMsg fail;
  fail.signal = Signal::InitialContextSetupFailure;
  fail.ue = ctx.ue;
  fail.enb_id = id();
  fail.cell_id = ctx.cell_id;
  fail.rnti = rnti;
  fail.cause = reason;
  host_.send_s1(fail);
}

void Enb::release(Rnti rnti) {
  auto it = contexts_.find(rnti);
  if (it == contexts_.end()) return;
  if (it->second.guard) host_.cancel(*it->second.guard);
  if (it->second.stage == AttachStage::AcPending) session_.forget(it->second.ac_xid);
  if (auto c = cells_.find(it->second.cell_id); c != cells_.end()) c->second.remove_ue(rnti);
  contexts_.erase(it);
}

void Enb::detach(Rnti rnti, const std::string& cause) {
  auto it = contexts_.find(rnti);
  if (it == contexts_.end()) return;
  SignalMsg rel;
  rel.signal = Signal::RRCConnectionRelease;
  rel.ue = it->second.ue;
  rel.enb_id = id();
  rel.cell_id = it->second.cell_id;
  rel.rnti = rnti;
  rel.cause = cause;
  SignalMsg req = rel;
  req.signal = Signal::UEContextReleaseRequest;
  release(rnti);
  host_.send_radio(rel);
  host_.send_s1(req);
}

// --- user plane ------------------------------------------------------------------

void Enb::deliver_dl(CellId cell_id, Rnti rnti, std::uint64_t bytes) {
  auto it = contexts_.find(rnti);
  if (it == contexts_.end() || it->second.stage != AttachStage::DrbActive || it->second.cell_id != cell_id) return;
  cells_.at(cell_id).enqueue(rnti, 1, bytes);
}

void Enb::set_cqi(CellId cell_id, Rnti rnti, int cqi) {
  auto it = cells_.find(cell_id);
  if (it != cells_.end() && it->second.has_ue(rnti)) it->second.set_cqi(rnti, cqi);
}

void Enb::tti() {
  auto now = host_.now();
  if (now > 0 && config_.meas_period_ms && now % config_.meas_period_ms == 0) emit_measurements();
  for (auto& [id, c] : cells_) c.step_tti();
}

void Enb::emit_measurements() {
  auto clamp = [](std::uint64_t v) { return static_cast<std::uint32_t>(std::min<std::uint64_t>(v, 0xFFFFFFFFu)); };
  for (auto& [cell_id, c] : cells_) {
    for (const auto& counters : c.rollup()) {
      host_.on_slice_measurement(cell_id, counters);
      auto it = slices_.find(counters.rsi_id);
      if (it == slices_.end() || !it->second.active) continue;
      wire::SliceMeas m{counters.rsi_id,
                        clamp(counters.dl_prb_assigned),
                        clamp(counters.dl_prb_used),
                        clamp(counters.ul_prb_assigned),
                        clamp(counters.ul_prb_used),
                        counters.interval_tti};
      send(wire::make_message(EventType::Scheduled, id(), cell_id, Opcode::success(), m, config_.meas_period_ms),
           false);
    }
  }
}

}  // namespace ranslice::enb
