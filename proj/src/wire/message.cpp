#include <sstream>

#include "ranslice/wire/message.hpp"

namespace ranslice::wire {

Action action_of(const Body& body) { return static_cast<Action>(body.index() + 1); }

bool is_response(Action a) {
  switch (a) {
    case Action::HelloResp:
    case Action::CapsResp:
    case Action::UeReportResp:
    case Action::AddSliceResp:
    case Action::RemoveSliceResp:
    case Action::RanSliceResp:
    case Action::AcResp:
      return true;
    default:
      return false;
  }
}

std::optional<Action> response_for(Action request) {
  switch (request) {
    case Action::HelloReq:
      return Action::HelloResp;
    case Action::CapsReq:
      return Action::CapsResp;
    case Action::UeReportReq:
      return Action::UeReportResp;
    case Action::AddSliceReq:
      return Action::AddSliceResp;
    case Action::RemoveSliceReq:
      return Action::RemoveSliceResp;
    case Action::RanSliceReq:
      return Action::RanSliceResp;
    case Action::AcReq:
      return Action::AcResp;
    default:
      return std::nullopt;
  }
}

std::string to_string(Action a) {
  static constexpr const char* kNames[] = {
      "?",           "HelloReq",       "HelloResp",       "CapsReq",     "CapsResp",
      "UeReportReq", "UeReportResp",   "AddSliceReq",     "AddSliceResp", "RemoveSliceReq",
      "RemoveSliceResp", "RanSliceReq", "RanSliceResp",   "AcReq",       "AcResp",
      "SliceMeas"};
  auto i = static_cast<std::size_t>(a);
  return i < std::size(kNames) ? kNames[i] : "Action(" + std::to_string(i) + ")";
}

std::string to_string(EventType t) {
  switch (t) {
    case EventType::Single:
      return "Single";
    case EventType::Scheduled:
      return "Scheduled";
    case EventType::Triggered:
      return "Triggered";
  }
  return "?";
}

std::string to_string(Opcode op) {
  switch (op.kind) {
    case OpKind::Success:
      return "Success";
    case OpKind::Create:
      return "Create";
    case OpKind::Retrieve:
      return "Retrieve";
    case OpKind::Update:
      return "Update";
    case OpKind::Delete:
      return "Delete";
    case OpKind::Error:
      return "Error(" + std::to_string(op.error_code) + ")";
  }
  return "?";
}

Message make_message(EventType type, EnbId element, CellId cell, Opcode op, Body body,
                     std::uint32_t period_ms) {
  Message m;
  m.header.event_type = type;
  m.header.element_id = element;
  m.header.cell_id = cell;
  m.event.action = action_of(body);
  m.event.opcode = op;
  m.event.period_ms = period_ms;
  m.body = std::move(body);
  return m;
}

namespace {

std::string qos_str(const policy::QosProfile& q) {
  return "{qci=" + std::to_string(q.qci) + ",arp=" + std::to_string(q.arp) + "}";
}

void dump_policy(std::ostringstream& os, const policy::RrmPolicy& p, const char* indent) {
  os << indent << "l3.averaging_window_ms: " << p.l3.averaging_window_ms << "\n";
  for (const auto& r : p.l3.rules) {
    os << indent << "l3.rule: " << policy::to_string(r.metric) << "[";
    for (std::size_t i = 0; i < r.match.pairs.size(); ++i) {
      const auto& pat = r.match.pairs[i];
      os << (i ? "," : "") << "(" << (pat.qci ? std::to_string(*pat.qci) : "*") << ","
         << (pat.arp ? std::to_string(*pat.arp) : "*") << ")";
    }
    os << "][" << policy::to_string(r.scope) << "][" << policy::to_string(r.bound)
       << "] = " << r.value << "\n";
  }
  if (auto share = p.l2.wrr_share()) {
    os << indent << "l2.inter_slice: WRR " << *share << "%\n";
  } else {
    os << indent << "l2.inter_slice: RR\n";
  }
  os << indent << "l2.intra_slice: " << policy::to_string(p.l2.intra_slice) << "\n";
  if (p.l1_opaque) os << indent << "l1_opaque: " << p.l1_opaque->size() << " octets\n";
}

struct BodyDumper {
  std::ostringstream& os;
  void operator()(const HelloReq&) const {}
  void operator()(const HelloResp&) const {}
  void operator()(const CapsReq&) const {}
  void operator()(const UeReportReq&) const {}
  void operator()(const CapsResp& b) const {
    os << "  enb_id: " << to_hex(b.enb_id) << "\n  slicing_supported: " << (b.slicing_supported ? "true" : "false")
       << "\n";
    for (const auto& c : b.cells)
      os << "  cell: id=" << c.cell_id << " dl_earfcn=" << c.dl_earfcn << " ul_earfcn=" << c.ul_earfcn
         << " n_prb=" << c.n_prb << "\n";
  }
  void operator()(const UeReportResp& b) const {
    os << "  ues: " << b.ues.size() << "\n";
    for (const auto& ue : b.ues) {
      os << "  ue: cell=" << ue.cell_id << " plmn=" << ue.plmn_id << " nas=" << ue.nas_id.to_string()
         << " rnti=" << to_hex(ue.rnti, 2) << " rsi="
         << (ue.rsi_id ? std::to_string(*ue.rsi_id) : std::string("-")) << "\n";
      for (const auto& d : ue.drbs) os << "    drb: id=" << int(d.drb_id) << " qos=" << qos_str(d.qos) << "\n";
    }
  }
  void operator()(const AddSliceReq& b) const {
    os << "  rsi_id: " << b.rsi_id << "\n  cells:";
    for (const auto& c : b.tpl.cell_list) os << " " << to_hex(c.enb_id) << "/" << c.cell_id;
    os << "\n  nas_ids: " << b.tpl.nas_id_list.size() << "\n";
    dump_policy(os, b.tpl.rrm_policy, "  ");
  }
  void operator()(const AddSliceResp& b) const { os << "  rsi_id: " << b.rsi_id << "\n"; }
  void operator()(const RemoveSliceReq& b) const { os << "  rsi_id: " << b.rsi_id << "\n"; }
  void operator()(const RemoveSliceResp& b) const { os << "  rsi_id: " << b.rsi_id << "\n"; }
  void operator()(const RanSliceReq& b) const {
    os << "  rsi_id: " << b.rsi_id << "\n";
    if (b.active) os << "  active: " << (*b.active ? "true" : "false") << "\n";
    if (b.policy) dump_policy(os, *b.policy, "  ");
  }
  void operator()(const RanSliceResp& b) const {
    for (const auto& s : b.slices) {
      os << "  slice: rsi_id=" << s.rsi_id << " active=" << (s.active ? "true" : "false")
         << " ues=" << s.ue_count << "\n";
      dump_policy(os, s.policy, "    ");
    }
  }
  void operator()(const AcReq& b) const {
    os << "  rnti: " << to_hex(b.rnti, 2) << "\n  drbs:";
    for (const auto& d : b.drbs) os << " " << d.count << "{" << int(d.qos.qci) << "," << int(d.qos.arp) << "}";
    os << "\n";
  }
  void operator()(const AcResp& b) const {
    os << "  rnti: " << to_hex(b.rnti, 2) << "\n  accepted: " << (b.accepted ? "true" : "false") << "\n";
  }
  void operator()(const SliceMeas& b) const {
    os << "  rsi_id: " << b.rsi_id << "\n  dl_prb: assigned=" << b.dl_prb_assigned << " used=" << b.dl_prb_used
       << "\n  ul_prb: assigned=" << b.ul_prb_assigned << " used=" << b.ul_prb_used
       << "\n  interval_ms: " << b.interval_ms << "\n";
  }
};

}  // namespace

std::string dump(const Message& msg) {
  std::ostringstream os;
  os << to_string(msg.event.action) << " [" << to_string(msg.header.event_type) << ", "
     << to_string(msg.event.opcode);
  if (msg.event.period_ms) os << ", period=" << msg.event.period_ms << "ms";
  os << "]\n";
  os << "  version=" << int(msg.header.version) << " length=" << encoded_length(msg)
     << " element=" << to_hex(msg.header.element_id) << " cell=" << msg.header.cell_id
     << " xid=" << msg.header.xid << " seq=" << msg.header.seq << "\n";
  std::visit(BodyDumper{os}, msg.body);
  return os.str();
}

}  // namespace ranslice::wire
