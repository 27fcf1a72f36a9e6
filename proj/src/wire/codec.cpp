#include <cmath>
#include <sstream>

#include "bytes.hpp"
#include "ranslice/wire/message.hpp"

namespace ranslice::wire {

using detail::Reader;
using detail::Writer;

namespace {

constexpr std::uint64_t kMaxImsi = 999'999'999'999'999ULL;
constexpr std::size_t kMaxList = 0xFFFF;

[[noreturn]] void ill_formed(const std::string& what) { throw WireError(WireErrc::WellFormedness, what); }

// --- well-formedness of body fields -------------------------------------------

void check_qos(const policy::QosProfile& q, const char* where) {
  if (q.qci < policy::kMinQci) ill_formed(std::string(where) + ": qci out of range");
  if (q.arp < policy::kMinArp || q.arp > policy::kMaxArp)
    ill_formed(std::string(where) + ": arp out of range");
}

void check_list(std::size_t n, const char* where) {
  if (n > kMaxList) ill_formed(std::string(where) + ": list too long");
}

void check_str(const std::string& s, const char* where) {
  if (s.size() > kMaxList) ill_formed(std::string(where) + ": string too long");
}

void check_nas(const NasId& id) {
  if (id.kind == NasIdKind::Imsi && id.value > kMaxImsi) ill_formed("nas_id: IMSI exceeds 15 digits");
  if (id.kind == NasIdKind::Tmsi && id.value > 0xFFFFFFFFULL) ill_formed("nas_id: TMSI exceeds 32 bits");
  if (id.kind != NasIdKind::Imsi && id.kind != NasIdKind::Tmsi) ill_formed("nas_id: bad kind");
}

void check_policy(const policy::RrmPolicy& p) {
  check_list(p.l3.rules.size(), "rules");
  for (const auto& r : p.l3.rules) {
    if (!std::isfinite(r.value)) ill_formed("rule value not finite");
    check_list(r.match.pairs.size(), "match");
    for (const auto& pat : r.match.pairs) {
      if (pat.qci && *pat.qci < policy::kMinQci) ill_formed("match qci out of range");
      if (pat.arp && (*pat.arp < policy::kMinArp || *pat.arp > policy::kMaxArp))
        ill_formed("match arp out of range");
    }
  }
  if (auto share = p.l2.wrr_share(); share && !std::isfinite(*share)) ill_formed("share not finite");
  if (p.l1_opaque) check_list(p.l1_opaque->size(), "l1_opaque");
}

void check_template(const policy::RsiTemplate& t) {
  check_list(t.plmn_list.size(), "plmn_list");
  for (const auto& p : t.plmn_list) check_str(p, "plmn");
  check_list(t.snssai_list.size(), "snssai_list");
  for (const auto& s : t.snssai_list) {
    check_str(s.plmn_id, "snssai.plmn");
    if (s.sd && *s.sd > 0xFFFFFF) ill_formed("snssai.sd exceeds 24 bits");
  }
  check_list(t.cell_list.size(), "cell_list");
  check_policy(t.rrm_policy);
  check_list(t.nas_id_list.size(), "nas_id_list");
  for (const auto& n : t.nas_id_list) check_nas(n);
}

struct BodyChecker {
  void operator()(const HelloReq&) const {}
  void operator()(const HelloResp&) const {}
  void operator()(const CapsReq&) const {}
  void operator()(const UeReportReq&) const {}
  void operator()(const AddSliceResp&) const {}
  void operator()(const RemoveSliceReq&) const {}
  void operator()(const RemoveSliceResp&) const {}
  void operator()(const AcResp&) const {}
  void operator()(const SliceMeas&) const {}
  void operator()(const CapsResp& b) const { check_list(b.cells.size(), "cells"); }
  void operator()(const UeReportResp& b) const {
    check_list(b.ues.size(), "ues");
    for (const auto& ue : b.ues) {
      check_str(ue.plmn_id, "plmn_id");
      check_nas(ue.nas_id);
      check_list(ue.drbs.size(), "drbs");
      for (const auto& d : ue.drbs) check_qos(d.qos, "drb");
    }
  }
  void operator()(const AddSliceReq& b) const { check_template(b.tpl); }
  void operator()(const RanSliceReq& b) const {
    if (b.policy) check_policy(*b.policy);
  }
  void operator()(const RanSliceResp& b) const {
    check_list(b.slices.size(), "slices");
    for (const auto& s : b.slices) check_policy(s.policy);
  }
  void operator()(const AcReq& b) const {
    check_list(b.drbs.size(), "drbs");
    for (const auto& d : b.drbs) {
      if (d.count < 1 || d.count > 0xFFFF) ill_formed("AcReq: DRB count out of range");
      check_qos(d.qos, "AcReq");
    }
  }
};

// --- body encoding ------------------------------------------------------------

void put_qos(Writer& w, const policy::QosProfile& q) {
  w.u8(q.qci);
  w.u8(q.arp);
}

void put_policy(Writer& w, const policy::RrmPolicy& p) {
  w.u32(p.l3.averaging_window_ms);
  w.u16(static_cast<std::uint16_t>(p.l3.rules.size()));
  for (const auto& r : p.l3.rules) {
    w.u8(static_cast<std::uint8_t>(r.metric));
    w.u8(static_cast<std::uint8_t>(r.scope));
    w.u8(static_cast<std::uint8_t>(r.bound));
    w.f64(r.value);
    w.u16(static_cast<std::uint16_t>(r.match.pairs.size()));
    for (const auto& pat : r.match.pairs) {
      w.u8(pat.qci.value_or(0));
      w.u8(pat.arp.value_or(0));
    }
  }
  if (const auto* wrr = std::get_if<policy::InterSliceWrr>(&p.l2.inter_slice)) {
    w.u8(1);
    w.f64(wrr->share_percent);
  } else {
    w.u8(0);
  }
  w.u8(static_cast<std::uint8_t>(p.l2.intra_slice));
  w.boolean(p.l1_opaque.has_value());
  if (p.l1_opaque) {
    w.u16(static_cast<std::uint16_t>(p.l1_opaque->size()));
    w.bytes(*p.l1_opaque);
  }
}

void put_template(Writer& w, const policy::RsiTemplate& t) {
  w.u32(t.rsi_id);
  w.u16(static_cast<std::uint16_t>(t.plmn_list.size()));
  for (const auto& p : t.plmn_list) w.str(p);
  w.u16(static_cast<std::uint16_t>(t.snssai_list.size()));
  for (const auto& s : t.snssai_list) {
    w.str(s.plmn_id);
    w.u8(s.sst);
    w.boolean(s.sd.has_value());
    w.u32(s.sd.value_or(0));
  }
  w.u16(static_cast<std::uint16_t>(t.cell_list.size()));
  for (const auto& c : t.cell_list) {
    w.u64(c.enb_id);
    w.u16(c.cell_id);
  }
  put_policy(w, t.rrm_policy);
  w.u16(static_cast<std::uint16_t>(t.nas_id_list.size()));
  for (const auto& n : t.nas_id_list) {
    w.u8(static_cast<std::uint8_t>(n.kind));
    w.u64(n.value);
  }
}

struct BodyWriter {
  Writer& w;
  void operator()(const HelloReq&) const {}
  void operator()(const HelloResp&) const {}
  void operator()(const CapsReq&) const {}
  void operator()(const UeReportReq&) const {}
  void operator()(const CapsResp& b) const {
    w.u64(b.enb_id);
    w.u16(static_cast<std::uint16_t>(b.cells.size()));
    for (const auto& c : b.cells) {
      w.u16(c.cell_id);
      w.u32(c.dl_earfcn);
      w.u32(c.ul_earfcn);
      w.u16(c.n_prb);
    }
    w.boolean(b.slicing_supported);
  }
  void operator()(const UeReportResp& b) const {
    w.u16(static_cast<std::uint16_t>(b.ues.size()));
    for (const auto& ue : b.ues) {
      w.u16(ue.cell_id);
      w.str(ue.plmn_id);
      w.u8(static_cast<std::uint8_t>(ue.nas_id.kind));
      w.u64(ue.nas_id.value);
      w.u16(ue.rnti);
      w.boolean(ue.rsi_id.has_value());
      w.u32(ue.rsi_id.value_or(0));
      w.u16(static_cast<std::uint16_t>(ue.drbs.size()));
      for (const auto& d : ue.drbs) {
        w.u8(d.drb_id);
        put_qos(w, d.qos);
      }
    }
  }
  void operator()(const AddSliceReq& b) const {
    w.u32(b.rsi_id);
    put_template(w, b.tpl);
  }
  void operator()(const AddSliceResp& b) const { w.u32(b.rsi_id); }
  void operator()(const RemoveSliceReq& b) const { w.u32(b.rsi_id); }
  void operator()(const RemoveSliceResp& b) const { w.u32(b.rsi_id); }
  void operator()(const RanSliceReq& b) const {
    w.u32(b.rsi_id);
    w.boolean(b.policy.has_value());
    if (b.policy) put_policy(w, *b.policy);
    w.u8(b.active ? (*b.active ? 1 : 0) : 2);
  }
  void operator()(const RanSliceResp& b) const {
    w.u16(static_cast<std::uint16_t>(b.slices.size()));
    for (const auto& s : b.slices) {
      w.u32(s.rsi_id);
      put_policy(w, s.policy);
      w.boolean(s.active);
      w.u16(s.ue_count);
    }
  }
  void operator()(const AcReq& b) const {
    w.u16(b.rnti);
    w.u16(static_cast<std::uint16_t>(b.drbs.size()));
    for (const auto& d : b.drbs) {
      w.u16(static_cast<std::uint16_t>(d.count));
      put_qos(w, d.qos);
    }
  }
  void operator()(const AcResp& b) const {
    w.u16(b.rnti);
    w.boolean(b.accepted);
  }
  void operator()(const SliceMeas& b) const {
    w.u32(b.rsi_id);
    w.u32(b.dl_prb_assigned);
    w.u32(b.dl_prb_used);
    w.u32(b.ul_prb_assigned);
    w.u32(b.ul_prb_used);
    w.u32(b.interval_ms);
  }
};

// --- body decoding ------------------------------------------------------------

policy::QosProfile get_qos(Reader& r) {
  policy::QosProfile q;
  q.qci = r.u8();
  q.arp = r.u8();
  if (q.qci < policy::kMinQci || q.arp < policy::kMinArp || q.arp > policy::kMaxArp) r.fail();
  return q;
}

NasId get_nas(Reader& r) {
  NasId id;
  auto kind = r.u8();
  if (kind > 1) r.fail();
  id.kind = static_cast<NasIdKind>(kind);
  id.value = r.u64();
  if ((id.kind == NasIdKind::Imsi && id.value > kMaxImsi) ||
      (id.kind == NasIdKind::Tmsi && id.value > 0xFFFFFFFFULL))
    r.fail();
  return id;
}

policy::RrmPolicy get_policy(Reader& r) {
  policy::RrmPolicy p;
  p.l3.averaging_window_ms = r.u32();
  auto n = r.u16();
  for (std::uint16_t i = 0; i < n && r.ok(); ++i) {
    policy::CapacityRule rule;
    auto metric = r.u8();
    auto scope = r.u8();
    auto bound = r.u8();
    if (metric > 3 || scope > 1 || bound > 1) r.fail();
    rule.metric = static_cast<policy::Metric>(metric);
    rule.scope = static_cast<policy::Scope>(scope);
    rule.bound = static_cast<policy::Bound>(bound);
    rule.value = r.f64();
    if (!std::isfinite(rule.value)) r.fail();
    auto np = r.u16();
    rule.match.pairs.clear();
    for (std::uint16_t j = 0; j < np && r.ok(); ++j) {
      policy::QosPattern pat;
      auto qci = r.u8();
      auto arp = r.u8();
      if (qci != 0) pat.qci = qci;
      if (arp != 0) {
        if (arp > policy::kMaxArp) r.fail();
        pat.arp = arp;
      }
      rule.match.pairs.push_back(pat);
    }
    p.l3.rules.push_back(std::move(rule));
  }
  auto inter = r.u8();
  if (inter == 1) {
    policy::InterSliceWrr wrr;
    wrr.share_percent = r.f64();
    if (!std::isfinite(wrr.share_percent)) r.fail();
    p.l2.inter_slice = wrr;
  } else if (inter == 0) {
    p.l2.inter_slice = policy::InterSliceRr{};
  } else {
    r.fail();
  }
  auto intra = r.u8();
  if (intra > 2) r.fail();
  p.l2.intra_slice = static_cast<policy::IntraSlicePolicy>(intra);
  if (r.boolean()) {
    auto len = r.u16();
    p.l1_opaque = r.blob(len);
  }
  return p;
}

policy::RsiTemplate get_template(Reader& r) {
  policy::RsiTemplate t;
  t.rsi_id = r.u32();
  auto n = r.u16();
  for (std::uint16_t i = 0; i < n && r.ok(); ++i) t.plmn_list.push_back(r.str());
  n = r.u16();
  for (std::uint16_t i = 0; i < n && r.ok(); ++i) {
    policy::Snssai s;
    s.plmn_id = r.str();
    s.sst = r.u8();
    bool has_sd = r.boolean();
    auto sd = r.u32();
    if (has_sd) {
      if (sd > 0xFFFFFF) r.fail();
      s.sd = sd;
    } else if (sd != 0) {
      r.fail();
    }
    t.snssai_list.push_back(std::move(s));
  }
  n = r.u16();
  for (std::uint16_t i = 0; i < n && r.ok(); ++i) {
    CellRef c;
    c.enb_id = r.u64();
    c.cell_id = r.u16();
    t.cell_list.push_back(c);
  }
  t.rrm_policy = get_policy(r);
  n = r.u16();
  for (std::uint16_t i = 0; i < n && r.ok(); ++i) t.nas_id_list.push_back(get_nas(r));
  return t;
}

Body read_body(Action action, Reader& r) {
  switch (action) {
    case Action::HelloReq:
      return HelloReq{};
    case Action::HelloResp:
      return HelloResp{};
    case Action::CapsReq:
      return CapsReq{};
    case Action::UeReportReq:
      return UeReportReq{};
    case Action::CapsResp: {
      CapsResp b;
      b.enb_id = r.u64();
      auto n = r.u16();
      for (std::uint16_t i = 0; i < n && r.ok(); ++i) {
        CellCaps c;
        c.cell_id = r.u16();
        c.dl_earfcn = r.u32();
        c.ul_earfcn = r.u32();
        c.n_prb = r.u16();
        b.cells.push_back(c);
      }
      b.slicing_supported = r.boolean();
      return b;
    }
    case Action::UeReportResp: {
      UeReportResp b;
      auto n = r.u16();
      for (std::uint16_t i = 0; i < n && r.ok(); ++i) {
        UeRecord ue;
        ue.cell_id = r.u16();
        ue.plmn_id = r.str();
        ue.nas_id = get_nas(r);
        ue.rnti = r.u16();
        bool has_rsi = r.boolean();
        auto rsi = r.u32();
        if (has_rsi) {
          ue.rsi_id = rsi;
        } else if (rsi != 0) {
          r.fail();
        }
        auto nd = r.u16();
        for (std::uint16_t j = 0; j < nd && r.ok(); ++j) {
          DrbInfo d;
          d.drb_id = r.u8();
          d.qos = get_qos(r);
          ue.drbs.push_back(d);
        }
        b.ues.push_back(std::move(ue));
      }
      return b;
    }
    case Action::AddSliceReq: {
      AddSliceReq b;
      b.rsi_id = r.u32();
      b.tpl = get_template(r);
      return b;
    }
    case Action::AddSliceResp:
      return AddSliceResp{r.u32()};
    case Action::RemoveSliceReq:
      return RemoveSliceReq{r.u32()};
    case Action::RemoveSliceResp:
      return RemoveSliceResp{r.u32()};
    case Action::RanSliceReq: {
      RanSliceReq b;
      b.rsi_id = r.u32();
      if (r.boolean()) b.policy = get_policy(r);
      auto active = r.u8();
      if (active == 0 || active == 1) {
        b.active = active == 1;
      } else if (active != 2) {
        r.fail();
      }
      return b;
    }
    case Action::RanSliceResp: {
      RanSliceResp b;
      auto n = r.u16();
      for (std::uint16_t i = 0; i < n && r.ok(); ++i) {
        SliceStatus s;
        s.rsi_id = r.u32();
        s.policy = get_policy(r);
        s.active = r.boolean();
        s.ue_count = r.u16();
        b.slices.push_back(std::move(s));
      }
      return b;
    }
    case Action::AcReq: {
      AcReq b;
      b.rnti = r.u16();
      auto n = r.u16();
      for (std::uint16_t i = 0; i < n && r.ok(); ++i) {
        policy::DrbRequest d;
        d.count = r.u16();
        if (d.count == 0) r.fail();
        d.qos = get_qos(r);
        b.drbs.push_back(d);
      }
      return b;
    }
    case Action::AcResp: {
      AcResp b;
      b.rnti = r.u16();
      b.accepted = r.boolean();
      return b;
    }
    case Action::SliceMeas: {
      SliceMeas b;
      b.rsi_id = r.u32();
      b.dl_prb_assigned = r.u32();
      b.dl_prb_used = r.u32();
      b.ul_prb_assigned = r.u32();
      b.ul_prb_used = r.u32();
      b.interval_ms = r.u32();
      return b;
    }
  }
  r.fail();
  return HelloReq{};
}

bool valid_opkind(std::uint8_t v) { return v <= 4 || v == 255; }

}  // namespace

WireError::WireError(WireErrc code, const std::string& what)
    : std::runtime_error(to_string(code) + ": " + what), code_(code) {}

std::string to_string(WireErrc code) {
  switch (code) {
    case WireErrc::WellFormedness:
      return "WellFormedness";
    case WireErrc::Truncated:
      return "Truncated";
    case WireErrc::BadVersion:
      return "BadVersion";
    case WireErrc::UnknownAction:
      return "UnknownAction";
    case WireErrc::BodyMismatch:
      return "BodyMismatch";
    case WireErrc::Malformed:
      return "Malformed";
    case WireErrc::UnknownXid:
      return "UnknownXid";
    case WireErrc::NotAResponse:
      return "NotAResponse";
  }
  return "?";
}

void check_well_formed(const Message& msg) {
  if (msg.header.version != kProtocolVersion) ill_formed("unsupported version");
  if (static_cast<std::uint8_t>(msg.header.event_type) > 2) ill_formed("bad event type");
  if (msg.event.action != action_of(msg.body)) ill_formed("body does not match action");
  bool scheduled = msg.header.event_type == EventType::Scheduled;
  if (scheduled != (msg.event.period_ms > 0))
    ill_formed("period_ms must be nonzero exactly for Scheduled events");
  if (!valid_opkind(static_cast<std::uint8_t>(msg.event.opcode.kind))) ill_formed("bad opcode");
  if (msg.event.opcode.is_error() != (msg.event.opcode.error_code != 0))
    ill_formed("error code must be nonzero exactly for Error opcodes");
  std::visit(BodyChecker{}, msg.body);
}

std::vector<std::uint8_t> encode(const Message& msg) {
  check_well_formed(msg);
  Writer w;
  w.u8(msg.header.version);
  w.u8(static_cast<std::uint8_t>(msg.header.event_type));
  w.u32(0);  // length, patched below
  w.u64(msg.header.element_id);
  w.u16(msg.header.cell_id);
  w.u32(msg.header.xid);
  w.u32(msg.header.seq);
  w.u16(static_cast<std::uint16_t>(msg.event.action));
  w.u8(static_cast<std::uint8_t>(msg.event.opcode.kind));
  w.u16(msg.event.opcode.error_code);
  w.u32(msg.event.period_ms);
  std::visit(BodyWriter{w}, msg.body);
  if (w.size() > 0xFFFFFFFFULL) ill_formed("frame too large");
  w.patch_u32(2, static_cast<std::uint32_t>(w.size()));
  return w.take();
}

std::size_t encoded_length(const Message& msg) { return encode(msg).size(); }

std::optional<std::uint32_t> peek_frame_length(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 6) return std::nullopt;
  return (std::uint32_t{bytes[2]} << 24) | (std::uint32_t{bytes[3]} << 16) |
         (std::uint32_t{bytes[4]} << 8) | std::uint32_t{bytes[5]};
}

Decoded decode_frame(std::span<const std::uint8_t> bytes) {
  if (bytes.empty()) throw WireError(WireErrc::Truncated, "empty buffer");
  if (bytes[0] != kProtocolVersion)
    throw WireError(WireErrc::BadVersion, "version " + std::to_string(bytes[0]));
  auto length = peek_frame_length(bytes);
  if (!length) throw WireError(WireErrc::Truncated, "incomplete common header");
  if (*length < kHeaderSize) throw WireError(WireErrc::Malformed, "length below header size");
  if (bytes.size() < *length)
    throw WireError(WireErrc::Truncated,
                    "have " + std::to_string(bytes.size()) + " of " + std::to_string(*length) + " octets");

  Reader r(bytes.first(*length));
  Message msg;
  msg.header.version = r.u8();
  auto ev = r.u8();
  if (ev > 2) throw WireError(WireErrc::Malformed, "event type " + std::to_string(ev));
  msg.header.event_type = static_cast<EventType>(ev);
  r.u32();
  msg.header.element_id = r.u64();
  msg.header.cell_id = r.u16();
  msg.header.xid = r.u32();
  msg.header.seq = r.u32();
  auto action = r.u16();
  if (action < kMinAction || action > kMaxAction)
    throw WireError(WireErrc::UnknownAction, "action " + std::to_string(action));
  msg.event.action = static_cast<Action>(action);
  auto op = r.u8();
  if (!valid_opkind(op)) throw WireError(WireErrc::Malformed, "opcode " + std::to_string(op));
  msg.event.opcode.kind = static_cast<OpKind>(op);
  msg.event.opcode.error_code = r.u16();
  if (msg.event.opcode.is_error() != (msg.event.opcode.error_code != 0))
    throw WireError(WireErrc::Malformed, "error code inconsistent with opcode");
  msg.event.period_ms = r.u32();
  if ((msg.header.event_type == EventType::Scheduled) != (msg.event.period_ms > 0))
    throw WireError(WireErrc::Malformed, "period inconsistent with event type");

  msg.body = read_body(msg.event.action, r);
  if (!r.ok() || !r.at_end())
    throw WireError(WireErrc::BodyMismatch, "body does not decode as " + to_string(msg.event.action));
  return {std::move(msg), *length};
}

Message decode(std::span<const std::uint8_t> bytes) {
  auto d = decode_frame(bytes);
  if (d.consumed != bytes.size()) throw WireError(WireErrc::Malformed, "trailing octets after frame");
  return std::move(d.message);
}

void FrameSplitter::feed(std::span<const std::uint8_t> bytes) {
  if (head_ > 0 && head_ == buf_.size()) {
    buf_.clear();
    head_ = 0;
  }
  buf_.insert(buf_.end(), bytes.begin(), bytes.end());
}

std::optional<Message> FrameSplitter::next() {
  std::span<const std::uint8_t> avail(buf_.data() + head_, buf_.size() - head_);
  if (avail.empty()) return std::nullopt;
  if (avail[0] != kProtocolVersion) throw WireError(WireErrc::BadVersion, "stream version");
  auto len = peek_frame_length(avail);
  if (!len || avail.size() < *len) return std::nullopt;
  auto d = decode_frame(avail);
  head_ += d.consumed;
  if (head_ > 4096 && head_ * 2 > buf_.size()) {
    buf_.erase(buf_.begin(), buf_.begin() + static_cast<std::ptrdiff_t>(head_));
    head_ = 0;
  }
  return std::move(d.message);
}

}  // namespace ranslice::wire
