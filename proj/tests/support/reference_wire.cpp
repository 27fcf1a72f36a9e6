#include "reference_wire.hpp"

#include <bit>
#include <cctype>
#include <stdexcept>

namespace ranslice::testing {

using namespace ranslice::wire;

namespace {

class Buf {
 public:
  Buf& n(std::uint64_t v, int width) {
    for (int i = width - 1; i >= 0; --i) b.push_back(static_cast<std::uint8_t>((v >> (8 * i)) & 0xFF));
    return *this;
  }
  Buf& u8(std::uint64_t v) { return n(v, 1); }
  Buf& u16(std::uint64_t v) { return n(v, 2); }
  Buf& u32(std::uint64_t v) { return n(v, 4); }
  Buf& u64(std::uint64_t v) { return n(v, 8); }
  Buf& f64(double v) { return u64(std::bit_cast<std::uint64_t>(v)); }
  Buf& s(const std::string& text) {
    u16(text.size());
    for (char c : text) b.push_back(static_cast<std::uint8_t>(c));
    return *this;
  }

  std::vector<std::uint8_t> b;
};

struct Hdr {
  std::uint8_t event_type = 0;
  std::uint64_t element = 1;
  std::uint16_t cell = 0;
  std::uint32_t xid = 0;
  std::uint32_t seq = 0;
  std::uint16_t action = 0;
  std::uint8_t op = 0;
  std::uint16_t err = 0;
  std::uint32_t period = 0;
};

std::vector<std::uint8_t> frame(const Hdr& h, const Buf& body) {
  Buf f;
  f.u8(1).u8(h.event_type).u32(0).u64(h.element).u16(h.cell).u32(h.xid).u32(h.seq);
  f.u16(h.action).u8(h.op).u16(h.err).u32(h.period);
  f.b.insert(f.b.end(), body.b.begin(), body.b.end());
  auto len = f.b.size();
  f.b[2] = static_cast<std::uint8_t>(len >> 24);
  f.b[3] = static_cast<std::uint8_t>(len >> 16);
  f.b[4] = static_cast<std::uint8_t>(len >> 8);
  f.b[5] = static_cast<std::uint8_t>(len);
  return f.b;
}

Message msg(EventType type, std::uint32_t xid, std::uint32_t seq, Opcode op, Body body, std::uint32_t period = 0) {
  auto m = make_message(type, 0x1, 0, op, std::move(body), period);
  m.header.xid = xid;
  m.header.seq = seq;
  return m;
}

// Two rules (drb_count * cell min 1, drb_count * slice max 2), WRR share,
// RR intra, no L1 blob.
void section_v_policy(Buf& b, double share) {
  b.u32(1000).u16(2);
  b.u8(2).u8(0).u8(0).f64(1.0).u16(1).u8(0).u8(0);
  b.u8(2).u8(1).u8(1).f64(2.0).u16(1).u8(0).u8(0);
  b.u8(1).f64(share);
  b.u8(0);
  b.u8(0);
}

policy::RrmPolicy section_v_rrm(double share) {
  policy::RrmPolicy p;
  p.l3.averaging_window_ms = 1000;
  p.l3.rules = {
      {policy::Metric::DrbCount, policy::QosMatch::any(), policy::Scope::Cell, policy::Bound::Min, 1.0},
      {policy::Metric::DrbCount, policy::QosMatch::any(), policy::Scope::Slice, policy::Bound::Max, 2.0},
  };
  p.l2.inter_slice = policy::InterSliceWrr{share};
  p.l2.intra_slice = policy::IntraSlicePolicy::RR;
  return p;
}

constexpr std::uint64_t kImsi1 = 214910000000001ULL;
constexpr std::uint64_t kImsi2 = 214910000000002ULL;
constexpr std::uint64_t kImsi3 = 214910000000003ULL;

}  // namespace

policy::RsiTemplate section_v_template() {
  policy::RsiTemplate t;
  t.rsi_id = 1;
  t.plmn_list = {"21491"};
  t.snssai_list = {policy::Snssai{"21491", 1, std::nullopt}};
  t.cell_list = {CellRef{0x1, 0}};
  t.rrm_policy = section_v_rrm(100.0);
  t.nas_id_list = {NasId{NasIdKind::Imsi, kImsi1}, NasId{NasIdKind::Imsi, kImsi2}, NasId{NasIdKind::Imsi, kImsi3}};
  return t;
}

std::vector<WireFixture> wire_fixtures() {
  std::vector<WireFixture> out;
  auto add = [&](std::string name, Message m, const Hdr& h, const Buf& body) {
    out.push_back({std::move(name), std::move(m), frame(h, body)});
  };

  add("hello_req", msg(EventType::Scheduled, 7, 1, Opcode::of(OpKind::Retrieve), HelloReq{}, 2000),
      {.event_type = 1, .xid = 7, .seq = 1, .action = 1, .op = 2, .period = 2000}, Buf{});
  add("hello_resp", msg(EventType::Single, 7, 1, Opcode::success(), HelloResp{}),
      {.xid = 7, .seq = 1, .action = 2}, Buf{});
  add("caps_req", msg(EventType::Single, 1, 2, Opcode::of(OpKind::Retrieve), CapsReq{}),
      {.xid = 1, .seq = 2, .action = 3, .op = 2}, Buf{});

  {
    CapsResp b{0x1, {CellCaps{0, 3100, 21100, 50}}, true};
    Buf body;
    body.u64(0x1).u16(1).u16(0).u32(3100).u32(21100).u16(50).u8(1);
    add("caps_resp", msg(EventType::Single, 1, 2, Opcode::success(), b), {.xid = 1, .seq = 2, .action = 4}, body);
  }

  add("ue_report_req", msg(EventType::Single, 2, 3, Opcode::of(OpKind::Retrieve), UeReportReq{}),
      {.xid = 2, .seq = 3, .action = 5, .op = 2}, Buf{});

  {
    UeRecord ue;
    ue.cell_id = 0;
    ue.plmn_id = "21491";
    ue.nas_id = NasId{NasIdKind::Imsi, kImsi1};
    ue.rnti = 0x46;
    ue.rsi_id = 1;
    ue.drbs = {DrbInfo{1, policy::QosProfile{7, 9}}};
    UeRecord pending;
    pending.plmn_id = "21491";
    pending.nas_id = NasId{NasIdKind::Tmsi, 0x1a2b3c4d};
    pending.rnti = 0x47;
    Buf body;
    body.u16(2);
    body.u16(0).s("21491").u8(0).u64(kImsi1).u16(0x46).u8(1).u32(1).u16(1).u8(1).u8(7).u8(9);
    body.u16(0).s("21491").u8(1).u64(0x1a2b3c4d).u16(0x47).u8(0).u32(0).u16(0);
    add("ue_report_resp", msg(EventType::Triggered, 0, 9, Opcode::success(), UeReportResp{{ue, pending}}),
        {.event_type = 2, .seq = 9, .action = 6}, body);
  }

  {
    Buf body;
    body.u32(1);
    body.u32(1).u16(1).s("21491");
    body.u16(1).s("21491").u8(1).u8(0).u32(0);
    body.u16(1).u64(0x1).u16(0);
    section_v_policy(body, 100.0);
    body.u16(3).u8(0).u64(kImsi1).u8(0).u64(kImsi2).u8(0).u64(kImsi3);
    add("add_slice_req",
        msg(EventType::Single, 3, 4, Opcode::of(OpKind::Create), AddSliceReq{1, section_v_template()}),
        {.xid = 3, .seq = 4, .action = 7, .op = 1}, body);
  }

  {
    Buf body;
    body.u32(1);
    add("add_slice_resp", msg(EventType::Single, 3, 4, Opcode::success(), AddSliceResp{1}),
        {.xid = 3, .seq = 4, .action = 8}, body);
    add("add_slice_resp_duplicate",
        msg(EventType::Single, 3, 4, Opcode::error(AgentErrc::DuplicateSlice), AddSliceResp{1}),
        {.xid = 3, .seq = 4, .action = 8, .op = 255, .err = 1}, body);
    add("remove_slice_req", msg(EventType::Single, 8, 10, Opcode::of(OpKind::Delete), RemoveSliceReq{1}),
        {.xid = 8, .seq = 10, .action = 9, .op = 4}, body);
    add("remove_slice_resp", msg(EventType::Single, 8, 12, Opcode::success(), RemoveSliceResp{1}),
        {.xid = 8, .seq = 12, .action = 10}, body);
  }

  {
    RanSliceReq b{1, section_v_rrm(60.0), std::nullopt};
    Buf body;
    body.u32(1).u8(1);
    section_v_policy(body, 60.0);
    body.u8(2);
    add("ran_slice_req_update", msg(EventType::Single, 5, 6, Opcode::of(OpKind::Update), b),
        {.xid = 5, .seq = 6, .action = 11, .op = 3}, body);
  }
  {
    Buf body;
    body.u32(1).u8(0).u8(1);
    add("ran_slice_req_activate", msg(EventType::Single, 4, 5, Opcode::of(OpKind::Update), RanSliceReq{1, std::nullopt, true}),
        {.xid = 4, .seq = 5, .action = 11, .op = 3}, body);
  }
  {
    RanSliceResp b{{SliceStatus{1, section_v_rrm(60.0), true, 2}}};
    policy::RrmPolicy blob;
    blob.l3.averaging_window_ms = 500;
    blob.l3.rules = {{policy::Metric::RadioLoadPercent,
                      policy::QosMatch{{policy::QosPattern{7, std::nullopt}, policy::QosPattern{std::nullopt, 9}}},
                      policy::Scope::Cell, policy::Bound::Max, 40.0}};
    blob.l2.inter_slice = policy::InterSliceRr{};
    blob.l2.intra_slice = policy::IntraSlicePolicy::PF;
    blob.l1_opaque = std::vector<std::uint8_t>{0xde, 0xad};
    b.slices.push_back(SliceStatus{2, blob, false, 0});
    Buf body;
    body.u16(2);
    body.u32(1);
    section_v_policy(body, 60.0);
    body.u8(1).u16(2);
    body.u32(2);
    body.u32(500).u16(1).u8(0).u8(0).u8(1).f64(40.0).u16(2).u8(7).u8(0).u8(0).u8(9);
    body.u8(0).u8(1).u8(1).u16(2).u8(0xde).u8(0xad);
    body.u8(0).u16(0);
    add("ran_slice_resp", msg(EventType::Single, 5, 7, Opcode::success(), b), {.xid = 5, .seq = 7, .action = 12}, body);
  }
  {
    Buf body;
    body.u16(0x47).u16(1).u16(1).u8(7).u8(9);
    add("ac_req",
        msg(EventType::Triggered, 6, 11, Opcode::of(OpKind::Create), AcReq{0x47, {policy::DrbRequest{1, {7, 9}}}}),
        {.event_type = 2, .xid = 6, .seq = 11, .action = 13, .op = 1}, body);
  }
  {
    Buf body;
    body.u16(0x47).u8(1);
    add("ac_resp", msg(EventType::Single, 6, 13, Opcode::success(), AcResp{0x47, true}),
        {.xid = 6, .seq = 13, .action = 14}, body);
  }
  {
    Buf body;
    body.u32(1).u32(50000).u32(1745).u32(0).u32(0).u32(1000);
    add("slice_meas", msg(EventType::Triggered, 0, 20, Opcode::success(), SliceMeas{1, 50000, 1745, 0, 0, 1000}),
        {.event_type = 2, .seq = 20, .action = 15}, body);
  }
  return out;
}

std::string to_hex_text(const std::vector<std::uint8_t>& bytes) {
  static const char* digits = "0123456789abcdef";
  std::string out;
  for (std::size_t i = 0; i < bytes.size(); ++i) {
    out += digits[bytes[i] >> 4];
    out += digits[bytes[i] & 0xF];
    out += (i % 16 == 15 || i + 1 == bytes.size()) ? '\n' : ' ';
  }
  return out;
}

std::vector<std::uint8_t> from_hex_text(const std::string& text) {
  std::vector<std::uint8_t> out;
  int pending = -1;
  bool comment = false;
  for (char c : text) {
    if (comment) {
      comment = c != '\n';
      continue;
    }
    if (c == '#') {
      comment = true;
      continue;
    }
    if (std::isspace(static_cast<unsigned char>(c))) continue;
    if (!std::isxdigit(static_cast<unsigned char>(c))) throw std::invalid_argument("bad hex digit");
    int v = std::isdigit(static_cast<unsigned char>(c)) ? c - '0' : (std::tolower(c) - 'a' + 10);
    if (pending < 0) {
      pending = v;
    } else {
      out.push_back(static_cast<std::uint8_t>(pending * 16 + v));
      pending = -1;
    }
  }
  if (pending >= 0) throw std::invalid_argument("odd number of hex digits");
  return out;
}

}  // namespace ranslice::testing
