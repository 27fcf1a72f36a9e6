#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <set>
#include <sstream>

#include "doctest.h"

#include "random_wire.hpp"
#include "reference_wire.hpp"
#include "ranslice/wire/message.hpp"
#include "ranslice/wire/session.hpp"

using namespace ranslice;
using namespace ranslice::wire;
using ranslice::testing::MessageGen;

namespace {

std::filesystem::path golden_dir() { return std::filesystem::path(RANSLICE_SOURCE_DIR) / "testdata" / "wire"; }

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<Action> all_actions() {
  std::vector<Action> out;
  for (auto a = kMinAction; a <= kMaxAction; ++a) out.push_back(static_cast<Action>(a));
  return out;
}

WireErrc decode_error(std::span<const std::uint8_t> bytes) {
  try {
    decode(bytes);
  } catch (const WireError& e) {
    return e.code();
  }
  FAIL("decode unexpectedly succeeded");
  return WireErrc::Malformed;
}

}  // namespace

TEST_CASE("golden frames match the hand-laid reference bytes") {
  bool update = std::getenv("RANSLICE_UPDATE_GOLDEN") != nullptr;
  auto fixtures = testing::wire_fixtures();
  REQUIRE(fixtures.size() >= 15);
  std::set<Action> covered;
  for (const auto& f : fixtures) {
    CAPTURE(f.name);
    covered.insert(f.message.event.action);
    auto path = golden_dir() / (f.name + ".hex");
    if (update) {
      std::filesystem::create_directories(golden_dir());
      std::ofstream(path) << "# " << to_string(f.message.event.action) << "\n" << testing::to_hex_text(f.bytes);
    }
    REQUIRE(std::filesystem::exists(path));
    auto stored = testing::from_hex_text(slurp(path));
    CHECK(stored == f.bytes);
    CHECK(encode(f.message) == f.bytes);
    CHECK(decode(stored) == f.message);
  }
  CHECK(covered.size() == kMaxAction);
}

TEST_CASE("HelloReq golden header fields") {
  auto fixtures = testing::wire_fixtures();
  const auto& hello = fixtures.front();
  REQUIRE(hello.name == "hello_req");
  const auto& b = hello.bytes;
  REQUIRE(b.size() == kHeaderSize);
  CHECK(b[0] == 1);
  CHECK(b[1] == 1);
  CHECK(b[5] == kHeaderSize);
  CHECK(b[13] == 0x01);  // element_id low octet
  CHECK(b[19] == 7);     // xid
  CHECK(b[23] == 1);     // seq
  CHECK(b[25] == 1);     // action HelloReq
  CHECK(b[26] == 2);     // opcode Retrieve
  CHECK(b[32] == 0xd0);  // period 2000 low octet
  auto m = decode(b);
  CHECK(m.header.element_id == 0x1);
  CHECK(m.header.cell_id == 0);
  CHECK(m.header.xid == 7);
  CHECK(m.header.seq == 1);
  CHECK(m.event.period_ms == 2000);
}

TEST_CASE("AcResp accepted carries opcode Success") {
  auto m = make_message(EventType::Single, 0x1, 0, Opcode::success(), AcResp{0x47, true});
  auto d = decode(encode(m));
  CHECK(d.event.action == Action::AcResp);
  CHECK(d.event.opcode == Opcode::success());
  CHECK(std::get<AcResp>(d.body).rnti == 0x47);
  CHECK(std::get<AcResp>(d.body).accepted);
}

TEST_CASE("randomized round trips are lossless for every action") {
  MessageGen gen(20240901);
  for (auto action : all_actions()) {
    CAPTURE(to_string(action));
    for (int i = 0; i < 10000; ++i) {
      auto m = gen.message(action);
      auto bytes = encode(m);
      REQUIRE(peek_frame_length(bytes) == bytes.size());
      REQUIRE(encoded_length(m) == bytes.size());
      auto back = decode(bytes);
      REQUIRE(back == m);
    }
  }
}

TEST_CASE("decoder rejects bad version, truncation, unknown action, mismatched body") {
  MessageGen gen(7);
  auto bytes = encode(gen.message(Action::CapsResp));

  auto v2 = bytes;
  v2[0] = 2;
  CHECK(decode_error(v2) == WireErrc::BadVersion);

  for (std::size_t n = 0; n < bytes.size(); ++n)
    CHECK(decode_error(std::span(bytes).first(n)) == WireErrc::Truncated);

  for (std::uint16_t a : {std::uint16_t{0}, std::uint16_t{16}, std::uint16_t{0xFFFF}}) {
    auto u = bytes;
    u[24] = static_cast<std::uint8_t>(a >> 8);
    u[25] = static_cast<std::uint8_t>(a);
    CHECK(decode_error(u) == WireErrc::UnknownAction);
  }

  // SliceMeas body relabelled as AcResp: too long for the declared kind.
  auto meas = encode(make_message(EventType::Triggered, 1, 0, Opcode::success(), SliceMeas{1, 2, 3, 4, 5, 6}));
  meas[25] = static_cast<std::uint8_t>(Action::AcResp);
  CHECK(decode_error(meas) == WireErrc::BodyMismatch);

  auto trailing = bytes;
  trailing.push_back(0);
  CHECK(decode_error(trailing) == WireErrc::Malformed);
}

TEST_CASE("encoder refuses ill-formed messages") {
  auto m = make_message(EventType::Single, 1, 0, Opcode::success(), AcResp{1, true});
  auto wrong_action = m;
  wrong_action.event.action = Action::AcReq;
  CHECK_THROWS_AS(encode(wrong_action), WireError);

  auto period_on_single = m;
  period_on_single.event.period_ms = 10;
  CHECK_THROWS_AS(encode(period_on_single), WireError);

  auto scheduled_no_period = m;
  scheduled_no_period.header.event_type = EventType::Scheduled;
  CHECK_THROWS_AS(encode(scheduled_no_period), WireError);

  auto error_without_code = m;
  error_without_code.event.opcode = {OpKind::Error, 0};
  CHECK_THROWS_AS(encode(error_without_code), WireError);

  auto zero_drbs = make_message(EventType::Single, 1, 0, Opcode::of(OpKind::Create),
                                AcReq{0x47, {policy::DrbRequest{0, {7, 9}}}});
  CHECK_THROWS_AS(encode(zero_drbs), WireError);

  auto bad_imsi = make_message(EventType::Single, 1, 0, Opcode::success(),
                               UeReportResp{{UeRecord{0, "1", NasId{NasIdKind::Imsi, 1'000'000'000'000'000ULL}, 1, {}, {}}}});
  try {
    encode(bad_imsi);
    FAIL("expected WellFormedness");
  } catch (const WireError& e) {
    CHECK(e.code() == WireErrc::WellFormedness);
  }
}

TEST_CASE("fuzzed input never crashes the decoder") {
  MessageGen gen(99);
  std::mt19937_64 rng(3);
  std::uint64_t decoded = 0;
  for (int i = 0; i < 30000; ++i) {
    auto action = static_cast<Action>(1 + i % kMaxAction);
    auto bytes = encode(gen.message(action));
    switch (i % 4) {
      case 0:  // bit flips
        for (int k = 0; k < 3; ++k) bytes[rng() % bytes.size()] ^= static_cast<std::uint8_t>(1u << (rng() % 8));
        break;
      case 1:  // truncation with a patched length
        bytes.resize(rng() % bytes.size());
        break;
      case 2:  // random garbage after a valid header
        for (std::size_t k = kCommonHeaderSize; k < bytes.size(); ++k) bytes[k] = static_cast<std::uint8_t>(rng());
        break;
      case 3:  // random action and version octets
        bytes[0] = static_cast<std::uint8_t>(rng() % 3);
        bytes[25] = static_cast<std::uint8_t>(rng());
        break;
    }
    try {
      auto m = decode(bytes);
      ++decoded;
      // Whatever decodes is canonical: it re-encodes to the same octets.
      CHECK(encode(m) == bytes);
    } catch (const WireError&) {
    }
  }
  CHECK(decoded > 0);
}

TEST_CASE("concatenated frames split exactly regardless of chunking") {
  MessageGen gen(11);
  std::mt19937_64 rng(5);
  for (int round = 0; round < 200; ++round) {
    std::vector<Message> sent;
    std::vector<std::uint8_t> stream;
    auto k = 1 + rng() % 20;
    for (std::size_t i = 0; i < k; ++i) {
      sent.push_back(gen.message(static_cast<Action>(1 + rng() % kMaxAction)));
      auto b = encode(sent.back());
      stream.insert(stream.end(), b.begin(), b.end());
    }
    FrameSplitter splitter;
    std::vector<Message> got;
    std::size_t pos = 0;
    while (pos < stream.size()) {
      auto n = std::min<std::size_t>(1 + rng() % 64, stream.size() - pos);
      splitter.feed(std::span(stream).subspan(pos, n));
      pos += n;
      while (auto m = splitter.next()) got.push_back(std::move(*m));
    }
    REQUIRE(got.size() == sent.size());
    CHECK(got == sent);
    CHECK(splitter.buffered() == 0);
  }
}

TEST_CASE("decode_frame consumes one frame and leaves the rest") {
  auto a = encode(make_message(EventType::Single, 1, 0, Opcode::success(), AddSliceResp{4}));
  auto b = encode(make_message(EventType::Single, 1, 0, Opcode::success(), RemoveSliceResp{5}));
  auto both = a;
  both.insert(both.end(), b.begin(), b.end());
  auto d = decode_frame(both);
  CHECK(d.consumed == a.size());
  CHECK(std::get<AddSliceResp>(d.message.body).rsi_id == 4);
  auto rest = decode(std::span(both).subspan(d.consumed));
  CHECK(std::get<RemoveSliceResp>(rest.body).rsi_id == 5);
}

TEST_CASE("session sequence numbers") {
  Session s;
  CHECK(s.next_seq() == 1);
  CHECK(s.next_seq() == 2);
  CHECK(s.next_seq() == 3);

  Session a, b;
  for (std::uint32_t i = 1; i <= 3; ++i) {
    CHECK(a.next_seq() == i);
    CHECK(b.next_seq() == i);
  }

  Session wrap(0xFFFFFFFFu - 1);
  CHECK(wrap.next_seq() == 0xFFFFFFFFu);
  CHECK(wrap.next_seq() == 0);
  CHECK(wrap.next_seq() == 1);

  Session x;
  CHECK(x.next_xid() != 0);
  CHECK(x.next_xid() != x.next_xid());
}

TEST_CASE("stamped frames carry consecutive seq values") {
  Session s;
  std::vector<std::uint32_t> seen;
  for (int i = 0; i < 50; ++i) {
    auto m = make_message(EventType::Single, 1, 0, Opcode::of(OpKind::Retrieve), CapsReq{});
    auto frame = s.stamp_and_encode(m, true);
    auto d = decode(frame);
    CHECK(d.header.xid != 0);
    seen.push_back(d.header.seq);
  }
  Session peer;
  for (std::size_t i = 0; i < seen.size(); ++i) {
    CHECK(seen[i] == i + 1);
    CHECK(peer.observe_peer_seq(seen[i]));
  }
  CHECK_FALSE(peer.observe_peer_seq(seen.back() + 2));
}

TEST_CASE("response pairing by xid") {
  Session s;
  auto req = make_message(EventType::Single, 1, 0, Opcode::of(OpKind::Retrieve), CapsReq{});
  req.header.xid = 7;
  s.track(req);
  auto resp = make_message(EventType::Single, 1, 0, Opcode::success(), CapsResp{});
  resp.header.xid = 7;
  CHECK(s.pair_response(resp).event.action == Action::CapsReq);
  CHECK_FALSE(s.is_pending(7));

  // A duplicate reply finds nothing.
  try {
    s.pair_response(resp);
    FAIL("expected UnknownXid");
  } catch (const WireError& e) {
    CHECK(e.code() == WireErrc::UnknownXid);
  }

  auto r1 = req;
  r1.header.xid = 1;
  auto r2 = make_message(EventType::Single, 1, 0, Opcode::of(OpKind::Retrieve), UeReportReq{});
  r2.header.xid = 2;
  s.track(r1);
  s.track(r2);
  auto resp2 = make_message(EventType::Single, 1, 0, Opcode::success(), UeReportResp{});
  resp2.header.xid = 2;
  CHECK(s.pair_response(resp2).event.action == Action::UeReportReq);
  CHECK(s.is_pending(1));
  CHECK(s.pending_count() == 1);

  auto not_resp = r1;
  try {
    s.pair_response(not_resp);
    FAIL("expected NotAResponse");
  } catch (const WireError& e) {
    CHECK(e.code() == WireErrc::NotAResponse);
  }
}

TEST_CASE("request/response action pairing table") {
  CHECK(response_for(Action::HelloReq) == Action::HelloResp);
  CHECK(response_for(Action::AcReq) == Action::AcResp);
  CHECK_FALSE(response_for(Action::SliceMeas).has_value());
  CHECK(is_response(Action::RanSliceResp));
  CHECK_FALSE(is_response(Action::AddSliceReq));
}

TEST_CASE("dump renders action and body fields") {
  auto m = make_message(EventType::Single, 1, 0, Opcode::success(), AcResp{0x47, true});
  auto text = dump(m);
  CHECK(text.find("AcResp") != std::string::npos);
  CHECK(text.find("0x47") != std::string::npos);
}
