#include <arpa/inet.h>
#include <netinet/in.h>
#include <sys/socket.h>
#include <unistd.h>

#include <chrono>
#include <thread>

#include "doctest.h"
#include "httplib.h"

#include "reference_wire.hpp"
#include "ranslice/controller/rest.hpp"
#include "ranslice/controller/serve.hpp"
#include "ranslice/policy/document.hpp"
#include "ranslice/sim/world.hpp"

using namespace ranslice;
using namespace ranslice::controller;
using nlohmann::json;

namespace {

sim::ScenarioSpec one_enb() {
  auto s = *sim::builtin_spec("section-v");
  s.latency = sim::LatencyProfile::zero_jitter();
  s.slices.clear();
  s.ues.clear();
  s.duration_ms = 600000;
  return s;
}

struct Fixture {
  sim::World world{one_enb()};
  RestApi api{world.controller(), "sekrit"};

  Fixture() { world.advance(500); }

  RestResponse call(const std::string& method, const std::string& path, const std::string& body = {},
                    std::map<std::string, std::string> query = {}) {
    return api.handle({method, path, std::move(query), body, "Bearer sekrit"});
  }
  std::string tpl_doc(RsiId id, double share = 40) {
    auto t = testing::section_v_template();
    t.rsi_id = id;
    t.rrm_policy.l2.inter_slice = policy::InterSliceWrr{share};
    return policy::template_to_json(t).dump();
  }
};

}  // namespace

TEST_CASE("REST: authentication") {
  Fixture f;
  CHECK(f.api.handle({"GET", "/enbs", {}, "", ""}).status == 401);
  CHECK(f.api.handle({"GET", "/enbs", {}, "", "Bearer nope"}).status == 401);
  CHECK(f.call("GET", "/enbs").status == 200);
  RestApi open(f.world.controller(), "");
  CHECK(open.handle({"GET", "/enbs", {}, "", ""}).status == 200);
}

TEST_CASE("REST: eNB whitelist") {
  Fixture f;
  auto list = f.call("GET", "/enbs");
  REQUIRE(list.body.size() == 1);
  CHECK(list.body[0]["enb_id"] == "0x1");
  CHECK(list.body[0]["state"] == "synced");
  CHECK(list.body[0]["cells"][0]["n_prb"] == 50);

  auto add = f.call("POST", "/enbs", R"({"enb_id": "0x2"})");
  CHECK(add.status == 201);
  CHECK(add.body["state"] == "registered");
  auto again = f.call("POST", "/enbs", R"({"enb_id": 2})");
  CHECK(again.status == 409);
  CHECK(again.body["code"] == "AlreadyRegistered");
  CHECK(f.call("POST", "/enbs", R"({"enb_id": "two"})").body["field"] == "enb_id");
  CHECK(f.call("POST", "/enbs", R"({})").status == 400);
  CHECK(f.call("POST", "/enbs", "{nope").status == 400);
}

TEST_CASE("REST: slice lifecycle") {
  Fixture f;
  auto created = f.call("POST", "/slices", f.tpl_doc(1));
  REQUIRE(created.status == 202);
  auto job = created.body["job_id"].get<JobId>();
  CHECK(f.call("GET", "/jobs/" + std::to_string(job)).body["state"] == "pending");
  f.world.advance(1000);
  auto done = f.call("GET", "/jobs/" + std::to_string(job));
  CHECK(done.body["state"] == "succeeded");
  CHECK(done.body["kind"] == "commission");

  auto one = f.call("GET", "/slices/1");
  CHECK(one.status == 200);
  CHECK(one.body["state"] == "active");
  CHECK(one.body["cells"][0]["status"] == "acked");
  CHECK(f.call("GET", "/slices").body.size() == 1);

  auto dup = f.call("POST", "/slices", f.tpl_doc(1));
  CHECK(dup.status == 400);
  CHECK(dup.body["field"] == "rsi_id");
  auto over = f.call("POST", "/slices", f.tpl_doc(2, 70));
  CHECK(over.status == 400);
  CHECK(over.body["code"] == "ValidationFailed");

  auto pol = testing::section_v_template().rrm_policy;
  pol.l2.intra_slice = policy::IntraSlicePolicy::MaxCI;
  auto upd = f.call("PUT", "/slices/1", json{{"rrm_policy", policy::policy_to_json(pol)}}.dump());
  REQUIRE(upd.status == 202);
  f.world.advance(1500);
  CHECK(f.call("GET", "/jobs/" + std::to_string(upd.body["job_id"].get<JobId>())).body["state"] == "succeeded");
  CHECK(f.world.enb(1).slices().at(1).tpl.rrm_policy.l2.intra_slice == policy::IntraSlicePolicy::MaxCI);
  CHECK(f.call("PUT", "/slices/1", R"({"policy": {}})").body["field"] == "rrm_policy");

  CHECK(f.call("POST", "/slices/1/activate").status == 409);
  auto deact = f.call("POST", "/slices/1/deactivate");
  CHECK(deact.status == 200);
  CHECK(deact.body["state"] == "deactivated");
  CHECK(f.call("POST", "/slices/1/activate").body["state"] == "active");

  f.world.advance(3100);
  auto meas = f.call("GET", "/slices/1/measurements");
  CHECK(meas.status == 200);
  CHECK(meas.body.size() >= 2);
  auto since = f.call("GET", "/slices/1/measurements", "", {{"since", "3000"}});
  CHECK(since.body.size() < meas.body.size());
  CHECK(f.call("GET", "/slices/1/measurements", "", {{"since", "soon"}}).status == 400);

  auto del = f.call("DELETE", "/slices/1");
  CHECK(del.status == 202);
  f.world.advance(3500);
  CHECK(f.call("GET", "/slices/1").body["state"] == "decommissioned");
  CHECK(f.call("DELETE", "/slices/1").status == 404);
  CHECK(f.world.enb(1).slices().empty());
}

TEST_CASE("REST: unknown things") {
  Fixture f;
  CHECK(f.call("GET", "/slices/9").status == 404);
  CHECK(f.call("GET", "/slices/abc").status == 404);
  CHECK(f.call("GET", "/slices/9/measurements").status == 404);
  CHECK(f.call("POST", "/slices/9/activate").status == 404);
  CHECK(f.call("GET", "/jobs/77").status == 404);
  CHECK(f.call("GET", "/nowhere").body["code"] == "NotFound");
  CHECK(f.call("PATCH", "/slices").status == 404);
  CHECK(f.call("GET", "/ues").body.is_array());
}

TEST_CASE("REST: commissioning on an unsynced eNB conflicts") {
  Fixture f;
  f.call("POST", "/enbs", R"({"enb_id": "0x2"})");
  auto t = testing::section_v_template();
  t.cell_list = {CellRef{2, 0}};
  auto r = f.call("POST", "/slices", policy::template_to_json(t).dump());
  CHECK(r.status == 409);
  CHECK(r.body["code"] == "NotSynced");
}

// --- real sockets ----------------------------------------------------------------

namespace {

int connect_tcp(std::uint16_t port) {
  int fd = ::socket(AF_INET, SOCK_STREAM, 0);
  REQUIRE(fd >= 0);
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_port = htons(port);
  ::inet_pton(AF_INET, "127.0.0.1", &addr.sin_addr);
  REQUIRE(::connect(fd, reinterpret_cast<sockaddr*>(&addr), sizeof addr) == 0);
  timeval tv{5, 0};
  ::setsockopt(fd, SOL_SOCKET, SO_RCVTIMEO, &tv, sizeof tv);
  return fd;
}

std::optional<wire::Message> read_message(int fd, wire::FrameSplitter& splitter) {
  while (true) {
    if (auto m = splitter.next()) return m;
    std::uint8_t buf[4096];
    auto n = ::recv(fd, buf, sizeof buf, 0);
    if (n <= 0) return std::nullopt;
    splitter.feed(std::span<const std::uint8_t>(buf, static_cast<std::size_t>(n)));
  }
}

}  // namespace

TEST_CASE("server: REST over HTTP and the agent handshake over TCP") {
  ServeOptions opt;
  opt.agent_port = 0;
  opt.rest_port = 0;
  opt.token = "t0k";
  opt.enbs = {1};
  Server server(opt);
  server.start();
  REQUIRE(server.rest_port() != 0);
  REQUIRE(server.agent_port() != 0);

  httplib::Client cli("127.0.0.1", server.rest_port());
  cli.set_connection_timeout(5);
  auto unauth = cli.Get("/enbs");
  REQUIRE(unauth);
  CHECK(unauth->status == 401);
  httplib::Headers auth{{"Authorization", "Bearer t0k"}};
  auto list = cli.Get("/enbs", auth);
  REQUIRE(list);
  CHECK(list->status == 200);
  CHECK(json::parse(list->body)[0]["state"] == "registered");
  auto add = cli.Post("/enbs", auth, R"({"enb_id": 5})", "application/json");
  REQUIRE(add);
  CHECK(add->status == 201);

  int fd = connect_tcp(server.agent_port());
  wire::Session session;
  auto hello = wire::make_message(wire::EventType::Scheduled, 1, 0, wire::Opcode::of(wire::OpKind::Retrieve),
                                  wire::HelloReq{}, 2000);
  auto frame = session.stamp_and_encode(hello, true);
  REQUIRE(::send(fd, frame.data(), frame.size(), 0) == static_cast<ssize_t>(frame.size()));
  wire::FrameSplitter splitter;
  std::vector<wire::Action> got;
  for (int i = 0; i < 3; ++i) {
    auto m = read_message(fd, splitter);
    REQUIRE(m);
    got.push_back(m->event.action);
  }
  CHECK(got == std::vector<wire::Action>{wire::Action::HelloResp, wire::Action::CapsReq, wire::Action::UeReportReq});
  CHECK(server.call([](Controller& c) { return c.enbs().at(1).state; }) == EnbState::Connected);
  ::close(fd);

  // The controller notices the closed socket.
  for (int i = 0; i < 100 && server.call([](Controller& c) { return c.enbs().at(1).conn.has_value(); }); ++i)
    std::this_thread::sleep_for(std::chrono::milliseconds(20));
  CHECK(server.call([](Controller& c) { return c.enbs().at(1).state; }) == EnbState::Registered);
  server.stop();
}
