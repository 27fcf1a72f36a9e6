// ranslice: scenario runner, trace tools and REST client for the controller.

#include <pthread.h>

#include <csignal>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "httplib.h"
#include "json.hpp"

#include "ranslice/controller/rest.hpp"
#include "ranslice/controller/serve.hpp"
#include "ranslice/policy/document.hpp"
#include "ranslice/sim/world.hpp"
#include "ranslice/wire/message.hpp"

namespace fs = std::filesystem;
using namespace ranslice;
using nlohmann::json;

namespace {

constexpr int kOk = 0;
constexpr int kFailure = 1;
constexpr int kInvalid = 2;

struct InvalidInput : std::runtime_error {
  using std::runtime_error::runtime_error;
};

sim::ScenarioSpec resolve_spec(const std::string& arg) {
  if (!fs::exists(arg))
    if (auto b = sim::builtin_spec(arg)) return *b;
  return sim::load_spec(arg);
}

std::string ms(const std::optional<Millis>& v) { return v ? std::to_string(*v) + " ms" : "-"; }

void print_outcomes(const sim::RunReport& r) {
  std::printf("%-6s %-22s %-9s %-12s %5s %10s %13s %12s\n", "UE", "NAS id", "outcome", "path", "AcReq", "RRC setup",
              "registration", "AC exchange");
  for (const auto& o : r.ues)
    std::printf("%-6s %-22s %-9s %-12s %5u %10s %13s %12s\n", o.label.c_str(), o.nas_id.to_string().c_str(),
                sim::to_string(o.outcome).c_str(), enb::to_string(o.path).c_str(), o.ac_requests,
                ms(o.rrc_setup_ms()).c_str(), ms(o.registration_ms()).c_str(), ms(o.ac_exchange_ms()).c_str());
  for (const auto& e : r.errors) std::fprintf(stderr, "error: %s\n", e.c_str());
}

void write_report(const std::string& path, const nlohmann::ordered_json& doc) {
  if (path.empty()) return;
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << doc.dump(2) << '\n';
}

struct RunArgs {
  std::string spec;
  std::string out;
  std::string wire_log;
  std::string events;
  std::string trace;
  std::optional<std::uint64_t> seed;
  std::string latency;
};

void add_run_flags(CLI::App* cmd, RunArgs& a) {
  cmd->add_option("--out", a.out, "Write the JSON report here");
  cmd->add_option("--wire-log", a.wire_log, "Write every control frame (hex, one per line)");
  cmd->add_option("--events", a.events, "Write the signalling event log (JSON lines)");
  cmd->add_option("--trace", a.trace, "Write the per-TTI allocation trace (CSV)");
  cmd->add_option("--seed", a.seed, "Override the scenario seed");
  cmd->add_option("--latency", a.latency, "Override the latency profile (paper-calibrated, zero-jitter)");
}

int do_run(sim::ScenarioSpec spec, const RunArgs& a) {
  if (a.seed) spec.seed = *a.seed;
  if (!a.latency.empty()) {
    auto p = sim::LatencyProfile::named(a.latency);
    if (!p) throw InvalidInput("unknown latency profile '" + a.latency + "'");
    spec.latency = *p;
  }
  sim::RunOptions opts;
  opts.wire_log_path = a.wire_log;
  opts.event_log_path = a.events;
  opts.trace_path = a.trace;
  auto report = sim::run(spec, opts);
  print_outcomes(report);
  write_report(a.out, sim::report_to_json(report));
  return report.ok() ? kOk : kFailure;
}

// --- REST client ---------------------------------------------------------------

struct Client {
  std::string url = "http://127.0.0.1:8080";

  int request(const std::string& method, const std::string& path, const std::string& body = {}) const {
    httplib::Client cli(url);
    cli.set_connection_timeout(5);
    httplib::Headers headers;
    if (const char* token = std::getenv(controller::kTokenEnv)) headers.emplace("Authorization", std::string("Bearer ") + token);
    httplib::Result res;
    if (method == "GET")
      res = cli.Get(path, headers);
    else if (method == "POST")
      res = cli.Post(path, headers, body, "application/json");
    else if (method == "PUT")
      res = cli.Put(path, headers, body, "application/json");
    else
      res = cli.Delete(path, headers);
    if (!res) {
      std::fprintf(stderr, "error: cannot reach controller at %s (%s)\n", url.c_str(), httplib::to_string(res.error()).c_str());
      return kFailure;
    }
    json doc = json::parse(res->body, nullptr, false);
    if (res->status >= 300) {
      if (doc.is_object() && doc.contains("code")) {
        std::string field = doc.value("field", std::string());
        std::fprintf(stderr, "error: %s: %s%s\n", doc.value("code", std::string()).c_str(),
                     doc.value("message", std::string()).c_str(), field.empty() ? "" : (" (field " + field + ")").c_str());
      } else {
        std::fprintf(stderr, "error: HTTP %d\n", res->status);
      }
      return kFailure;
    }
    std::cout << (doc.is_discarded() ? res->body : doc.dump(2)) << '\n';
    return kOk;
  }
};

std::string read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot read " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  auto doc = json::parse(ss.str(), nullptr, false);
  if (doc.is_discarded()) throw InvalidInput(path + " is not valid JSON");
  return doc.dump();
}

// --- trace-dump ----------------------------------------------------------------

int trace_dump(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot read " + path);
  std::string line;
  std::size_t lineno = 0;
  int status = kOk;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    std::vector<std::string> tok;
    for (std::string t; ls >> t;) tok.push_back(t);
    if (tok.empty()) continue;
    const auto& hex = tok.back();
    std::vector<std::uint8_t> bytes;
    bool ok = hex.size() % 2 == 0;
    for (std::size_t i = 0; ok && i < hex.size(); i += 2) {
      auto nib = [](char c) -> int {
        if (c >= '0' && c <= '9') return c - '0';
        if (c >= 'a' && c <= 'f') return c - 'a' + 10;
        if (c >= 'A' && c <= 'F') return c - 'A' + 10;
        return -1;
      };
      int hi = nib(hex[i]), lo = nib(hex[i + 1]);
      if (hi < 0 || lo < 0) ok = false;
      bytes.push_back(static_cast<std::uint8_t>(hi * 16 + lo));
    }
    std::string prefix;
    for (std::size_t i = 0; i + 1 < tok.size(); ++i) prefix += (i ? " " : "") + tok[i];
    if (!prefix.empty()) std::cout << "# " << prefix << '\n';
    if (!ok) {
      std::cout << "line " << lineno << ": not a hex frame\n\n";
      status = kFailure;
      continue;
    }
    try {
      std::cout << wire::dump(wire::decode(bytes)) << '\n';
    } catch (const wire::WireError& e) {
      std::cout << "line " << lineno << ": " << wire::to_string(e.code()) << ": " << e.what() << "\n\n";
      status = kFailure;
    }
  }
  return status;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"RAN slicing controller, eNB simulator and scenario runner"};
  app.require_subcommand(1);
  Client client;
  app.add_option("--controller", client.url, "Controller REST base URL for client commands")
      ->envname("RANSLICE_CONTROLLER");

  RunArgs run_args;
  auto* run = app.add_subcommand("run", "Run a scenario file (or a built-in scenario name)");
  run->add_option("spec", run_args.spec, "Scenario file")->required();
  add_run_flags(run, run_args);

  RunArgs replay_args;
  bool noslice = false;
  auto* replay = app.add_subcommand("replay-paper", "Run the built-in three-UE admission scenario");
  add_run_flags(replay, replay_args);
  replay->add_flag("--no-slicing", noslice, "Run the same UEs with slicing disabled");

  std::string repeat_spec;
  std::size_t repeat_n = 10;
  std::string repeat_out;
  std::string repeat_latency;
  auto* rep = app.add_subcommand("repeat", "Run a scenario n times with derived seeds and summarize timings");
  rep->add_option("spec", repeat_spec, "Scenario file or built-in name")->required();
  rep->add_option("-n,--runs", repeat_n, "Number of runs")->check(CLI::PositiveNumber);
  rep->add_option("--out", repeat_out, "Write the JSON summary here");
  rep->add_option("--latency", repeat_latency, "Override the latency profile");

  auto* slice = app.add_subcommand("slice", "Manage slices on a running controller");
  slice->require_subcommand(1);
  std::string slice_file;
  RsiId slice_id = 0;
  auto* slice_add = slice->add_subcommand("add", "Commission a slice from a template document");
  slice_add->add_option("template", slice_file)->required();
  auto* slice_update = slice->add_subcommand("update", "Replace a slice's RRM policy");
  slice_update->add_option("rsi", slice_id)->required();
  slice_update->add_option("document", slice_file, "Template or {\"rrm_policy\": ...}")->required();
  auto* slice_delete = slice->add_subcommand("delete", "Decommission a slice");
  slice_delete->add_option("rsi", slice_id)->required();
  auto* slice_list = slice->add_subcommand("list", "List slices");
  auto* slice_show = slice->add_subcommand("show", "Show one slice");
  slice_show->add_option("rsi", slice_id)->required();
  auto* slice_act = slice->add_subcommand("activate", "Activate a deactivated slice");
  slice_act->add_option("rsi", slice_id)->required();
  auto* slice_deact = slice->add_subcommand("deactivate", "Deactivate an active slice");
  slice_deact->add_option("rsi", slice_id)->required();

  auto* enb_cmd = app.add_subcommand("enb", "Manage the eNB whitelist");
  enb_cmd->require_subcommand(1);
  std::string enb_id;
  auto* enb_add = enb_cmd->add_subcommand("add", "Whitelist an eNB");
  enb_add->add_option("enb_id", enb_id)->required();
  auto* enb_list = enb_cmd->add_subcommand("list", "List eNBs and their state");

  RsiId meas_rsi = 0;
  Millis meas_since = 0;
  auto* meas = app.add_subcommand("measurements", "Slice measurement history");
  meas->add_option("rsi", meas_rsi)->required();
  meas->add_option("--since", meas_since, "Only records at or after this controller time (ms)");

  auto* ues = app.add_subcommand("ues", "UE inventory");

  controller::ServeOptions serve_opts;
  std::vector<std::string> serve_enbs;
  auto* serve = app.add_subcommand("serve", "Run the controller standalone on real sockets");
  serve->add_option("--bind", serve_opts.bind, "Listen address");
  serve->add_option("--agent-port", serve_opts.agent_port, "Agent (southbound) TCP port");
  serve->add_option("--rest-port", serve_opts.rest_port, "REST port");
  serve->add_option("--journal", serve_opts.config.journal_path, "State journal file");
  serve->add_option("--enb", serve_enbs, "Whitelist an eNB at startup (repeatable)");

  std::string dump_file;
  auto* dump = app.add_subcommand("trace-dump", "Render frames from a wire log");
  dump->add_option("wire_log", dump_file)->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) return do_run(resolve_spec(run_args.spec), run_args);
    if (*replay) return do_run(*sim::builtin_spec(noslice ? "section-v-noslice" : "section-v"), replay_args);
    if (*rep) {
      auto spec = resolve_spec(repeat_spec);
      if (!repeat_latency.empty()) {
        auto p = sim::LatencyProfile::named(repeat_latency);
        if (!p) throw InvalidInput("unknown latency profile '" + repeat_latency + "'");
        spec.latency = *p;
      }
      auto r = sim::repeat(spec, repeat_n);
      std::printf("%s, %zu runs\n", r.scenario.c_str(), r.runs);
      std::printf("%-26s %-12s %10s %10s %4s\n", "stage", "path", "mean (ms)", "sd (ms)", "n");
      auto rows = [](const char* stage, const std::map<std::string, sim::StageStats>& m) {
        for (const auto& [g, s] : m) std::printf("%-26s %-12s %10.1f %10.1f %4zu\n", stage, g.c_str(), s.mean, s.stddev, s.n);
      };
      rows("RRC connection setup", r.rrc_setup);
      rows("network registration", r.registration);
      rows("AC exchange", r.ac_exchange);
      if (!r.outcomes_stable) std::fprintf(stderr, "warning: admission outcomes differ between runs\n");
      for (const auto& e : r.errors) std::fprintf(stderr, "error: %s\n", e.c_str());
      write_report(repeat_out, sim::repeat_to_json(r));
      return r.errors.empty() ? kOk : kFailure;
    }
    if (*slice) {
      if (*slice_add) return client.request("POST", "/slices", read_json_file(slice_file));
      if (*slice_update) {
        auto doc = json::parse(read_json_file(slice_file));
        json body = {{"rrm_policy", doc.contains("rrm_policy") ? doc.at("rrm_policy") : doc}};
        return client.request("PUT", "/slices/" + std::to_string(slice_id), body.dump());
      }
      if (*slice_delete) return client.request("DELETE", "/slices/" + std::to_string(slice_id));
      if (*slice_list) return client.request("GET", "/slices");
      if (*slice_show) return client.request("GET", "/slices/" + std::to_string(slice_id));
      if (*slice_act) return client.request("POST", "/slices/" + std::to_string(slice_id) + "/activate");
      if (*slice_deact) return client.request("POST", "/slices/" + std::to_string(slice_id) + "/deactivate");
    }
    if (*enb_cmd) {
      if (*enb_add) return client.request("POST", "/enbs", json{{"enb_id", enb_id}}.dump());
      if (*enb_list) return client.request("GET", "/enbs");
    }
    if (*meas)
      return client.request("GET", "/slices/" + std::to_string(meas_rsi) + "/measurements?since=" + std::to_string(meas_since));
    if (*ues) return client.request("GET", "/ues");
    if (*serve) {
      for (const auto& e : serve_enbs) {
        try {
          serve_opts.enbs.push_back(std::stoull(e, nullptr, 0));
        } catch (const std::logic_error&) {
          throw InvalidInput("bad eNB id '" + e + "'");
        }
      }
      if (const char* token = std::getenv(controller::kTokenEnv)) serve_opts.token = token;
      // Block the stop signals before any thread starts so only sigwait sees them.
      sigset_t stop_signals;
      sigemptyset(&stop_signals);
      sigaddset(&stop_signals, SIGINT);
      sigaddset(&stop_signals, SIGTERM);
      pthread_sigmask(SIG_BLOCK, &stop_signals, nullptr);
      controller::Server server(serve_opts);
      server.start();
      std::printf("controller: agents on %s:%u, REST on %s:%u\n", serve_opts.bind.c_str(), server.agent_port(),
                  serve_opts.bind.c_str(), server.rest_port());
      std::fflush(stdout);
      int sig = 0;
      sigwait(&stop_signals, &sig);
      server.stop();
      return kOk;
    }
    if (*dump) return trace_dump(dump_file);
  } catch (const sim::SpecError& e) {
    std::fprintf(stderr, "invalid scenario: %s\n", e.what());
    return kInvalid;
  } catch (const InvalidInput& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kInvalid;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kFailure;
  }
  return kOk;
}
