#include "ranslice/sim/scenario.hpp"

#include <fstream>
#include <set>

#include "ranslice/policy/document.hpp"

namespace ranslice::sim {

using nlohmann::json;

std::string to_string(ActionKind k) {
  switch (k) {
    case ActionKind::Update:
      return "update";
    case ActionKind::Activate:
      return "activate";
    case ActionKind::Deactivate:
      return "deactivate";
    case ActionKind::Decommission:
      return "decommission";
  }
  return "?";
}

namespace {

std::string at(const std::string& path, std::size_t i) { return path + "[" + std::to_string(i) + "]"; }

template <typename T>
T integer(const json& obj, const char* key, const std::string& path, T fallback) {
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return fallback;
  std::string field = path.empty() ? key : path + "." + key;
  try {
    if (it->is_string()) {
      std::size_t used = 0;
      const auto& s = it->get_ref<const std::string&>();
      auto v = std::stoll(s, &used, 0);
      if (used != s.size()) throw std::invalid_argument(s);
      return static_cast<T>(v);
    }
    if (!it->is_number_integer()) throw SpecError(field, "expected an integer");
    auto v = it->get<std::int64_t>();
    if (v < 0) throw SpecError(field, "must be nonnegative");
    return static_cast<T>(v);
  } catch (const std::logic_error&) {
    throw SpecError(field, "not an integer");
  }
}

template <typename T>
T required(const json& obj, const char* key, const std::string& path) {
  if (!obj.contains(key)) throw SpecError(path.empty() ? key : path + "." + key, "missing");
  return integer<T>(obj, key, path, T{});
}

NasId nas(const json& v, const std::string& field) {
  if (!v.is_string()) throw SpecError(field, "expected a NAS identity string");
  try {
    return NasId::parse(v.get<std::string>());
  } catch (const std::invalid_argument& e) {
    throw SpecError(field, e.what());
  }
}

policy::RsiTemplate parse_template(const json& doc, const std::string& field) {
  try {
    return policy::template_from_json(doc);
  } catch (const policy::ValidationError& e) {
    throw SpecError(field + "." + e.field(), e.what());
  }
}

mac::AccountingBasis parse_accounting(const json& v, const std::string& field) {
  mac::AccountingBasis b;
  if (v.is_string()) {
    auto s = v.get<std::string>();
    if (s == "per_tti_capacity") return b;
    if (s == "paper_basis") {
      b.kind = mac::AccountingKind::PaperBasis;
      return b;
    }
    throw SpecError(field, "unknown accounting basis '" + s + "'");
  }
  if (!v.is_object()) throw SpecError(field, "expected a string or an object");
  auto kind = v.value("kind", std::string("per_tti_capacity"));
  if (kind == "paper_basis")
    b.kind = mac::AccountingKind::PaperBasis;
  else if (kind != "per_tti_capacity")
    throw SpecError(field + ".kind", "unknown accounting basis '" + kind + "'");
  if (v.contains("divisor")) {
    b.divisor = v.at("divisor").get<double>();
    if (!(b.divisor > 0)) throw SpecError(field + ".divisor", "must be positive");
  }
  return b;
}

LatencyProfile parse_latency(const json& v, const std::string& field) {
  try {
    return latency_from_json(v);
  } catch (const std::exception& e) {
    throw SpecError(field, e.what());
  }
}

}  // namespace

ScenarioSpec spec_from_json(const json& doc, const std::filesystem::path& base_dir) {
  if (!doc.is_object()) throw SpecError("", "scenario must be a JSON object");
  ScenarioSpec spec;
  try {
    spec.name = doc.value("name", spec.name);
  } catch (const json::exception&) {
    throw SpecError("name", "expected a string");
  }
  spec.seed = integer<std::uint64_t>(doc, "seed", "", spec.seed);
  spec.duration_ms = integer<Millis>(doc, "duration_ms", "", spec.duration_ms);
  if (doc.contains("latency")) spec.latency = parse_latency(doc.at("latency"), "latency");
  if (doc.contains("accounting")) spec.accounting = parse_accounting(doc.at("accounting"), "accounting");

  if (doc.contains("admission_estimates")) {
    const auto& est = doc.at("admission_estimates");
    if (!est.is_object()) throw SpecError("admission_estimates", "expected an object keyed by QCI");
    for (const auto& [key, value] : est.items()) {
      std::string field = "admission_estimates." + key;
      if (!value.is_object()) throw SpecError(field, "expected {load_percent, bitrate_bps}");
      if (key == "default") {
        spec.estimates.default_load_percent = value.value("load_percent", spec.estimates.default_load_percent);
        spec.estimates.default_bitrate_bps = value.value("bitrate_bps", spec.estimates.default_bitrate_bps);
        continue;
      }
      int qci = 0;
      try {
        qci = std::stoi(key);
      } catch (const std::logic_error&) {
        throw SpecError(field, "key must be a QCI or \"default\"");
      }
      if (qci < 1 || qci > 255) throw SpecError(field, "QCI out of range");
      auto q = static_cast<std::uint8_t>(qci);
      if (value.contains("load_percent")) spec.estimates.load_percent_per_drb[q] = value.at("load_percent").get<double>();
      if (value.contains("bitrate_bps")) spec.estimates.bitrate_bps_per_drb[q] = value.at("bitrate_bps").get<double>();
    }
  }

  if (doc.contains("controller")) {
    const auto& c = doc.at("controller");
    if (!c.is_object()) throw SpecError("controller", "expected an object");
    auto& cs = spec.controller;
    cs.hello_period_ms = integer<std::uint32_t>(c, "hello_period_ms", "controller", cs.hello_period_ms);
    cs.handshake_timeout_ms = integer<Millis>(c, "handshake_timeout_ms", "controller", cs.handshake_timeout_ms);
    cs.commit_timeout_ms = integer<Millis>(c, "commit_timeout_ms", "controller", cs.commit_timeout_ms);
    cs.provisional_ttl_ms = integer<Millis>(c, "provisional_ttl_ms", "controller", cs.provisional_ttl_ms);
    if (c.contains("up")) {
      if (!c.at("up").is_boolean()) throw SpecError("controller.up", "expected a boolean");
      cs.up = c.at("up").get<bool>();
    }
  }

  if (!doc.contains("enbs") || !doc.at("enbs").is_array()) throw SpecError("enbs", "expected an array");
  for (std::size_t i = 0; i < doc.at("enbs").size(); ++i) {
    const auto& e = doc.at("enbs")[i];
    auto path = at("enbs", i);
    if (!e.is_object()) throw SpecError(path, "expected an object");
    EnbSpec es;
    auto& cfg = es.config;
    cfg.enb_id = required<EnbId>(e, "enb_id", path);
    if (e.contains("plmn_id")) {
      if (!e.at("plmn_id").is_string()) throw SpecError(path + ".plmn_id", "expected a string");
      cfg.plmn_id = e.at("plmn_id").get<std::string>();
    }
    if (e.contains("slicing_supported")) cfg.slicing_supported = e.at("slicing_supported").get<bool>();
    if (e.contains("work_conserving")) cfg.work_conserving = e.at("work_conserving").get<bool>();
    cfg.hello_period_ms = integer<std::uint32_t>(e, "hello_period_ms", path, spec.controller.hello_period_ms);
    cfg.meas_period_ms = integer<std::uint32_t>(e, "meas_period_ms", path, cfg.meas_period_ms);
    cfg.ac_guard_ms = integer<Millis>(e, "ac_guard_ms", path, cfg.ac_guard_ms);
    if (e.contains("default_slice") && !e.at("default_slice").is_null())
      cfg.default_slice = integer<RsiId>(e, "default_slice", path, 0);
    if (e.contains("latency")) es.latency = parse_latency(e.at("latency"), path + ".latency");
    if (e.contains("cells")) {
      if (!e.at("cells").is_array()) throw SpecError(path + ".cells", "expected an array");
      cfg.cells.clear();
      for (std::size_t k = 0; k < e.at("cells").size(); ++k) {
        const auto& c = e.at("cells")[k];
        auto cpath = at(path + ".cells", k);
        if (!c.is_object()) throw SpecError(cpath, "expected an object");
        enb::CellConfig cc;
        cc.cell_id = required<CellId>(c, "cell_id", cpath);
        cc.n_prb = integer<std::uint16_t>(c, "n_prb", cpath, cc.n_prb);
        cc.dl_earfcn = integer<std::uint32_t>(c, "dl_earfcn", cpath, cc.dl_earfcn);
        cc.ul_earfcn = integer<std::uint32_t>(c, "ul_earfcn", cpath, cc.ul_earfcn);
        if (cc.n_prb == 0) throw SpecError(cpath + ".n_prb", "must be positive");
        cfg.cells.push_back(cc);
      }
    }
    spec.enbs.push_back(std::move(es));
  }

  if (doc.contains("epc_subscribers")) {
    const auto& subs = doc.at("epc_subscribers");
    if (!subs.is_array()) throw SpecError("epc_subscribers", "expected an array");
    for (std::size_t i = 0; i < subs.size(); ++i) spec.epc_subscribers.push_back(nas(subs[i], at("epc_subscribers", i)));
  }

  if (doc.contains("slices")) {
    const auto& slices = doc.at("slices");
    if (!slices.is_array()) throw SpecError("slices", "expected an array");
    for (std::size_t i = 0; i < slices.size(); ++i) {
      auto path = at("slices", i);
      const auto& s = slices[i];
      if (!s.is_object() || !s.contains("template")) throw SpecError(path + ".template", "missing");
      spec.slices.push_back({integer<Millis>(s, "at_ms", path, 0), parse_template(s.at("template"), path + ".template")});
    }
  }

  if (doc.contains("actions")) {
    const auto& actions = doc.at("actions");
    if (!actions.is_array()) throw SpecError("actions", "expected an array");
    for (std::size_t i = 0; i < actions.size(); ++i) {
      auto path = at("actions", i);
      const auto& a = actions[i];
      if (!a.is_object()) throw SpecError(path, "expected an object");
      ActionSpec as;
      as.at_ms = integer<Millis>(a, "at_ms", path, 0);
      as.rsi_id = required<RsiId>(a, "rsi_id", path);
      auto op = a.value("op", std::string());
      if (op == "update") {
        as.kind = ActionKind::Update;
        if (!a.contains("rrm_policy")) throw SpecError(path + ".rrm_policy", "missing");
        try {
          as.policy = policy::policy_from_json(a.at("rrm_policy"));
        } catch (const policy::ValidationError& e) {
          throw SpecError(path + "." + e.field(), e.what());
        }
      } else if (op == "activate") {
        as.kind = ActionKind::Activate;
      } else if (op == "deactivate") {
        as.kind = ActionKind::Deactivate;
      } else if (op == "decommission") {
        as.kind = ActionKind::Decommission;
      } else {
        throw SpecError(path + ".op", "expected update, activate, deactivate or decommission");
      }
      spec.actions.push_back(std::move(as));
    }
  }

  if (doc.contains("ues")) {
    const auto& ues = doc.at("ues");
    if (!ues.is_array()) throw SpecError("ues", "expected an array");
    for (std::size_t i = 0; i < ues.size(); ++i) {
      auto path = at("ues", i);
      const auto& u = ues[i];
      if (!u.is_object()) throw SpecError(path, "expected an object");
      UeSpec us;
      us.label = u.value("label", "UE#" + std::to_string(i + 1));
      if (!u.contains("nas_id")) throw SpecError(path + ".nas_id", "missing");
      us.nas_id = nas(u.at("nas_id"), path + ".nas_id");
      us.cell.enb_id = required<EnbId>(u, "enb_id", path);
      us.cell.cell_id = integer<CellId>(u, "cell_id", path, 0);
      us.power_on_ms = integer<Millis>(u, "power_on_ms", path, 0);
      us.cbr_bps = integer<std::uint64_t>(u, "cbr_bps", path, 0);
      if (u.contains("cqi")) {
        const auto& c = u.at("cqi");
        us.cqi.clear();
        if (c.is_number_integer()) {
          us.cqi.push_back(c.get<int>());
        } else if (c.is_array()) {
          for (const auto& v : c) {
            if (!v.is_number_integer()) throw SpecError(path + ".cqi", "expected integers");
            us.cqi.push_back(v.get<int>());
          }
        } else if (c.is_object() && c.contains("trace")) {
          auto file = std::filesystem::path(c.at("trace").get<std::string>());
          if (file.is_relative()) file = base_dir / file;
          std::ifstream in(file);
          if (!in) throw SpecError(path + ".cqi.trace", "cannot read " + file.string());
          int v = 0;
          while (in >> v) us.cqi.push_back(v);
        } else {
          throw SpecError(path + ".cqi", "expected an integer, an array or {trace: file}");
        }
        if (us.cqi.empty()) throw SpecError(path + ".cqi", "empty CQI sequence");
      }
      spec.ues.push_back(std::move(us));
    }
  }

  for (auto& e : spec.enbs) {
    e.config.accounting = spec.accounting;
    e.config.estimates = spec.estimates;
  }
  validate_spec(spec);
  return spec;
}

ScenarioSpec load_spec(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw SpecError("", "cannot read " + file.string());
  json doc;
  try {
    doc = json::parse(in, nullptr, true, true);
  } catch (const json::parse_error& e) {
    throw SpecError("", std::string("not valid JSON: ") + e.what());
  }
  return spec_from_json(doc, file.parent_path());
}

void validate_spec(const ScenarioSpec& spec) {
  if (spec.duration_ms <= 0) throw SpecError("duration_ms", "must be positive");
  std::set<EnbId> enb_ids;
  std::set<CellRef> cells;
  for (std::size_t i = 0; i < spec.enbs.size(); ++i) {
    const auto& cfg = spec.enbs[i].config;
    if (!enb_ids.insert(cfg.enb_id).second) throw SpecError(at("enbs", i) + ".enb_id", "duplicate eNB " + to_hex(cfg.enb_id));
    if (cfg.cells.empty()) throw SpecError(at("enbs", i) + ".cells", "an eNB needs at least one cell");
    for (const auto& c : cfg.cells)
      if (!cells.insert({cfg.enb_id, c.cell_id}).second)
        throw SpecError(at("enbs", i) + ".cells", "duplicate cell " + std::to_string(c.cell_id));
    if (cfg.meas_period_ms == 0) throw SpecError(at("enbs", i) + ".meas_period_ms", "must be positive");
    if (cfg.hello_period_ms == 0) throw SpecError(at("enbs", i) + ".hello_period_ms", "must be positive");
  }
  std::set<RsiId> slice_ids;
  for (std::size_t i = 0; i < spec.slices.size(); ++i) {
    const auto& s = spec.slices[i];
    auto path = at("slices", i);
    if (s.at_ms > spec.duration_ms) throw SpecError(path + ".at_ms", "after the end of the scenario");
    for (std::size_t k = 0; k < s.tpl.cell_list.size(); ++k)
      if (!cells.count(s.tpl.cell_list[k]))
        throw SpecError(at(path + ".template.cell_list", k), "cell not defined by any eNB");
    slice_ids.insert(s.tpl.rsi_id);
  }
  for (std::size_t i = 0; i < spec.actions.size(); ++i) {
    const auto& a = spec.actions[i];
    if (!slice_ids.count(a.rsi_id)) throw SpecError(at("actions", i) + ".rsi_id", "slice not defined in the scenario");
    if (a.at_ms > spec.duration_ms) throw SpecError(at("actions", i) + ".at_ms", "after the end of the scenario");
  }
  for (std::size_t i = 0; i < spec.ues.size(); ++i) {
    const auto& u = spec.ues[i];
    auto path = at("ues", i);
    if (!cells.count(u.cell)) throw SpecError(path + ".cell_id", "cell not defined by any eNB");
    if (u.power_on_ms > spec.duration_ms) throw SpecError(path + ".power_on_ms", "after the end of the scenario");
    for (int c : u.cqi)
      if (c < 1 || c > 15) throw SpecError(path + ".cqi", "CQI must be in 1..15");
  }
}

json spec_to_json(const ScenarioSpec& spec) {
  json doc;
  doc["name"] = spec.name;
  doc["seed"] = spec.seed;
  doc["duration_ms"] = spec.duration_ms;
  doc["latency"] = latency_to_json(spec.latency);
  doc["accounting"] = {{"kind", spec.accounting.kind == mac::AccountingKind::PaperBasis ? "paper_basis" : "per_tti_capacity"},
                       {"divisor", spec.accounting.divisor}};
  doc["controller"] = {{"hello_period_ms", spec.controller.hello_period_ms},
                       {"handshake_timeout_ms", spec.controller.handshake_timeout_ms},
                       {"commit_timeout_ms", spec.controller.commit_timeout_ms},
                       {"provisional_ttl_ms", spec.controller.provisional_ttl_ms},
                       {"up", spec.controller.up}};
  json est = json::object();
  for (const auto& [q, v] : spec.estimates.load_percent_per_drb) est[std::to_string(q)]["load_percent"] = v;
  for (const auto& [q, v] : spec.estimates.bitrate_bps_per_drb) est[std::to_string(q)]["bitrate_bps"] = v;
  est["default"] = {{"load_percent", spec.estimates.default_load_percent},
                    {"bitrate_bps", spec.estimates.default_bitrate_bps}};
  doc["admission_estimates"] = est;
  doc["enbs"] = json::array();
  for (const auto& e : spec.enbs) {
    json cells = json::array();
    for (const auto& c : e.config.cells)
      cells.push_back({{"cell_id", c.cell_id}, {"n_prb", c.n_prb}, {"dl_earfcn", c.dl_earfcn}, {"ul_earfcn", c.ul_earfcn}});
    json j = {{"enb_id", to_hex(e.config.enb_id)},
              {"plmn_id", e.config.plmn_id},
              {"slicing_supported", e.config.slicing_supported},
              {"work_conserving", e.config.work_conserving},
              {"hello_period_ms", e.config.hello_period_ms},
              {"meas_period_ms", e.config.meas_period_ms},
              {"ac_guard_ms", e.config.ac_guard_ms},
              {"cells", cells}};
    if (e.config.default_slice) j["default_slice"] = *e.config.default_slice;
    if (e.latency) j["latency"] = latency_to_json(*e.latency);
    doc["enbs"].push_back(j);
  }
  doc["epc_subscribers"] = json::array();
  for (const auto& n : spec.epc_subscribers) doc["epc_subscribers"].push_back(n.to_string());
  doc["slices"] = json::array();
  for (const auto& s : spec.slices) doc["slices"].push_back({{"at_ms", s.at_ms}, {"template", policy::template_to_json(s.tpl)}});
  doc["actions"] = json::array();
  for (const auto& a : spec.actions) {
    json j = {{"at_ms", a.at_ms}, {"op", to_string(a.kind)}, {"rsi_id", a.rsi_id}};
    if (a.policy) j["rrm_policy"] = policy::policy_to_json(*a.policy);
    doc["actions"].push_back(j);
  }
  doc["ues"] = json::array();
  for (const auto& u : spec.ues)
    doc["ues"].push_back({{"label", u.label},
                          {"nas_id", u.nas_id.to_string()},
                          {"enb_id", to_hex(u.cell.enb_id)},
                          {"cell_id", u.cell.cell_id},
                          {"power_on_ms", u.power_on_ms},
                          {"cbr_bps", u.cbr_bps},
                          {"cqi", u.cqi}});
  return doc;
}

namespace {

// Kept in step with scenarios/section-v.json (a test compares the two).
constexpr const char* kSectionV = R"({
  "name": "section-v",
  "seed": 1,
  "latency": "paper-calibrated",
  "duration_ms": 7000,
  "accounting": "per_tti_capacity",
  "enbs": [
    {"enb_id": "0x1", "plmn_id": "21491", "slicing_supported": true,
     "cells": [{"cell_id": 0, "n_prb": 50, "dl_earfcn": 3100, "ul_earfcn": 21100}]}
  ],
  "epc_subscribers": ["imsi:214910000000001", "imsi:214910000000002", "imsi:214910000000003"],
  "slices": [
    {"at_ms": 300,
     "template": {
       "rsi_id": 1,
       "plmn_list": ["21491"],
       "snssai_list": [{"plmn_id": "21491", "sst": 1}],
       "cell_list": [{"enb_id": "0x1", "cell_id": 0}],
       "nas_id_list": ["imsi:214910000000001", "imsi:214910000000002", "imsi:214910000000003"],
       "rrm_policy": {
         "l3": {"averaging_window_ms": 1000,
                "rules": [
                  {"metric": "drb_count", "match": "*", "scope": "cell", "bound": "min", "value": 1},
                  {"metric": "drb_count", "match": "*", "scope": "slice", "bound": "max", "value": 2}
                ]},
         "l2": {"inter_slice": {"algorithm": "wrr", "share_percent": 100}, "intra_slice": "rr"}
       }
     }}
  ],
  "ues": [
    {"label": "UE#1", "nas_id": "imsi:214910000000001", "enb_id": "0x1", "cell_id": 0,
     "power_on_ms": 1000, "cbr_bps": 3000000, "cqi": 9},
    {"label": "UE#2", "nas_id": "imsi:214910000000002", "enb_id": "0x1", "cell_id": 0,
     "power_on_ms": 3000, "cbr_bps": 3000000, "cqi": 9},
    {"label": "UE#3", "nas_id": "imsi:214910000000003", "enb_id": "0x1", "cell_id": 0,
     "power_on_ms": 5000, "cbr_bps": 3000000, "cqi": 9}
  ]
})";

}  // namespace

std::optional<ScenarioSpec> builtin_spec(const std::string& name) {
  if (name == "section-v") return spec_from_json(json::parse(kSectionV));
  if (name == "section-v-noslice") {
    auto doc = json::parse(kSectionV);
    doc["name"] = "section-v-noslice";
    doc["enbs"][0]["slicing_supported"] = false;
    doc["slices"] = json::array();
    return spec_from_json(doc);
  }
  return std::nullopt;
}

std::vector<std::string> builtin_names() { return {"section-v", "section-v-noslice"}; }

}  // namespace ranslice::sim
