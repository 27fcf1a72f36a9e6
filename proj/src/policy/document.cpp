#include "ranslice/policy/document.hpp"

#include <cmath>
#include <limits>

namespace ranslice::policy {

using nlohmann::json;

namespace {

[[noreturn]] void bad(const std::string& field, const std::string& what) {
  throw ValidationError(ValidationErrc::OutOfRange, field, what);
}

const json& need(const json& obj, const char* key, const std::string& path) {
  if (!obj.is_object()) bad(path, "expected an object");
  auto it = obj.find(key);
  if (it == obj.end()) bad(path + "." + key, "missing");
  return *it;
}

const json* maybe(const json& obj, const char* key) {
  auto it = obj.find(key);
  return it == obj.end() || it->is_null() ? nullptr : &*it;
}

template <typename T>
T as_uint(const json& v, const std::string& path, std::uint64_t lo = 0,
          std::uint64_t hi = std::numeric_limits<T>::max()) {
  std::uint64_t x = 0;
  if (v.is_number_unsigned()) {
    x = v.get<std::uint64_t>();
  } else if (v.is_number_integer()) {
    auto s = v.get<std::int64_t>();
    if (s < 0) bad(path, "must be nonnegative");
    x = static_cast<std::uint64_t>(s);
  } else if (v.is_string()) {
    // Large identifiers such as eNB IDs are often written in hex.
    const auto& s = v.get_ref<const std::string&>();
    try {
      std::size_t used = 0;
      x = std::stoull(s, &used, 0);
      if (used != s.size()) bad(path, "not an integer: " + s);
    } catch (const std::logic_error&) {
      bad(path, "not an integer: " + s);
    }
  } else {
    bad(path, "expected an integer");
  }
  if (x < lo || x > hi) bad(path, "out of range [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
  return static_cast<T>(x);
}

double as_number(const json& v, const std::string& path) {
  if (!v.is_number()) bad(path, "expected a number");
  auto d = v.get<double>();
  if (!std::isfinite(d)) bad(path, "must be finite");
  return d;
}

const std::string& as_string(const json& v, const std::string& path) {
  if (!v.is_string()) bad(path, "expected a string");
  return v.get_ref<const std::string&>();
}

const json& as_array(const json& v, const std::string& path) {
  if (!v.is_array()) bad(path, "expected an array");
  return v;
}

std::string idx(const std::string& path, std::size_t i) { return path + "[" + std::to_string(i) + "]"; }

std::optional<std::uint8_t> wildcard_or(const json& v, const std::string& path, int lo, int hi) {
  if (v.is_string() && v.get_ref<const std::string&>() == "*") return std::nullopt;
  return as_uint<std::uint8_t>(v, path, lo, hi);
}

template <typename E, std::size_t N>
E as_enum(const json& v, const std::string& path, const std::pair<const char*, E> (&names)[N]) {
  const auto& s = as_string(v, path);
  for (const auto& [name, e] : names)
    if (s == name) return e;
  std::string allowed;
  for (const auto& [name, e] : names) allowed += (allowed.empty() ? "" : ", ") + std::string(name);
  bad(path, "unknown value '" + s + "' (expected one of " + allowed + ")");
}

constexpr std::pair<const char*, Metric> kMetrics[] = {
    {"radio_load_percent", Metric::RadioLoadPercent},
    {"aggregated_bitrate_bps", Metric::AggregatedBitRateBps},
    {"drb_count", Metric::DrbCount},
    {"ue_count", Metric::UeCount},
};
constexpr std::pair<const char*, Scope> kScopes[] = {{"cell", Scope::Cell}, {"slice", Scope::Slice}};
constexpr std::pair<const char*, Bound> kBounds[] = {{"min", Bound::Min}, {"max", Bound::Max}};
constexpr std::pair<const char*, IntraSlicePolicy> kIntra[] = {
    {"rr", IntraSlicePolicy::RR}, {"pf", IntraSlicePolicy::PF}, {"maxci", IntraSlicePolicy::MaxCI}};

QosMatch match_from_json(const json& v, const std::string& path) {
  if (v.is_string() && v.get_ref<const std::string&>() == "*") return QosMatch::any();
  QosMatch m;
  m.pairs.clear();
  const auto& arr = as_array(v, path);
  if (arr.empty()) bad(path, "must not be empty");
  for (std::size_t i = 0; i < arr.size(); ++i) {
    auto p = idx(path, i);
    const auto& e = arr[i];
    QosPattern pat;
    if (auto* q = maybe(e, "qci")) pat.qci = wildcard_or(*q, p + ".qci", kMinQci, kMaxQci);
    if (auto* a = maybe(e, "arp")) pat.arp = wildcard_or(*a, p + ".arp", kMinArp, kMaxArp);
    m.pairs.push_back(pat);
  }
  return m;
}

json match_to_json(const QosMatch& m) {
  if (m.is_wildcard_only() && m.pairs.size() == 1) return "*";
  json arr = json::array();
  for (const auto& p : m.pairs) {
    json e = json::object();
    e["qci"] = p.qci ? json(*p.qci) : json("*");
    e["arp"] = p.arp ? json(*p.arp) : json("*");
    arr.push_back(e);
  }
  return arr;
}

std::string hex_blob(const std::vector<std::uint8_t>& b) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string s;
  for (auto x : b) {
    s += kDigits[x >> 4];
    s += kDigits[x & 15];
  }
  return s;
}

std::vector<std::uint8_t> blob_from_hex(const std::string& s, const std::string& path) {
  if (s.size() % 2) bad(path, "odd number of hex digits");
  auto nibble = [&](char c) -> int {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    bad(path, "not a hex string");
  };
  std::vector<std::uint8_t> out;
  for (std::size_t i = 0; i < s.size(); i += 2)
    out.push_back(static_cast<std::uint8_t>(nibble(s[i]) << 4 | nibble(s[i + 1])));
  return out;
}

}  // namespace

RrmPolicy policy_from_json(const json& doc, const std::string& prefix) {
  if (!doc.is_object()) bad(prefix, "expected an object");
  RrmPolicy p;
  if (auto* l3 = maybe(doc, "l3")) {
    auto path = prefix + ".l3";
    if (!l3->is_object()) bad(path, "expected an object");
    if (auto* w = maybe(*l3, "averaging_window_ms"))
      p.l3.averaging_window_ms = as_uint<std::uint32_t>(*w, path + ".averaging_window_ms");
    if (auto* rules = maybe(*l3, "rules")) {
      as_array(*rules, path + ".rules");
      for (std::size_t i = 0; i < rules->size(); ++i) {
        auto rp = idx(path + ".rules", i);
        const auto& r = (*rules)[i];
        CapacityRule rule;
        rule.metric = as_enum(need(r, "metric", rp), rp + ".metric", kMetrics);
        if (auto* m = maybe(r, "match")) rule.match = match_from_json(*m, rp + ".match");
        rule.scope = as_enum(need(r, "scope", rp), rp + ".scope", kScopes);
        rule.bound = as_enum(need(r, "bound", rp), rp + ".bound", kBounds);
        rule.value = as_number(need(r, "value", rp), rp + ".value");
        p.l3.rules.push_back(rule);
      }
    }
  }
  if (auto* l2 = maybe(doc, "l2")) {
    auto path = prefix + ".l2";
    if (!l2->is_object()) bad(path, "expected an object");
    if (auto* inter = maybe(*l2, "inter_slice")) {
      auto ip = path + ".inter_slice";
      const auto& algo = as_string(need(*inter, "algorithm", ip), ip + ".algorithm");
      if (algo == "rr") {
        if (maybe(*inter, "share_percent")) bad(ip + ".share_percent", "only valid with wrr");
        p.l2.inter_slice = InterSliceRr{};
      } else if (algo == "wrr") {
        p.l2.inter_slice = InterSliceWrr{as_number(need(*inter, "share_percent", ip), ip + ".share_percent")};
      } else {
        bad(ip + ".algorithm", "unknown value '" + algo + "' (expected one of rr, wrr)");
      }
    }
    if (auto* intra = maybe(*l2, "intra_slice")) p.l2.intra_slice = as_enum(*intra, path + ".intra_slice", kIntra);
  }
  if (auto* l1 = maybe(doc, "l1_opaque")) p.l1_opaque = blob_from_hex(as_string(*l1, prefix + ".l1_opaque"), prefix + ".l1_opaque");
  return p;
}

json policy_to_json(const RrmPolicy& p) {
  json rules = json::array();
  for (const auto& r : p.l3.rules) {
    rules.push_back({{"metric", to_string(r.metric)},
                     {"match", match_to_json(r.match)},
                     {"scope", to_string(r.scope)},
                     {"bound", to_string(r.bound)},
                     {"value", r.value}});
  }
  json inter;
  if (auto share = p.l2.wrr_share())
    inter = {{"algorithm", "wrr"}, {"share_percent", *share}};
  else
    inter = {{"algorithm", "rr"}};
  json out = {{"l3", {{"averaging_window_ms", p.l3.averaging_window_ms}, {"rules", rules}}},
              {"l2", {{"inter_slice", inter}, {"intra_slice", to_string(p.l2.intra_slice)}}}};
  if (p.l1_opaque) out["l1_opaque"] = hex_blob(*p.l1_opaque);
  return out;
}

RsiTemplate template_from_json(const json& doc) {
  if (!doc.is_object()) bad("", "template document must be an object");
  RsiTemplate t;
  t.rsi_id = as_uint<RsiId>(need(doc, "rsi_id", ""), "rsi_id");
  if (auto* plmns = maybe(doc, "plmn_list")) {
    as_array(*plmns, "plmn_list");
    for (std::size_t i = 0; i < plmns->size(); ++i) t.plmn_list.push_back(as_string((*plmns)[i], idx("plmn_list", i)));
  }
  if (auto* list = maybe(doc, "snssai_list")) {
    as_array(*list, "snssai_list");
    for (std::size_t i = 0; i < list->size(); ++i) {
      auto p = idx("snssai_list", i);
      const auto& e = (*list)[i];
      Snssai s;
      s.plmn_id = as_string(need(e, "plmn_id", p), p + ".plmn_id");
      s.sst = as_uint<std::uint8_t>(need(e, "sst", p), p + ".sst");
      if (auto* sd = maybe(e, "sd")) s.sd = as_uint<std::uint32_t>(*sd, p + ".sd", 0, 0xFFFFFF);
      t.snssai_list.push_back(s);
    }
  }
  const auto& cells = as_array(need(doc, "cell_list", ""), "cell_list");
  for (std::size_t i = 0; i < cells.size(); ++i) {
    auto p = idx("cell_list", i);
    CellRef ref;
    ref.enb_id = as_uint<EnbId>(need(cells[i], "enb_id", p), p + ".enb_id");
    ref.cell_id = as_uint<CellId>(need(cells[i], "cell_id", p), p + ".cell_id");
    t.cell_list.push_back(ref);
  }
  if (auto* rrm = maybe(doc, "rrm_policy")) t.rrm_policy = policy_from_json(*rrm, "rrm_policy");
  if (auto* nas = maybe(doc, "nas_id_list")) {
    as_array(*nas, "nas_id_list");
    for (std::size_t i = 0; i < nas->size(); ++i) {
      auto p = idx("nas_id_list", i);
      try {
        t.nas_id_list.push_back(NasId::parse(as_string((*nas)[i], p)));
      } catch (const std::invalid_argument&) {
        bad(p, "expected imsi:<digits> or tmsi:<hex>");
      }
    }
  }
  return t;
}

json template_to_json(const RsiTemplate& t) {
  json snssai = json::array();
  for (const auto& s : t.snssai_list) {
    json e = {{"plmn_id", s.plmn_id}, {"sst", s.sst}};
    if (s.sd) e["sd"] = *s.sd;
    snssai.push_back(e);
  }
  json cells = json::array();
  for (const auto& c : t.cell_list) cells.push_back({{"enb_id", to_hex(c.enb_id)}, {"cell_id", c.cell_id}});
  json nas = json::array();
  for (const auto& n : t.nas_id_list) nas.push_back(n.to_string());
  return {{"rsi_id", t.rsi_id},
          {"plmn_list", t.plmn_list},
          {"snssai_list", snssai},
          {"cell_list", cells},
          {"rrm_policy", policy_to_json(t.rrm_policy)},
          {"nas_id_list", nas}};
}

json counters_to_json(const SliceCounters& c) {
  json drbs = json::array();
  for (const auto& [q, n] : c.active_drbs) drbs.push_back({{"qci", q.qci}, {"arp", q.arp}, {"count", n}});
  return {{"active_drbs", drbs}, {"total_drbs", c.total_drbs()}, {"connected_ues", c.connected_ues}};
}

}  // namespace ranslice::policy
