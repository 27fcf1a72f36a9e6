#include <fstream>
#include <random>

#include "doctest.h"

#include "oracles.hpp"
#include "reference_wire.hpp"
#include "ranslice/policy/admission.hpp"
#include "ranslice/policy/document.hpp"

using namespace ranslice;
using namespace ranslice::policy;
using nlohmann::json;

namespace {

const QosProfile kVideo{7, 9};

RanMap one_cell(bool slicing = true) { return {{CellRef{0x1, 0}, RanCell{50, slicing}}}; }

CapacityRule drb(Scope scope, Bound bound, double value, QosMatch match = QosMatch::any()) {
  return {Metric::DrbCount, std::move(match), scope, bound, value};
}

RsiTemplate wrr_slice(RsiId id, double share) {
  RsiTemplate t;
  t.rsi_id = id;
  t.plmn_list = {"21491"};
  t.cell_list = {{0x1, 0}};
  t.rrm_policy.l2.inter_slice = InterSliceWrr{share};
  return t;
}

SliceCounters with_drbs(std::uint32_t n, QosProfile q = kVideo) {
  SliceCounters c;
  if (n) c.active_drbs[q] = n;
  c.connected_ues = n;
  return c;
}

AdmissionRequest one_drb(QosProfile q = kVideo) { return {{DrbRequest{1, q}}, true}; }

ValidationErrc validation_code(const RsiTemplate& t, const RanMap& net, const std::vector<RsiTemplate>& existing = {}) {
  try {
    validate_template(t, net, existing);
  } catch (const ValidationError& e) {
    return e.code();
  }
  FAIL("template unexpectedly valid");
  return ValidationErrc::OutOfRange;
}

// Local decision, escalated to the slice-wide decision when asked.
bool composed_admit(const L3Descriptor& l3, const std::vector<int>& per_cell, std::size_t cell) {
  SliceView view;
  for (std::size_t i = 0; i < per_cell.size(); ++i) {
    auto c = with_drbs(static_cast<std::uint32_t>(per_cell[i]));
    view.total += c;
    if (i != cell) view.other_cells.push_back(c);
  }
  switch (evaluate_cell(l3, with_drbs(static_cast<std::uint32_t>(per_cell[cell])), one_drb())) {
    case CellDecision::AcceptLocal:
      return true;
    case CellDecision::RejectLocal:
      return false;
    case CellDecision::Escalate:
      return evaluate_slice(l3, view, one_drb()) == SliceDecision::Accept;
  }
  return false;
}

L3Descriptor l3_of(const testing::DrbRules& r) {
  L3Descriptor l3;
  if (r.cell_min) l3.rules.push_back(drb(Scope::Cell, Bound::Min, *r.cell_min));
  if (r.cell_max) l3.rules.push_back(drb(Scope::Cell, Bound::Max, *r.cell_max));
  if (r.slice_max) l3.rules.push_back(drb(Scope::Slice, Bound::Max, *r.slice_max));
  return l3;
}

std::vector<testing::DrbRules> all_rule_sets() {
  std::vector<std::optional<int>> values{std::nullopt, 0, 1, 2, 3};
  std::vector<testing::DrbRules> out;
  for (auto a : values)
    for (auto b : values)
      for (auto c : values) out.push_back({a, b, c});
  return out;
}

bool valid_on_two_cells(const L3Descriptor& l3) {
  RsiTemplate t;
  t.rsi_id = 1;
  t.cell_list = {{0x1, 0}, {0x2, 0}};
  t.rrm_policy.l3 = l3;
  RanMap net{{CellRef{0x1, 0}, RanCell{50, true}}, {CellRef{0x2, 0}, RanCell{50, true}}};
  try {
    validate_template(t, net, {});
    return true;
  } catch (const ValidationError&) {
    return false;
  }
}

}  // namespace

TEST_CASE("QoS matching") {
  CHECK(matches(QosMatch::any(), kVideo));
  CHECK(matches(QosMatch::exactly(kVideo), kVideo));
  CHECK_FALSE(matches(QosMatch{{QosPattern{1, std::nullopt}}}, kVideo));
  CHECK(matches(QosMatch{{QosPattern{std::nullopt, 9}}}, kVideo));
  CHECK(overlaps(QosMatch::any(), QosMatch::exactly(kVideo)));
  CHECK_FALSE(overlaps(QosMatch{{QosPattern{1, std::nullopt}}}, QosMatch{{QosPattern{2, std::nullopt}}}));
}

TEST_CASE("template validation") {
  SUBCASE("reproduction template is valid on one 50-PRB cell") {
    auto v = validate_template(testing::section_v_template(), one_cell(), {});
    CHECK(v->rsi_id == 1);
  }
  SUBCASE("WRR shares 60 and 50 overflow a shared cell") {
    std::vector<RsiTemplate> existing{wrr_slice(1, 60)};
    CHECK(validation_code(wrr_slice(2, 50), one_cell(), existing) == ValidationErrc::ShareOverflow);
    CHECK_NOTHROW(validate_template(wrr_slice(2, 40), one_cell(), existing));
  }
  SUBCASE("descriptor update may keep its own share") {
    std::vector<RsiTemplate> existing{wrr_slice(1, 60), wrr_slice(2, 40)};
    CHECK_NOTHROW(validate_template(wrr_slice(2, 40), one_cell(), existing, RsiId{2}));
  }
  SUBCASE("min above max for the same key") {
    auto t = wrr_slice(1, 100);
    t.rrm_policy.l3.rules = {drb(Scope::Slice, Bound::Min, 3), drb(Scope::Slice, Bound::Max, 2)};
    CHECK(validation_code(t, one_cell()) == ValidationErrc::InconsistentBounds);
  }
  SUBCASE("per-cell guarantees summed over cells exceed the slice cap") {
    auto t = wrr_slice(1, 100);
    t.cell_list = {{0x1, 0}, {0x2, 0}};
    t.rrm_policy.l3.rules = {drb(Scope::Cell, Bound::Min, 2), drb(Scope::Slice, Bound::Max, 3)};
    RanMap net{{CellRef{0x1, 0}, RanCell{50, true}}, {CellRef{0x2, 0}, RanCell{50, true}}};
    CHECK(validation_code(t, net) == ValidationErrc::InconsistentBounds);
  }
  SUBCASE("duplicate id, unknown cell, slicing unsupported") {
    CHECK(validation_code(wrr_slice(1, 10), one_cell(), {wrr_slice(1, 10)}) == ValidationErrc::DuplicateId);
    auto t = wrr_slice(1, 10);
    t.cell_list = {{0x9, 0}};
    CHECK(validation_code(t, one_cell()) == ValidationErrc::UnknownCell);
    CHECK(validation_code(wrr_slice(1, 10), one_cell(false)) == ValidationErrc::SlicingUnsupported);
  }
  SUBCASE("range checks carry the field path") {
    auto t = wrr_slice(1, 10);
    t.rrm_policy.l3.rules = {drb(Scope::Cell, Bound::Min, 1),
                             {Metric::RadioLoadPercent, QosMatch::any(), Scope::Cell, Bound::Max, 140}};
    try {
      validate_template(t, one_cell(), {});
      FAIL("expected OutOfRange");
    } catch (const ValidationError& e) {
      CHECK(e.code() == ValidationErrc::OutOfRange);
      CHECK(e.field() == "rrm_policy.l3.rules[1].value");
    }
  }
}

TEST_CASE("local decision examples") {
  L3Descriptor l3;
  l3.rules = {drb(Scope::Cell, Bound::Min, 1), drb(Scope::Slice, Bound::Max, 2)};
  CHECK(evaluate_cell(l3, with_drbs(0), one_drb()) == CellDecision::AcceptLocal);
  CHECK(evaluate_cell(l3, with_drbs(1), one_drb()) == CellDecision::Escalate);

  L3Descriptor cap;
  cap.rules = {drb(Scope::Cell, Bound::Max, 1)};
  CHECK(evaluate_cell(cap, with_drbs(1), one_drb()) == CellDecision::RejectLocal);
  CHECK(evaluate_cell(cap, with_drbs(0), one_drb()) == CellDecision::AcceptLocal);

  CHECK(evaluate_cell(L3Descriptor{}, with_drbs(100), one_drb()) == CellDecision::AcceptLocal);
}

TEST_CASE("slice decision examples") {
  L3Descriptor l3;
  l3.rules = {drb(Scope::Cell, Bound::Min, 1), drb(Scope::Slice, Bound::Max, 2)};
  CHECK(evaluate_slice(l3, {with_drbs(1), {}}, one_drb()) == SliceDecision::Accept);
  CHECK(evaluate_slice(l3, {with_drbs(2), {}}, one_drb()) == SliceDecision::Reject);
  CHECK(evaluate_slice(L3Descriptor{}, {with_drbs(1000), {}}, one_drb()) == SliceDecision::Accept);
}

TEST_CASE("multi-DRB requests are admitted atomically") {
  L3Descriptor l3;
  l3.rules = {drb(Scope::Slice, Bound::Max, 3)};
  AdmissionRequest two{{DrbRequest{2, kVideo}}, true};
  CHECK(evaluate_slice(l3, {with_drbs(1), {}}, two) == SliceDecision::Accept);
  CHECK(evaluate_slice(l3, {with_drbs(2), {}}, two) == SliceDecision::Reject);
}

TEST_CASE("rules only bind the profiles they match") {
  L3Descriptor l3;
  l3.rules = {drb(Scope::Cell, Bound::Max, 1, QosMatch::exactly({1, 1}))};
  CHECK(evaluate_cell(l3, with_drbs(5), one_drb()) == CellDecision::AcceptLocal);
  CHECK(evaluate_cell(l3, with_drbs(1, {1, 1}), one_drb({1, 1})) == CellDecision::RejectLocal);
}

TEST_CASE("UE count and load estimates") {
  AdmissionEstimates est = AdmissionEstimates::video_defaults();
  L3Descriptor ues;
  ues.rules = {{Metric::UeCount, QosMatch::any(), Scope::Cell, Bound::Max, 2}};
  CHECK(evaluate_cell(ues, with_drbs(1), one_drb(), est) == CellDecision::AcceptLocal);
  CHECK(evaluate_cell(ues, with_drbs(2), one_drb(), est) == CellDecision::RejectLocal);

  L3Descriptor load;
  load.rules = {{Metric::RadioLoadPercent, QosMatch::any(), Scope::Cell, Bound::Max, 50}};
  SliceCounters c;
  c.radio_load_percent[kVideo] = 30;
  CHECK(evaluate_cell(load, c, one_drb(), est) == CellDecision::RejectLocal);  // 30 + 22 > 50
  c.radio_load_percent[kVideo] = 20;
  CHECK(evaluate_cell(load, c, one_drb(), est) == CellDecision::AcceptLocal);

  L3Descriptor rate;
  rate.rules = {{Metric::AggregatedBitRateBps, QosMatch::any(), Scope::Slice, Bound::Max, 6e6}};
  SliceCounters r;
  r.bitrate_bps[kVideo] = 3e6;
  CHECK(evaluate_slice(rate, {r, {}}, one_drb(), est) == SliceDecision::Accept);
  r.bitrate_bps[kVideo] = 3.5e6;
  CHECK(evaluate_slice(rate, {r, {}}, one_drb(), est) == SliceDecision::Reject);
}

namespace {

struct RandomCase {
  L3Descriptor l3;
  std::vector<SliceCounters> cells;
  AdmissionRequest req;
};

SliceCounters random_counters(std::mt19937_64& rng) {
  static const QosProfile profiles[] = {{7, 9}, {9, 15}, {1, 1}};
  SliceCounters c;
  for (const auto& q : profiles) {
    auto n = static_cast<std::uint32_t>(rng() % 4);
    if (n) c.active_drbs[q] = n;
    c.radio_load_percent[q] = static_cast<double>(rng() % 40);
    c.bitrate_bps[q] = static_cast<double>(rng() % 8) * 1e6;
  }
  c.connected_ues = static_cast<std::uint32_t>(rng() % 5);
  return c;
}

QosMatch random_match(std::mt19937_64& rng) {
  switch (rng() % 3) {
    case 0:
      return QosMatch::any();
    case 1:
      return QosMatch::exactly({7, 9});
    default:
      return QosMatch{{QosPattern{std::nullopt, 15}}};
  }
}

RandomCase random_case(std::mt19937_64& rng) {
  RandomCase rc;
  for (auto n = rng() % 4; n > 0; --n) {
    CapacityRule r;
    r.metric = static_cast<Metric>(rng() % 4);
    r.match = r.metric == Metric::UeCount ? QosMatch::any() : random_match(rng);
    r.scope = static_cast<Scope>(rng() % 2);
    r.bound = static_cast<Bound>(rng() % 2);
    r.value = r.metric == Metric::AggregatedBitRateBps ? static_cast<double>(rng() % 12) * 1e6
              : r.metric == Metric::RadioLoadPercent   ? static_cast<double>(rng() % 101)
                                                       : static_cast<double>(rng() % 6);
    rc.l3.rules.push_back(r);
  }
  for (auto n = 1 + rng() % 3; n > 0; --n) rc.cells.push_back(random_counters(rng));
  static const QosProfile profiles[] = {{7, 9}, {9, 15}, {1, 1}};
  rc.req.drbs = {DrbRequest{static_cast<std::uint32_t>(1 + rng() % 2), profiles[rng() % 3]}};
  return rc;
}

SliceView view_of(const std::vector<SliceCounters>& cells) {
  SliceView v;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    v.total += cells[i];
    if (i > 0) v.other_cells.push_back(cells[i]);
  }
  return v;
}

SliceCounters grown(SliceCounters c, std::mt19937_64& rng) {
  for (auto& [q, n] : c.active_drbs) n += static_cast<std::uint32_t>(rng() % 2);
  if (rng() % 2) c.active_drbs[{9, 15}] += 1;
  c.connected_ues += static_cast<std::uint32_t>(rng() % 2);
  for (auto& [q, v] : c.radio_load_percent) v += static_cast<double>(rng() % 5);
  for (auto& [q, v] : c.bitrate_bps) v += static_cast<double>(rng() % 2) * 1e6;
  return c;
}

}  // namespace

TEST_CASE("property: local acceptance under a DRB guarantee stays within it") {
  // Without slice-scope rules nothing above the guarantee needs escalating,
  // so the guarantee only bounds local acceptance when such rules exist.
  std::mt19937_64 rng(1);
  for (int i = 0; i < 20000; ++i) {
    auto rc = random_case(rng);
    if (!rc.l3.has_scope(Scope::Slice)) continue;
    if (evaluate_cell(rc.l3, rc.cells[0], rc.req) != CellDecision::AcceptLocal) continue;
    for (const auto& r : rc.l3.rules) {
      if (r.metric != Metric::DrbCount || r.scope != Scope::Cell || r.bound != Bound::Min) continue;
      auto post = projected_value(r, rc.cells[0], rc.req, {});
      if (post) CHECK(*post <= r.value);
    }
  }
}

TEST_CASE("property: an exhausted guarantee with a slice cap always escalates or rejects") {
  std::mt19937_64 rng(2);
  int checked = 0;
  for (int i = 0; i < 20000; ++i) {
    auto rc = random_case(rng);
    rc.l3.rules.push_back(drb(Scope::Slice, Bound::Max, static_cast<double>(rng() % 6)));
    auto floor = drb(Scope::Cell, Bound::Min, static_cast<double>(rng() % 3));
    rc.l3.rules.push_back(floor);
    auto post = projected_value(floor, rc.cells[0], rc.req, {});
    if (!post || *post <= floor.value) continue;
    ++checked;
    CHECK(evaluate_cell(rc.l3, rc.cells[0], rc.req) != CellDecision::AcceptLocal);
  }
  CHECK(checked > 1000);
}

TEST_CASE("property: more usage never turns a reject into an accept") {
  std::mt19937_64 rng(3);
  for (int i = 0; i < 20000; ++i) {
    auto rc = random_case(rng);
    auto more = rc.cells;
    for (auto& c : more) c = grown(c, rng);
    if (evaluate_cell(rc.l3, rc.cells[0], rc.req) == CellDecision::RejectLocal)
      CHECK(evaluate_cell(rc.l3, more[0], rc.req) == CellDecision::RejectLocal);
    if (evaluate_slice(rc.l3, view_of(rc.cells), rc.req) == SliceDecision::Reject)
      CHECK(evaluate_slice(rc.l3, view_of(more), rc.req) == SliceDecision::Reject);
  }
}

TEST_CASE("composed decisions match the global oracle on two cells") {
  std::size_t rule_sets = 0;
  for (const auto& rules : all_rule_sets()) {
    auto l3 = l3_of(rules);
    if (!valid_on_two_cells(l3)) continue;
    ++rule_sets;
    for (const auto& seq : testing::all_sequences(2, 5)) {
      std::vector<int> state{0, 0};
      for (auto cell : seq) {
        bool got = composed_admit(l3, state, cell);
        REQUIRE(got == testing::global_admit(rules, state, cell));
        if (got) ++state[cell];
        if (rules.slice_max) REQUIRE(state[0] + state[1] <= *rules.slice_max);
        if (rules.cell_max) REQUIRE(state[cell] <= *rules.cell_max);
      }
    }
  }
  CHECK(rule_sets > 50);
}

TEST_CASE("provisioning document round trip") {
  std::ifstream in(std::string(RANSLICE_SOURCE_DIR) + "/scenarios/section-v.json");
  auto doc = json::parse(in);
  auto tpl = template_from_json(doc["slices"][0]["template"]);
  CHECK(tpl == testing::section_v_template());
  CHECK(template_from_json(template_to_json(tpl)) == tpl);

  auto p = tpl.rrm_policy;
  p.l2.inter_slice = InterSliceRr{};
  p.l2.intra_slice = IntraSlicePolicy::MaxCI;
  p.l1_opaque = std::vector<std::uint8_t>{1, 2, 3};
  p.l3.rules.push_back({Metric::RadioLoadPercent, QosMatch{{QosPattern{7, std::nullopt}, QosPattern{std::nullopt, 9}}},
                        Scope::Cell, Bound::Max, 75.5});
  CHECK(policy_from_json(policy_to_json(p)) == p);
}

TEST_CASE("document errors name the field") {
  auto doc = template_to_json(testing::section_v_template());
  doc["rrm_policy"]["l3"]["rules"][1]["scope"] = "galaxy";
  try {
    template_from_json(doc);
    FAIL("expected a ValidationError");
  } catch (const ValidationError& e) {
    CHECK(e.field() == "rrm_policy.l3.rules[1].scope");
  }
  auto missing = template_to_json(testing::section_v_template());
  missing.erase("rsi_id");
  CHECK_THROWS_AS(template_from_json(missing), ValidationError);
}

TEST_CASE("the documented example parses and validates") {
  std::ifstream in(std::string(RANSLICE_SOURCE_DIR) + "/docs/template.md");
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  auto begin = text.find("```json\n");
  REQUIRE(begin != std::string::npos);
  begin += 8;
  auto end = text.find("```", begin);
  auto tpl = template_from_json(json::parse(text.substr(begin, end - begin)));
  CHECK(tpl.nas_id_list.size() == 2);
  CHECK(tpl.nas_id_list[1] == NasId{NasIdKind::Tmsi, 0xdeadbeef});
  CHECK(tpl.rrm_policy.l2.intra_slice == IntraSlicePolicy::PF);
  CHECK(tpl.rrm_policy.l1_opaque == std::vector<std::uint8_t>{0xc0, 0xff, 0xee});
  CHECK_NOTHROW(validate_template(tpl, one_cell(), {}));
}
