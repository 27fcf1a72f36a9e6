#include <algorithm>
#include <chrono>
#include <cmath>
#include <random>
#include <set>

#include "doctest.h"

#include "oracles.hpp"
#include "ranslice/mac/scheduler.hpp"

using namespace ranslice;
using namespace ranslice::mac;
using policy::IntraSlicePolicy;

namespace {

policy::L2Descriptor wrr(double share, IntraSlicePolicy intra = IntraSlicePolicy::RR) {
  return {policy::InterSliceWrr{share}, intra};
}
policy::L2Descriptor rr(IntraSlicePolicy intra = IntraSlicePolicy::RR) { return {policy::InterSliceRr{}, intra}; }

constexpr std::uint64_t kSaturate = 1ULL << 40;

CellParams params(bool work_conserving = true) {
  CellParams p;
  p.work_conserving = work_conserving;
  return p;
}

std::map<Rnti, std::uint64_t> prbs_by_ue(const TtiAllocation& a) {
  std::map<Rnti, std::uint64_t> out;
  for (const auto& s : a.slices)
    for (const auto& g : s.grants) out[g.rnti] += g.prbs;
  return out;
}

void check_conservation(const TtiAllocation& a, std::uint32_t n_prb) {
  std::uint32_t total = 0;
  std::set<Rnti> seen;
  for (const auto& s : a.slices) {
    std::uint32_t in_slice = 0;
    for (const auto& g : s.grants) {
      REQUIRE(seen.insert(g.rnti).second);
      in_slice += g.prbs;
    }
    REQUIRE(in_slice == s.granted);
    total += s.granted;
  }
  REQUIRE(total <= n_prb);
  REQUIRE(a.total_granted() == total);
}

}  // namespace

TEST_CASE("CQI table") {
  auto t = CqiTable::default_table();
  for (int c = 1; c < 15; ++c) CHECK(t.bits(c + 1, 7) >= t.bits(c, 7));
  for (int c = 1; c <= 15; ++c) CHECK(t.bits(c, 0) == 0);
  CHECK_THROWS_AS(t.per_prb(0), CqiError);
  CHECK_THROWS_AS(t.per_prb(16), CqiError);
  std::array<std::uint32_t, 15> bad{};
  for (std::size_t i = 0; i < 15; ++i) bad[i] = static_cast<std::uint32_t>(100 - i);
  CHECK_THROWS_AS(CqiTable{bad}, CqiError);
  // One 3 Mb/s stream fits in a full 50-PRB cell at the top CQI.
  CHECK(3e6 / (double(t.per_prb(15)) * 50 * 1000) < 1.0);
  CHECK(prbs_to_drain(0, 289) == 0);
  CHECK(prbs_to_drain(375, 289) == 11);  // 3000 bits / 289 -> 10.4
}

TEST_CASE("inter-slice partition examples") {
  SUBCASE("WRR 60/40 on 50 PRBs, both backlogged") {
    std::vector<PartitionSlice> s{{60.0, 50}, {40.0, 50}};
    for (std::uint64_t r = 0; r < 5; ++r) {
      auto p = inter_slice_partition(s, 50, true, r);
      CHECK(p.granted == std::vector<std::uint32_t>{30, 20});
      CHECK(p.nominal == std::vector<std::uint32_t>{30, 20});
    }
  }
  SUBCASE("WRR 60/40 with the second slice idle, work conserving") {
    std::vector<PartitionSlice> s{{60.0, 50}, {40.0, 0}};
    auto p = inter_slice_partition(s, 50, true, 0);
    CHECK(p.granted == std::vector<std::uint32_t>{50, 0});
    CHECK(inter_slice_partition(s, 50, false, 0).granted == std::vector<std::uint32_t>{30, 0});
  }
  SUBCASE("RR among three backlogged slices rotates the remainder") {
    std::vector<PartitionSlice> s{{std::nullopt, 50}, {std::nullopt, 50}, {std::nullopt, 50}};
    std::vector<std::uint32_t> sum(3, 0);
    for (std::uint64_t r = 0; r < 3; ++r) {
      auto p = inter_slice_partition(s, 50, true, r);
      std::vector<std::uint32_t> sorted = p.granted;
      std::sort(sorted.begin(), sorted.end());
      CHECK(sorted == std::vector<std::uint32_t>{16, 17, 17});
      for (int i = 0; i < 3; ++i) sum[i] += p.granted[i];
    }
    CHECK(sum == std::vector<std::uint32_t>{50, 50, 50});
  }
  SUBCASE("flooring remainders go to the largest remainder first") {
    std::vector<PartitionSlice> s{{33.0, 50}, {33.0, 50}, {34.0, 50}};
    auto p = inter_slice_partition(s, 50, true, 0);
    CHECK(p.nominal == std::vector<std::uint32_t>{16, 16, 17});
    CHECK(p.granted[0] + p.granted[1] + p.granted[2] == 50);
    CHECK(inter_slice_partition(s, 50, false, 0).granted == std::vector<std::uint32_t>{16, 16, 17});
  }
}

TEST_CASE("intra-slice schedule examples") {
  auto table = CqiTable::default_table();
  SUBCASE("max C/I gives everything to the best channel") {
    std::vector<UeView> ues{{0x46, 15, 1000, 1}, {0x47, 3, 1000, 1}};
    auto g = intra_slice_schedule(IntraSlicePolicy::MaxCI, 50, ues, 0, table);
    REQUIRE(g.size() == 1);
    CHECK(g[0].rnti == 0x46);
    CHECK(g[0].prbs == 50);
  }
  SUBCASE("max C/I ties go to the lowest rnti") {
    std::vector<UeView> ues{{0x46, 9, 10, 1}, {0x47, 9, 1000, 1}};
    auto g = intra_slice_schedule(IntraSlicePolicy::MaxCI, 50, ues, 0, table);
    REQUIRE(g.size() == 2);
    CHECK(g[0].prbs == 10);
    CHECK(g[1].prbs == 40);
  }
  SUBCASE("round robin splits evenly") {
    std::vector<UeView> ues{{0x46, 9, 1000, 1}, {0x47, 9, 1000, 1}};
    auto g = intra_slice_schedule(IntraSlicePolicy::RR, 20, ues, 0, table);
    REQUIRE(g.size() == 2);
    CHECK(g[0].prbs == 10);
    CHECK(g[1].prbs == 10);
  }
  SUBCASE("grants never exceed need") {
    std::vector<UeView> ues{{0x46, 9, 3, 1}, {0x47, 9, 4, 1}};
    for (auto pol : {IntraSlicePolicy::RR, IntraSlicePolicy::PF, IntraSlicePolicy::MaxCI}) {
      auto g = intra_slice_schedule(pol, 50, ues, 0, table);
      std::uint32_t total = 0;
      for (const auto& x : g) total += x.prbs;
      CHECK(total == 7);
    }
  }
}

TEST_CASE("empty cell allocates nothing") {
  Cell cell(params());
  auto a = cell.step_tti();
  CHECK(a.total_granted() == 0);
  cell.add_slice(1, wrr(100));
  a = cell.step_tti();
  REQUIRE(a.slices.size() == 1);
  CHECK(a.slices[0].granted == 0);
  CHECK(a.slices[0].quota == 50);
}

TEST_CASE("WRR 60/40 grants 30/20 per TTI when both are backlogged") {
  for (bool wc : {true, false}) {
    Cell cell(params(wc));
    cell.add_slice(1, wrr(60));
    cell.add_slice(2, wrr(40));
    cell.add_ue(0x46, 1, 9);
    cell.add_ue(0x47, 2, 9);
    for (int t = 0; t < 1000; ++t) {
      cell.enqueue(0x46, 1, kSaturate);
      cell.enqueue(0x47, 1, kSaturate);
      auto a = cell.step_tti();
      check_conservation(a, 50);
      REQUIRE(a.slices[0].granted == 30);
      REQUIRE(a.slices[1].granted == 20);
    }
  }
}

TEST_CASE("property: PRB conservation under random load") {
  std::mt19937_64 rng(42);
  for (int trial = 0; trial < 50; ++trial) {
    Cell cell(params(rng() % 2 == 0));
    std::vector<RsiId> slices;
    double budget = 100;
    const auto n_slices = static_cast<RsiId>(1 + rng() % 4);
    for (RsiId id = 1; id <= n_slices; ++id) {
      auto intra = static_cast<IntraSlicePolicy>(rng() % 3);
      if (rng() % 2 && budget > 1) {
        double share = 1 + static_cast<double>(rng() % static_cast<std::uint64_t>(budget));
        budget -= share;
        cell.add_slice(id, wrr(share, intra));
      } else {
        cell.add_slice(id, rr(intra));
      }
      slices.push_back(id);
    }
    std::vector<Rnti> ues;
    const auto n_ues = static_cast<Rnti>(1 + rng() % 8);
    for (Rnti r = 0x46; r < 0x46 + n_ues; ++r) {
      cell.add_ue(r, slices[rng() % slices.size()], 1 + static_cast<int>(rng() % 15));
      ues.push_back(r);
    }
    for (int t = 0; t < 500; ++t) {
      for (auto r : ues) {
        if (rng() % 3 == 0) cell.enqueue(r, 1, rng() % 4000);
        if (rng() % 50 == 0) cell.set_cqi(r, 1 + static_cast<int>(rng() % 15));
      }
      check_conservation(cell.step_tti(), 50);
    }
  }
}

TEST_CASE("property: work conservation") {
  std::mt19937_64 rng(7);
  Cell cell(params(true));
  cell.add_slice(1, wrr(50));
  cell.add_slice(2, wrr(20));
  cell.add_slice(3, rr());
  std::vector<std::pair<Rnti, RsiId>> ues{{0x46, 1}, {0x47, 2}, {0x48, 3}, {0x49, 3}};
  for (auto [r, s] : ues) cell.add_ue(r, s, 9);
  for (int t = 0; t < 20000; ++t) {
    for (auto [r, s] : ues)
      if (rng() % 10 == 0) cell.enqueue(r, 1, rng() % 3000);
    bool backlog = false;
    std::uint64_t need = 0;
    for (auto [r, s] : ues) {
      backlog = backlog || cell.queue_bytes(r) > 0;
      need += prbs_to_drain(cell.queue_bytes(r), 289);
    }
    auto a = cell.step_tti();
    if (backlog) REQUIRE(a.total_granted() >= 1);
    // Nothing is left idle while demand remains.
    REQUIRE(a.total_granted() == std::min<std::uint64_t>(need, 50));
  }
}

TEST_CASE("property: WRR enforcement over windows with work conservation off") {
  Cell cell(params(false));
  cell.add_slice(1, wrr(33));
  cell.add_slice(2, wrr(45));
  cell.add_slice(3, wrr(22));
  for (Rnti r = 0x46; r < 0x49; ++r) cell.add_ue(r, static_cast<RsiId>(r - 0x45), 9);
  const std::uint64_t W = 997;
  std::map<RsiId, std::uint64_t> got;
  for (std::uint64_t t = 0; t < W; ++t) {
    for (Rnti r = 0x46; r < 0x49; ++r) cell.enqueue(r, 1, kSaturate);
    for (const auto& s : cell.step_tti().slices) got[s.rsi_id] += s.granted;
  }
  for (auto [id, share] : std::map<RsiId, double>{{1, 33}, {2, 45}, {3, 22}}) {
    double target = share / 100.0 * 50 * W;
    CHECK(std::abs(double(got[id]) - target) <= double(W));
  }
}

TEST_CASE("property: isolation of slice A from slice B load with work conservation off") {
  auto run = [](std::uint64_t b_bps) {
    Cell cell(params(false));
    cell.add_slice(1, wrr(60));
    cell.add_slice(2, wrr(40));
    cell.add_ue(0x46, 1, 9);
    cell.add_ue(0x47, 2, 7);
    cell.add_ue(0x48, 2, 12);
    std::vector<std::uint64_t> a_used;
    std::uint64_t acc_a = 0, acc_b = 0;
    for (int t = 1; t <= 10000; ++t) {
      acc_a += 9'000'000;
      cell.enqueue(0x46, 1, acc_a / 8000);
      acc_a %= 8000;
      acc_b += b_bps;
      cell.enqueue(0x47, 1, acc_b / 8000);
      cell.enqueue(0x48, 1, acc_b / 16000);
      acc_b %= 8000;
      cell.step_tti();
      if (t % 1000 == 0)
        for (const auto& c : cell.rollup())
          if (c.rsi_id == 1) a_used.push_back(c.dl_prb_used);
    }
    return a_used;
  };
  auto base = run(0);
  REQUIRE(base.size() == 10);
  CHECK(base[5] > 0);
  for (std::uint64_t b : {1'000'000ULL, 5'000'000ULL, 40'000'000ULL, 400'000'000ULL}) CHECK(run(b) == base);
}

TEST_CASE("property: PF matches RR under identical constant channels") {
  auto t0 = std::chrono::steady_clock::now();
  auto shares = [](IntraSlicePolicy pol) {
    Cell cell(params());
    cell.add_slice(1, wrr(100, pol));
    cell.add_ue(0x46, 1, 9);
    cell.add_ue(0x47, 1, 9);
    std::map<Rnti, std::uint64_t> total;
    for (int t = 0; t < 10000; ++t) {
      cell.enqueue(0x46, 1, kSaturate);
      cell.enqueue(0x47, 1, kSaturate);
      for (auto [r, n] : prbs_by_ue(cell.step_tti())) total[r] += n;
    }
    return total;
  };
  auto pf = shares(IntraSlicePolicy::PF);
  auto rr_ = shares(IntraSlicePolicy::RR);
  double pf_total = double(pf[0x46] + pf[0x47]);
  CHECK(pf_total == 500000.0);
  CHECK(std::abs(double(pf[0x46]) / pf_total - 0.5) <= 0.01);
  for (Rnti r : {Rnti{0x46}, Rnti{0x47}})
    CHECK(std::abs(double(pf[r]) - double(rr_[r])) <= 0.01 * double(rr_[r]));
  CHECK(std::chrono::steady_clock::now() - t0 < std::chrono::seconds(30));
}

TEST_CASE("PF seeds its average with the one-PRB rate and tracks service") {
  Cell cell(params());
  cell.add_slice(1, wrr(100, IntraSlicePolicy::PF));
  cell.add_ue(0x46, 1, 9);
  CHECK(cell.pf_avg(0x46) == doctest::Approx(289.0));
  cell.enqueue(0x46, 1, kSaturate);
  cell.step_tti();
  CHECK(cell.pf_avg(0x46) == doctest::Approx(0.99 * 289.0 + 0.01 * 50 * 289.0));
}

TEST_CASE("property: queue stays bounded when CBR is below capacity") {
  Cell cell(params());
  cell.add_slice(1, wrr(100));
  cell.add_ue(0x46, 1, 9);
  std::uint64_t acc = 0, worst = 0;
  for (int t = 0; t < 100000; ++t) {
    acc += 12'000'000;  // 12 Mb/s against 14.45 Mb/s capacity at CQI 9
    cell.enqueue(0x46, 1, acc / 8000);
    acc %= 8000;
    cell.step_tti();
    worst = std::max(worst, cell.queue_bytes(0x46));
  }
  CHECK(worst < 2000);
}

TEST_CASE("single CBR UE matches the straight-line per-TTI replay") {
  for (std::uint64_t bps : {3'000'000ULL, 999ULL, 14'000'000ULL, 20'000'000ULL}) {
    CAPTURE(bps);
    Cell cell(params());
    cell.add_slice(1, wrr(100));
    cell.add_ue(0x46, 1, 9);
    std::uint64_t acc = 0;
    std::vector<std::uint64_t> got;
    for (std::uint64_t t = 0; t < 5000; ++t) {
      if (t % 1000 == 0 && t > 0)
        for (const auto& c : cell.rollup()) got.push_back(c.dl_prb_used);
      acc += bps;
      cell.enqueue(0x46, 1, acc / 8000);
      acc %= 8000;
      cell.step_tti();
    }
    auto expect = testing::cbr_prb_oracle(bps, 289, 50, 0, 4000);
    REQUIRE(got.size() == 4);
    for (std::size_t i = 0; i < 4; ++i) CHECK(got[i] == expect[(i + 1) * 1000]);
  }
}

TEST_CASE("staged descriptor changes apply at the next TTI") {
  Cell cell(params(false));
  cell.add_slice(1, wrr(60));
  cell.add_ue(0x46, 1, 9);
  cell.enqueue(0x46, 1, kSaturate);
  CHECK(cell.step_tti().slices[0].granted == 30);
  cell.stage_update(1, wrr(40));
  CHECK(cell.descriptor(1)->wrr_share() == 60.0);
  CHECK(cell.step_tti().slices[0].granted == 20);
  cell.stage_active(1, false);
  CHECK(cell.step_tti().slices.empty());
  cell.stage_active(1, true);
  CHECK(cell.step_tti().slices[0].granted == 20);
}

TEST_CASE("intra policy switch shows in the allocation trace") {
  Cell cell(params());
  cell.add_slice(1, wrr(100, IntraSlicePolicy::RR));
  cell.add_ue(0x46, 1, 15);
  cell.add_ue(0x47, 1, 3);
  std::vector<TraceRecord> trace;
  cell.set_trace_sink([&](const TraceRecord& r) { trace.push_back(r); });
  cell.enqueue(0x46, 1, kSaturate);
  cell.enqueue(0x47, 1, kSaturate);
  cell.step_tti();
  CHECK(trace.size() == 2);
  cell.stage_update(1, wrr(100, IntraSlicePolicy::MaxCI));
  trace.clear();
  cell.step_tti();
  REQUIRE(trace.size() == 1);
  CHECK(trace[0].rnti == 0x46);
  CHECK(trace[0].prbs == 50);
  CHECK(trace[0].bits == 50u * 667u);
}

TEST_CASE("interval rollup and accounting bases") {
  AccountingBasis fixed_base{AccountingKind::PaperBasis, 10000};
  CHECK(fixed_base.load_percent(1745, 50, 1000) == doctest::Approx(17.45));
  AccountingBasis capacity;
  CHECK(capacity.load_percent(50000, 50, 1000) == doctest::Approx(100.0));
  CHECK(capacity.load_percent(0, 50, 1000) == 0.0);

  Cell cell(params());
  cell.add_slice(1, wrr(100));
  cell.add_ue(0x46, 1, 9);
  for (int t = 0; t < 10; ++t) {
    cell.enqueue(0x46, 1, 289);  // 8 PRBs each
    cell.step_tti();
  }
  auto r = cell.rollup();
  REQUIRE(r.size() == 1);
  CHECK(r[0].dl_prb_used == 80);
  CHECK(r[0].dl_prb_assigned == 500);
  CHECK(r[0].interval_tti == 10);
  CHECK(r[0].load_percent == doctest::Approx(100.0 * 80 / 500));
  auto again = cell.rollup();
  CHECK(again[0].dl_prb_used == 0);
  CHECK(again[0].interval_tti == 0);
}
