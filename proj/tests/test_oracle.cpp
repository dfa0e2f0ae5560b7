#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>

#include "fixtures.hpp"
#include "skyforge/errors.hpp"
#include "skyforge/oracle.hpp"
#include "skyforge/skyline.hpp"

using namespace skyforge;
using fixtures::bits;

namespace {

std::size_t closed_form_states(const std::vector<std::size_t>& widths) {
  // each attribute: absent, or any non-empty subset of its literals
  std::size_t n = 1;
  for (auto w : widths) n *= std::size_t{1} << w;
  return n - 1;
}

}  // namespace

TEST_CASE("naive predicates agree with the library") {
  std::mt19937_64 rng(99);
  std::uniform_int_distribution<int> d(1, 10);
  for (int i = 0; i < 5000; ++i) {
    std::vector<double> a(3), b(3);
    for (auto& x : a) x = d(rng) / 10.0;
    for (auto& x : b) x = d(rng) / 10.0;
    CHECK(naive_dominates(a, b) == dominates(a, b));
    for (double e : {0.0, 0.05, 0.2, 0.5}) CHECK(naive_eps_dominates(a, b, e) == eps_dominates(a, b, e));
  }
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<std::vector<double>> vs(9, std::vector<double>(3));
    for (auto& v : vs)
      for (auto& x : v) x = d(rng) / 10.0;
    CHECK(naive_pareto(vs) == exact_pareto(vs));
  }
}

TEST_CASE("enumeration counts") {
  for (const auto& widths : std::vector<std::vector<std::size_t>>{{1, 1}, {3}, {2, 2, 2, 2}, {1, 2, 3}}) {
    StateSpace space(fixtures::sparse_table(widths));
    MeasureSet m(fixtures::unit_specs(2, kNormFloor));
    fixtures::HashEstimator est(1, 2);
    TestLog log;
    auto all = enumerate_all(space, est, log, m);
    CHECK(all.states.size() == closed_form_states(widths));
    CHECK(all.total == std::size_t{1} << space.num_bits());
    CHECK(all.degenerate + all.states.size() == all.total);
    CHECK(std::is_sorted(all.states.begin(), all.states.end(),
                         [](const auto& a, const auto& b) { return a.bitmap < b.bitmap; }));
  }
  CHECK(closed_form_states({2, 2, 2, 2}) == 255);
}

TEST_CASE("enumeration refuses large layouts") {
  StateSpace space(fixtures::sparse_table({3, 3, 3}));
  MeasureSet m(fixtures::unit_specs(2, kNormFloor));
  fixtures::HashEstimator est(1, 2);
  TestLog log;
  try {
    enumerate_all(space, est, log, m, 8);
    FAIL("expected refusal");
  } catch (const EnumerationLimitError& e) {
    CHECK(e.required_bits == 9);
  }
  CHECK(est.calls == 0);
}

TEST_CASE("eps cover check") {
  StateSpace space(fixtures::sparse_table({2, 2}));
  MeasureSet m(fixtures::unit_specs(3, kNormFloor));
  fixtures::HashEstimator est(4, 3);
  TestLog log;
  auto all = enumerate_all(space, est, log, m);

  SkylineGrid empty(m, 0.2);
  CHECK(check_eps_cover(empty, all.states, 0.2).eps_cover_violations.size() == all.states.size());

  for (double eps : {0.01, 0.2, 0.5}) {
    SkylineGrid g(m, eps);
    for (const auto& s : exact_pareto(all.states)) g.submit(s.bitmap, s.perf->values());
    CHECK(check_eps_cover(g, all.states, eps).eps_cover_violations.empty());
  }
}

TEST_CASE("div bound") {
  StateSpace space(fixtures::sparse_table({2, 2}));
  MeasureSet m(fixtures::unit_specs(2, kNormFloor));
  TestLog log;
  std::vector<SearchState> ground;
  for (auto s : {"1000", "0100", "0010", "0001", "1100"}) {
    ground.push_back({bits(s), 1, PerfVector::of({0.5, 0.5})});
    log.append({bits(s), {}, {0.5, 0.5}, 1});
  }
  // alpha = 0 with equal vectors: every pair scores 0, any subset is optimal
  CHECK(check_div_bound({ground[0], ground[1]}, ground, 2, 0.0, log, space.layout()) == 1.0);
  // single literals of different attributes are orthogonal and maximal
  CHECK(check_div_bound({ground[0], ground[2]}, ground, 2, 1.0, log, space.layout()) == doctest::Approx(1.0));
  CHECK(check_div_bound({ground[0], ground[4]}, ground, 2, 1.0, log, space.layout()) < 1.0);
  CHECK_THROWS_AS(check_div_bound({}, ground, 6, 0.5, log, space.layout()), ArgumentError);
  std::vector<SearchState> big(15, ground[0]);
  CHECK_THROWS_AS(check_div_bound({}, big, 2, 0.5, log, space.layout()), ArgumentError);
}

TEST_CASE("verification of complete runs") {
  StateSpace space(fixtures::sparse_table({2, 1, 2}, {"A", "B", "T"}));
  MeasureSet m(fixtures::unit_specs(3, kNormFloor, 0.9));
  for (auto alg : {Algorithm::Apx, Algorithm::Bi, Algorithm::NoBi, Algorithm::Div}) {
    SearchConfig cfg;
    cfg.algorithm = alg;
    cfg.epsilon = 0.2;
    cfg.target = "T";
    cfg.k = 3;
    fixtures::HashEstimator est(21, 3, 0.4);
    TestLog log;
    auto r = run_search(space, m, cfg, est, log);
    auto rep = verify_run(space, m, cfg, est, r, log);
    CHECK(report_ok(rep));
    CHECK(rep.total_states == 32);
    CHECK(rep.front_checked == (alg == Algorithm::Apx));
    CHECK(rep.div_ratio.has_value() == (alg == Algorithm::Div));
    auto j = rep.to_json();
    CHECK(j["ok"] == true);

    // an empty grid must be caught
    auto broken = r;
    for (const auto& e : r.grid.occupants()) broken.grid.erase(e.bitmap);
    CHECK_FALSE(report_ok(verify_run(space, m, cfg, est, broken, log)));
  }
}
