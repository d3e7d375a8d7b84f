#include <doctest.h>

#include <cmath>
#include <sstream>

#include "bbandit/baselines.hpp"
#include "bbandit/engine.hpp"
#include "bbandit/hard_instances.hpp"

using namespace bbandit;

namespace {

std::string dump(const Policy& p) {
  std::ostringstream os;
  write_tree_dump(os, p.batch_records());
  return os.str();
}

}  // namespace

TEST_CASE("static split factors") {
  CHECK(static_split_factors(7, 3) == std::vector<std::int64_t>{7, 1, 1});
  CHECK(static_split_factors(5, 1) == std::vector<std::int64_t>{5});
}

TEST_CASE("static SE is trajectory-identical to BaSEDB with splits {g, 1, 1}") {
  PlanParams p;
  p.T = 32768;
  p.M = 3;
  p.c_batch = 0.3;
  p.c_thresh = 0.08;
  const auto plan = solve_plan(p);
  const auto inst = make_static_failure_instance(4, 1.0, -1);
  const std::int64_t g = 6;
  const BinningContext ctx{1.0, plan.c0, plan.c1};
  for (std::uint64_t seed : {1ULL, 2ULL, 3ULL}) {
    auto stat = static_se_policy({plan.grid, g}, 1, p.c_thresh, ctx);
    BinningPlan bp = BinningPlan::from(plan);
    bp.split_factors = {g, 1, 1};
    BaSEDBPolicy base(bp);
    const auto a = run_episode(inst, *stat, p.T, seed);
    const auto b = run_episode(inst, base, p.T, seed);
    CHECK(stat->name() == "static_se");
    CHECK(a.regret == b.regret);
    CHECK(a.pulls == b.pulls);
    CHECK(a.inferior_count == b.inferior_count);
    CHECK(dump(*stat) == dump(base));
  }
}

TEST_CASE("static SE with g = 1 is two-armed batched SE on one bin") {
  const auto inst = make_constant_instance(0.9, 0.1);
  auto pol = static_se_policy({{0, 1000, 5000, 10000}, 1}, 1, 1.0, {});
  run_episode(inst, *pol, 10000, 4);
  for (const auto& rec : pol->batch_records()) CHECK(rec.leaves.size() == 1);
  // 4 sqrt(ln 20000 / 1000) = 0.40 < 0.8, so arm -1 goes after the first batch.
  CHECK(pol->batch_records()[0].leaves[0].arms_after == 0b01);
}

TEST_CASE("BSE eliminates at the first comparison where U < 1 on deterministic rewards") {
  // U(m, 1000, 1) = 4 sqrt(ln 2000 / m) < 1 iff m > 16 ln 2000 = 121.6, so m = 122.
  const auto inst = make_constant_instance(1.0, 0.0);
  OnlineBSEPolicy pol({1, 1.0}, 1000, 1);
  Rng rng(1);
  const Point x{0.5};
  for (int m = 1; m <= 121; ++m) {
    const Arm a = pol.select(x);
    pol.observe({x, a, inst.draw_reward(a, x, rng)});
  }
  CHECK(pol.bin(0).active == kBothArms);
  const Arm a = pol.select(x);
  pol.observe({x, a, inst.draw_reward(a, x, rng)});
  CHECK(pol.bin(0).active == 0b01);
  for (int k = 0; k < 10; ++k) CHECK(pol.select(x) == Arm::Plus);
}

TEST_CASE("BSE removes an arm with gap 0.5 within 500 in-bin pulls") {
  // At c_thresh = 1, U(500, 5e4, 1) = 4 sqrt(ln 1e5 / 500) = 0.607 exceeds the gap itself,
  // so the bound only applies to a tuned threshold; 0.2 is the value the fig3 study runs.
  // There U(m) = 0.8 sqrt(11.51 / m); exact means clear it from m = 30, and Hoeffding on the
  // difference of two means over 250 pulls each puts the miss probability far below 1%.
  CHECK(threshold_U(500, 50000, 1.0, 1, 1.0) > 0.5);
  const auto inst = make_constant_instance(0.75, 0.25);
  const int trials = 1000;
  int removed = 0;
  Rng rng(77);
  const Point x{0.5};
  for (int k = 0; k < trials; ++k) {
    OnlineBSEPolicy pol({1, 0.2}, 50000, 1);
    for (int m = 0; m < 500 && pol.bin(0).active == kBothArms; ++m) {
      const Arm a = pol.select(x);
      pol.observe({x, a, inst.draw_reward(a, x, rng)});
    }
    removed += pol.bin(0).active == 0b01 ? 1 : 0;
  }
  CHECK(removed >= 990);
}

TEST_CASE("BSE keeps both arms on a flat instance") {
  const auto inst = make_constant_instance(0.5, 0.5);
  const int reps = 200;
  int kept = 0;
  for (int r = 0; r < reps; ++r) {
    OnlineBSEPolicy pol({1, 1.0}, 10000, 1);
    run_episode(inst, pol, 10000, replication_seed(9, 0, r));
    kept += pol.bin(0).active == kBothArms ? 1 : 0;
  }
  CHECK(kept >= 190);
}

TEST_CASE("property: BSE never removes the last arm") {
  for (int r = 0; r < 30; ++r) {
    const auto inst = make_cz_instance(8, 0.5, 1.0, 1.0, 1, std::uint64_t(r));
    OnlineBSEPolicy pol({8, 0.05}, 20000, 1);
    run_episode(inst, pol, 20000, r);
    for (int b = 0; b < 8; ++b) CHECK(pol.bin(b).active != 0);
  }
  OnlineBSEPolicy two({3, 1.0}, 1000, 2);
  CHECK(two.bins_per_axis() == 3);
  CHECK(two.bin_of(Point{0.5, 1.0}) == 1 * 3 + 2);
  CHECK_THROWS_AS(OnlineBSEPolicy({1000, 1.0}, 100, 1), std::invalid_argument);
}

TEST_CASE("oracle has zero regret") {
  const auto inst = make_experiment_instance(std::vector<int>{1, -1, 1, -1});
  OraclePolicy pol(inst, 20000);
  const auto res = run_episode(inst, pol, 20000, 3);
  CHECK(res.regret == 0.0);
  CHECK(res.inferior_count == 0);
  CHECK(pol.select(Point{0.125}) == Arm::Plus);
  CHECK(pol.select(Point{0.375}) == Arm::Minus);
  CHECK(pol.select(Point{0.0}) == Arm::Plus);
}

TEST_CASE("fixed arms split the total gap") {
  const auto inst = make_experiment_instance(std::vector<int>{1, -1, -1, 1});
  const std::int64_t T = 5000;
  FixedArmPolicy plus(Arm::Plus, T), minus(Arm::Minus, T);
  const double a = run_episode(inst, plus, T, 12).regret;
  const double b = run_episode(inst, minus, T, 12).regret;
  // Replay the same stream: one context then one reward uniform per round.
  Rng rng(12);
  double total = 0.0;
  for (std::int64_t t = 0; t < T; ++t) {
    const Point x = inst.sample_context(rng);
    rng.uniform();
    total += std::abs(inst.mean_reward(Arm::Plus, x) - 0.5);
  }
  CHECK(a + b == doctest::Approx(total).epsilon(1e-12));

  const auto down = make_experiment_instance(std::vector<int>{-1, -1, -1, -1});
  FixedArmPolicy m2(Arm::Minus, T);
  CHECK(run_episode(down, m2, T, 1).regret == 0.0);
}
