#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>
#include <set>
#include <sstream>

#include "bbandit/basedb.hpp"
#include "bbandit/engine.hpp"
#include "bbandit/hard_instances.hpp"

using namespace bbandit;

namespace {

BinningPlan manual_plan(std::vector<std::int64_t> grid, std::vector<std::int64_t> splits, int d = 1,
                        double c_thresh = 1.0) {
  BinningPlan p;
  p.grid = std::move(grid);
  p.split_factors = std::move(splits);
  p.d = d;
  p.c_thresh = c_thresh;
  return p;
}

// c_thresh that makes U(m, T, w, d) equal to target.
double c_for(double target, std::int64_t m, std::int64_t T, double w, int d) {
  return target / threshold_U(m, T, w, d, 1.0);
}

// Pull the located leaf until each arm has the requested number of pulls with the given successes.
void feed(PolicyState& s, const Point& x, int n_plus, int ones_plus, int n_minus, int ones_minus) {
  int np = 0, nm = 0;
  while (np < n_plus || nm < n_minus) {
    const Arm a = s.select_arm(x);
    if (a == Arm::Plus) {
      if (np < n_plus) s.record_outcome(x, a, np < ones_plus ? 1.0 : 0.0);
      ++np;
    } else {
      if (nm < n_minus) s.record_outcome(x, a, nm < ones_minus ? 1.0 : 0.0);
      ++nm;
    }
  }
}

void check_tiling(const PolicyState& s, Rng& rng) {
  const int d = s.plan().d;
  double vol = 0.0;
  for (int li : s.leaves()) {
    const auto& n = s.node(li);
    REQUIRE(n.is_leaf());
    REQUIRE(n.active != 0);
    vol += n.box(d).volume();
  }
  CHECK(vol == doctest::Approx(1.0));
  // Each probe point lies in exactly one leaf box under the half-open convention.
  for (int k = 0; k < 500; ++k) {
    Point x(d);
    for (int j = 0; j < d; ++j) x[j] = rng.uniform();
    int owners = 0;
    for (int li : s.leaves()) {
      const Box b = s.node(li).box(d);
      bool in = true;
      for (int j = 0; j < d; ++j) in = in && x[j] >= b.lo[j] && x[j] < b.hi[j];
      owners += in ? 1 : 0;
    }
    REQUIRE(owners == 1);
    const Box own = s.node(s.locate(x)).box(d);
    for (int j = 0; j < d; ++j) REQUIRE((x[j] >= own.lo[j] && x[j] < own.hi[j]));
  }
}

// Every child's arm set is contained in its parent's.
void check_monotone(const PolicyState& s) {
  const int d = s.plan().d;
  std::int64_t top = 1;
  for (int j = 0; j < d; ++j) top *= s.plan().split_factors[0];
  std::function<void(int)> walk = [&](int idx) {
    const auto& n = s.node(idx);
    if (n.is_leaf()) return;
    std::int64_t kids = 1;
    for (int j = 0; j < d; ++j) kids *= n.child_split;
    for (std::int64_t c = 0; c < kids; ++c) {
      const auto& ch = s.node(n.first_child + static_cast<int>(c));
      REQUIRE((ch.active & ~n.active) == 0);
      REQUIRE(ch.layer == n.layer + 1);
      walk(n.first_child + static_cast<int>(c));
    }
  };
  for (std::int64_t i = 0; i < top; ++i) walk(static_cast<int>(i));
}

}  // namespace

TEST_CASE("threshold U") {
  CHECK(threshold_U(100, 1000, 0.5, 1) == doctest::Approx(1.0513).epsilon(1e-4));
  CHECK(threshold_U(400, 1000, 0.5, 1) == doctest::Approx(threshold_U(100, 1000, 0.5, 1) / 2));
  CHECK(threshold_U(100, 1000, 0.5, 1, 0.5) == doctest::Approx(threshold_U(100, 1000, 0.5, 1) / 2));
  CHECK_THROWS_AS(threshold_U(0, 1000, 0.5, 1), std::invalid_argument);
  CHECK_THROWS_AS(threshold_U(10, 10, 0.01, 1), std::invalid_argument);
}

TEST_CASE("locate") {
  PolicyState s(manual_plan({0, 10, 20}, {4, 1}));
  CHECK(s.node(s.locate(Point{0.3})).lattice[0] == 1);
  CHECK(s.node(s.locate(Point{1.0})).lattice[0] == 3);
  CHECK(s.node(s.locate(Point{0.25})).lattice[0] == 1);
  CHECK(s.node(s.locate(Point{0.0})).lattice[0] == 0);

  PolicyState s2(manual_plan({0, 10, 20}, {2, 1}, 2));
  const auto& n = s2.node(s2.locate(Point{0.6, 0.1}));
  // floor(x_j / w) + 1 = (2, 1) in 1-based terms.
  CHECK(n.lattice[0] + 1 == 2);
  CHECK(n.lattice[1] + 1 == 1);
}

TEST_CASE("round robin starts with +1 and is per leaf") {
  PolicyState s(manual_plan({0, 10, 20}, {2, 1}));
  const Point a{0.1}, b{0.9};
  CHECK(s.select_arm(a) == Arm::Plus);
  CHECK(s.select_arm(b) == Arm::Plus);
  CHECK(s.select_arm(a) == Arm::Minus);
  CHECK(s.select_arm(b) == Arm::Minus);
  CHECK(s.select_arm(a) == Arm::Plus);
}

TEST_CASE("record outcome accumulates per arm") {
  PolicyState s(manual_plan({0, 200, 400}, {1, 1}));
  const Point x{0.5};
  s.record_outcome(x, Arm::Plus, 1.0);
  s.record_outcome(x, Arm::Plus, 0.0);
  CHECK(s.node(s.locate(x)).mean(Arm::Plus) == 0.5);
  for (int k = 0; k < 100; ++k) s.record_outcome(x, Arm::Minus, 1.0);
  CHECK(s.node(s.locate(x)).pulls[1] == 100);
  CHECK(s.node(s.locate(x)).reward_sums[1] == 100.0);
}

TEST_CASE("eliminate when the gap exceeds U") {
  const std::int64_t T = 10000;
  // 10 pulls per arm, means 0.9 and 0.1, U = 0.3.
  const double c = c_for(0.3, 20, T, 1.0, 1);
  PolicyState s(manual_plan({0, 100, T}, {1, 1}, 1, c));
  const Point x{0.4};
  feed(s, x, 10, 9, 10, 1);
  const auto rec = s.end_of_batch_update(1, 2);
  REQUIRE(rec.leaves.size() == 1);
  CHECK(rec.leaves[0].arms_before == kBothArms);
  CHECK(rec.leaves[0].arms_after == 0b01);
  CHECK_FALSE(rec.leaves[0].split);
  REQUIRE(s.leaves().size() == 1);
  CHECK(s.select_arm(x) == Arm::Plus);
  CHECK(s.select_arm(x) == Arm::Plus);
  CHECK_THROWS_AS(s.record_outcome(x, Arm::Minus, 1.0), std::logic_error);
}

TEST_CASE("no elimination below U: split into children with both arms") {
  const std::int64_t T = 10000;
  const double c = c_for(0.3, 100, T, 1.0, 1);
  PolicyState s(manual_plan({0, 200, 300, T}, {1, 2, 1}, 1, c));
  feed(s, Point{0.3}, 50, 26, 50, 24);
  const auto rec = s.end_of_batch_update(1, 2);
  CHECK(rec.leaves[0].arms_after == kBothArms);
  CHECK(rec.leaves[0].split);
  REQUIRE(s.leaves().size() == 2);
  for (int li : s.leaves()) {
    CHECK(s.node(li).active == kBothArms);
    CHECK(s.node(li).width == 0.5);
    CHECK(s.node(li).pulls[0] == 0);
  }
}

TEST_CASE("strict inequality at U") {
  // Gap exactly equal to U must not eliminate.
  const std::int64_t T = 10000;
  const double c = c_for(0.8, 20, T, 1.0, 1);
  PolicyState s(manual_plan({0, 100, T}, {1, 1}, 1, c));
  feed(s, Point{0.5}, 10, 9, 10, 1);
  CHECK(s.end_of_batch_update(1, 1).leaves[0].arms_after == kBothArms);
}

TEST_CASE("zero pulls skip elimination") {
  PolicyState s(manual_plan({0, 100, 1000}, {1, 1}, 1, 1e-6));
  const Point x{0.5};
  REQUIRE(s.select_arm(x) == Arm::Plus);
  s.record_outcome(x, Arm::Plus, 1.0);
  CHECK(s.end_of_batch_update(1, 1).leaves[0].arms_after == kBothArms);
}

TEST_CASE("final batch pulls the smallest-index arm") {
  PolicyState s(manual_plan({0, 10, 20}, {1, 1}));
  s.end_of_batch_update(1, 1);
  for (int k = 0; k < 5; ++k) CHECK(s.select_arm(Point{0.2}) == Arm::Plus);
}

TEST_CASE("batch index must advance in order") {
  PolicyState s(manual_plan({0, 10, 20, 30}, {1, 1, 1}));
  CHECK_THROWS_AS(s.end_of_batch_update(2, 1), std::logic_error);
  s.end_of_batch_update(1, 1);
  s.end_of_batch_update(2, 1);
  CHECK_THROWS_AS(s.end_of_batch_update(3, 1), std::logic_error);
}

TEST_CASE("tree growth replay with G = {4, 3, 1}") {
  const std::int64_t T = 1000;
  PolicyState s(manual_plan({0, 400, 800, T}, {4, 3, 1}));
  // U(100, 1000, 1/4) = 4 sqrt(ln 500 / 100) = 0.997 < 1.
  feed(s, Point{0.1}, 50, 25, 50, 25);
  feed(s, Point{0.3}, 50, 50, 50, 0);
  feed(s, Point{0.6}, 50, 0, 50, 50);
  feed(s, Point{0.9}, 50, 20, 50, 30);
  const auto rec = s.end_of_batch_update(1, 3);
  REQUIRE(rec.leaves.size() == 4);
  CHECK(rec.leaves[0].split);
  CHECK(rec.leaves[1].arms_after == 0b01);
  CHECK(rec.leaves[2].arms_after == 0b10);
  CHECK(rec.leaves[3].split);
  CHECK_FALSE(rec.leaves[1].split);
  CHECK_FALSE(rec.leaves[2].split);

  std::vector<double> widths;
  for (int li : s.leaves()) widths.push_back(s.node(li).width);
  REQUIRE(widths.size() == 8);
  const double tw = 1.0 / 12.0;
  const std::vector<double> expect{tw, tw, tw, 0.25, 0.25, tw, tw, tw};
  for (std::size_t k = 0; k < 8; ++k) CHECK(widths[k] == doctest::Approx(expect[k]));
  CHECK(s.node(s.locate(Point{0.1})).lattice[0] == 1);  // [1/12, 2/12)
  CHECK(s.node(s.locate(Point{0.1})).layer == 2);
  Rng rng(1);
  check_tiling(s, rng);
}

TEST_CASE("property: tiling, monotone knowledge and depth over random runs") {
  std::mt19937_64 gen(7);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 40; ++trial) {
    const int d = 1 + trial % 2;
    PlanParams p;
    p.T = 20000 + static_cast<std::int64_t>(u(gen) * 80000);
    p.M = 2 + trial % 4;
    p.d = d;
    p.alpha = 0.5;
    p.c_batch = 0.3;
    p.c_thresh = 0.05 + 0.3 * u(gen);
    BatchPlan plan;
    try {
      plan = solve_plan(p);
    } catch (const InfeasiblePlan&) {
      continue;
    }
    const auto inst = make_cz_instance(4, 0.5, 1.0, 1.0, d, std::uint64_t(trial));
    PolicyState s(BinningPlan::from(plan));
    Rng rng(trial);
    const int M = plan.M();
    for (int i = 1; i < M; ++i) {
      for (std::int64_t t = plan.grid[i - 1]; t < plan.grid[i]; ++t) {
        const Point x = inst.sample_context(rng);
        const Arm a = s.select_arm(x);
        s.record_outcome(x, a, inst.draw_reward(a, x, rng));
      }
      s.end_of_batch_update(i, plan.split_factors[i]);
      check_tiling(s, rng);
      check_monotone(s);
      for (int li : s.leaves()) {
        const auto& n = s.node(li);
        REQUIRE(n.layer <= i + 1);
        REQUIRE(n.layer <= M - 1);
        REQUIRE(n.width == doctest::Approx(plan.widths[n.layer]));
      }
    }
  }
}

TEST_CASE("episodes are deterministic in the seed") {
  PlanParams p;
  p.T = 50000;
  p.M = 3;
  p.alpha = 0.2;
  p.L = 2.0;
  p.c_thresh = 0.1;
  const auto plan = solve_plan(p);
  const auto inst = make_experiment_instance(std::uint64_t{3});
  auto dump = [&](std::uint64_t seed) {
    BaSEDBPolicy pol(BinningPlan::from(plan));
    const auto res = run_episode(inst, pol, p.T, seed);
    std::ostringstream os;
    write_tree_dump(os, pol.batch_records());
    os << res.regret;
    return os.str();
  };
  CHECK(dump(5) == dump(5));
  CHECK(dump(5) != dump(6));
}

TEST_CASE("tree dump format") {
  PolicyState s(manual_plan({0, 10, 20}, {2, 1}, 2));
  std::vector<BatchRecord> recs{s.snapshot()};
  std::ostringstream os;
  write_tree_dump(os, recs);
  std::istringstream in(os.str());
  std::string line;
  std::getline(in, line);
  CHECK(line.rfind("batch,layer,lattice", 0) == 0);
  std::getline(in, line);
  CHECK(line.rfind("1,1,1:1,0.5,+1|-1,+1|-1,0,", 0) == 0);
}
