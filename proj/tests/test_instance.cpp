#include <doctest.h>

#include <cmath>
#include <vector>

#include "bbandit/hard_instances.hpp"
#include "bbandit/instance.hpp"

using namespace bbandit;

namespace {

BanditInstance redeclare(const BanditInstance& inst, double L) {
  DeclaredParams d = inst.declared();
  d.L = L;
  return BanditInstance(inst.name(), inst.surface(Arm::Plus), inst.surface(Arm::Minus), inst.covariate_law(), d);
}

}  // namespace

TEST_CASE("uniform contexts stay in the unit cube") {
  Rng rng(3);
  for (int d : {1, 2, 3}) {
    const auto law = CovariateLaw::uniform(d);
    for (int k = 0; k < 2000; ++k) {
      const Point x = law.sample(rng);
      REQUIRE(x.dim() == d);
      for (int j = 0; j < d; ++j) {
        CHECK(x[j] >= 0.0);
        CHECK(x[j] <= 1.0);
      }
    }
  }
}

TEST_CASE("uniform context mean matches 1/2") {
  // Uniform(0,1) has mean 1/2 and sd 0.2887; 1e6 draws give SE 2.9e-4.
  const auto inst = make_constant_instance(0.5, 0.5);
  Rng rng(11);
  double s = 0.0;
  const int n = 1'000'000;
  for (int k = 0; k < n; ++k) s += inst.sample_context(rng)[0];
  CHECK(std::abs(s / n - 0.5) <= 0.002);
}

TEST_CASE("piecewise law respects its cell weights") {
  const auto law = CovariateLaw::piecewise(1, 2, {1.0, 3.0});
  CHECK(law.density_lower() == doctest::Approx(0.5));
  CHECK(law.density_upper() == doctest::Approx(1.5));
  Box left{Point{0.0}, Point{0.5}};
  CHECK(law.mass(left) == doctest::Approx(0.25));
  Rng rng(5);
  int in_left = 0;
  const int n = 200'000;
  for (int k = 0; k < n; ++k) in_left += law.sample(rng)[0] < 0.5 ? 1 : 0;
  CHECK(std::abs(in_left / static_cast<double>(n) - 0.25) < 0.005);
}

TEST_CASE("draw_reward follows the Bernoulli mean") {
  const auto half = make_constant_instance(0.5, 0.5);
  Rng rng(7);
  double s = 0.0;
  const int n = 100'000;
  for (int k = 0; k < n; ++k) s += half.draw_reward(Arm::Minus, Point{0.3}, rng);
  CHECK(std::abs(s / n - 0.5) <= 0.01);

  const auto extreme = make_constant_instance(1.0, 0.0);
  for (int k = 0; k < 1000; ++k) {
    CHECK(extreme.draw_reward(Arm::Plus, Point{0.7}, rng) == 1.0);
    CHECK(extreme.draw_reward(Arm::Minus, Point{0.7}, rng) == 0.0);
  }
}

TEST_CASE("draw_reward is reproducible for a fixed seed") {
  const auto inst = make_experiment_instance(std::vector<int>{1, -1, 1, -1});
  Rng a(99), b(99);
  for (int k = 0; k < 5000; ++k) {
    const Point x = inst.sample_context(a);
    const Point y = inst.sample_context(b);
    REQUIRE(x[0] == y[0]);
    REQUIRE(inst.draw_reward(Arm::Plus, x, a) == inst.draw_reward(Arm::Plus, y, b));
  }
}

TEST_CASE("optimal arm and gap on the four-bump instance") {
  const auto plus = make_experiment_instance(std::vector<int>{1, 1, 1, 1});
  auto [arm, gap] = plus.optimal_arm_and_gap(Point{0.125});
  CHECK(arm == Arm::Plus);
  CHECK(gap == doctest::Approx(0.25));
  CHECK(plus.mean_reward(Arm::Plus, Point{0.125}) == doctest::Approx(0.75));

  // f(q_2) = 1/2 - (1/4) phi(0) = 1/4 when omega_2 = -1.
  const auto mixed = make_experiment_instance(std::vector<int>{1, -1, 1, 1});
  auto [arm2, gap2] = mixed.optimal_arm_and_gap(Point{0.375});
  CHECK(arm2 == Arm::Minus);
  CHECK(gap2 == doctest::Approx(0.25));

  // Ties go to +1.
  auto [arm3, gap3] = plus.optimal_arm_and_gap(Point{0.0});
  CHECK(arm3 == Arm::Plus);
  CHECK(gap3 == 0.0);
}

TEST_CASE("gap equals |f(+1) - f(-1)| exactly") {
  const auto inst = make_cz_instance(6, 0.5, 1.0, 1.0, 1, std::uint64_t{17});
  for (int k = 0; k <= 10000; ++k) {
    const Point x{k / 10000.0};
    const double diff = inst.mean_reward(Arm::Plus, x) - inst.mean_reward(Arm::Minus, x);
    REQUIRE(inst.optimal_arm_and_gap(x).gap == std::abs(diff));
  }
}

TEST_CASE("smoothness: constant instance always holds") {
  const auto inst = make_constant_instance(0.5, 0.5, 2, {1.0, 0.3, 0.01, std::nullopt});
  Rng rng(1);
  const auto rep = verify_smoothness(inst, 10000, rng);
  CHECK(rep.holds);
  CHECK(rep.max_violation <= 0.0);
}

TEST_CASE("smoothness: four-bump slope is 2") {
  // Each triangle rises by 1/4 over a half-width of 1/8, slope 2.
  const auto inst = make_experiment_instance(std::vector<int>{1, -1, 1, -1});
  Rng rng(2);
  CHECK(verify_smoothness(inst, 100000, rng).holds);
  const auto tight = redeclare(inst, 1.0);
  Rng rng2(2);
  const auto rep = verify_smoothness(tight, 100000, rng2);
  CHECK_FALSE(rep.holds);
  CHECK(rep.max_violation > 0.0);
}

TEST_CASE("margin: constant gap never falls in (0, delta]") {
  const auto inst = make_constant_instance(1.0, 0.5);
  Rng rng(4);
  const std::vector<double> deltas{0.05, 0.1, 0.4};
  const auto rep = verify_margin(inst, deltas, 20000, rng);
  for (double p : rep.probs) CHECK(p == 0.0);
  CHECK(rep.fitted_d0 == 0.0);
  CHECK(rep.holds);
}

TEST_CASE("margin: four-bump instance has p(delta) = 4 delta") {
  // |f1 - f-1| = (1/4)(1 - 8|x - q_j|) on each bump; gap <= delta on a set of length delta per bump.
  const auto inst = make_experiment_instance(std::vector<int>{1, 1, -1, 1});
  Rng rng(8);
  const std::vector<double> deltas{0.05, 0.1, 0.2};
  const auto rep = verify_margin(inst, deltas, 400000, rng);
  for (std::size_t k = 0; k < deltas.size(); ++k)
    CHECK(std::abs(rep.probs[k] - 4.0 * deltas[k]) <= 3.0 * rep.std_errors[k] + 1e-12);
  CHECK(rep.holds);
}

TEST_CASE("margin: C_z envelope (1+d)(delta/D_phi)^alpha") {
  const double alpha = 0.2, beta = 1.0, L = 1.0;
  const int z = 4;
  const auto inst = make_cz_instance(z, alpha, beta, L, 1, std::vector<int>{1, -1, 1, 1});
  // Independent oracle: each of the s bumps has height h = D_phi / z, and the gap is
  // h (1 - 2z|x - q|), so the set {0 < gap <= delta} has length min(delta/h, 1) / z per bump.
  const double Dphi = std::min(0.5 * L, 0.25);
  const double h = Dphi / z;
  const int s = static_cast<int>(std::ceil(std::pow(z, 1.0 - alpha * beta)));
  Rng rng(12);
  const std::vector<double> deltas{0.01, 0.02, 0.05, 0.1, 0.2};
  const auto rep = verify_margin(inst, deltas, 400000, rng);
  for (std::size_t k = 0; k < deltas.size(); ++k) {
    const double exact = s * std::min(deltas[k] / h, 1.0) / z;
    CHECK(std::abs(rep.probs[k] - exact) <= 3.0 * rep.std_errors[k] + 1e-12);
    CHECK(rep.probs[k] - 3.0 * rep.std_errors[k] <= 2.0 * std::pow(deltas[k] / Dphi, alpha));
  }
  CHECK(rep.holds);
}

TEST_CASE("instances reject out-of-range surfaces") {
  CHECK_THROWS_AS(make_constant_instance(1.2, 0.5), std::invalid_argument);
  CHECK_THROWS_AS(make_constant_instance(0.5, -0.1), std::invalid_argument);
}
