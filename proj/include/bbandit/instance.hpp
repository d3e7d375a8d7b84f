#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "bbandit/core.hpp"

namespace bbandit {

/// One tent-shaped bump: sign * amplitude * (1 - ||x - center||_inf / half_width)^beta
/// on the closed cube of the given half-width, zero outside.
struct Bump {
  Point center;
  double half_width = 0.0;
  double amplitude = 0.0;
  int sign = 1;
};

/// A mean-reward surface: baseline plus a sum of bumps with a shared exponent.
/// Evaluation uses a regular lookup grid so cost does not scale with the bump count.
class BumpField {
 public:
  BumpField() = default;
  BumpField(int dim, double baseline, double beta, std::vector<Bump> bumps);

  static BumpField constant(int dim, double value) { return BumpField(dim, value, 1.0, {}); }

  double operator()(const Point& x) const;

  int dim() const { return dim_; }
  double baseline() const { return baseline_; }
  double beta() const { return beta_; }
  const std::vector<Bump>& bumps() const { return bumps_; }

  /// Indices of bumps whose support intersects the closed box.
  std::vector<int> bumps_touching(const Box& box) const;
  /// True when no two bump supports share interior points.
  bool supports_disjoint() const;
  double min_value() const;
  double max_value() const;

 private:
  int cell_of(const Point& x) const;

  int dim_ = 1;
  double baseline_ = 0.5;
  double beta_ = 1.0;
  std::vector<Bump> bumps_;
  int grid_ = 1;
  std::vector<int> cell_start_;
  std::vector<int> cell_items_;
};

/// Covariate distribution: uniform on [0,1]^d or piecewise constant on a regular k^d grid.
class CovariateLaw {
 public:
  static CovariateLaw uniform(int dim);
  /// weights are row-major over cells_per_axis^dim cells; they need not be normalized.
  static CovariateLaw piecewise(int dim, int cells_per_axis, std::vector<double> weights);

  Point sample(Rng& rng) const;
  /// P_X(box) for a box inside [0,1]^d.
  double mass(const Box& box) const;
  bool is_uniform() const { return cells_ == 1; }
  int dim() const { return dim_; }
  /// Lower and upper density bounds.
  double density_lower() const { return lower_; }
  double density_upper() const { return upper_; }

 private:
  int dim_ = 1;
  int cells_ = 1;
  std::vector<double> cumulative_;
  std::vector<double> density_;
  double lower_ = 1.0;
  double upper_ = 1.0;
};

/// Smoothness and margin parameters an instance claims to satisfy.
struct DeclaredParams {
  double alpha = 1.0;
  double beta = 1.0;
  double L = 1.0;
  /// Analytic margin constant when the constructor knows one.
  std::optional<double> margin_d0;
};

struct ArmGap {
  Arm arm;
  double gap;
};

/// Two mean-reward surfaces, a covariate law and Bernoulli rewards. Immutable after construction.
class BanditInstance {
 public:
  BanditInstance(std::string name, BumpField f_plus, BumpField f_minus, CovariateLaw law,
                 DeclaredParams declared);

  int dim() const { return f_plus_.dim(); }
  const std::string& name() const { return name_; }
  const DeclaredParams& declared() const { return declared_; }
  const CovariateLaw& covariate_law() const { return law_; }
  const BumpField& surface(Arm a) const { return a == Arm::Plus ? f_plus_ : f_minus_; }

  double mean_reward(Arm a, const Point& x) const { return surface(a)(x); }

  Point sample_context(Rng& rng) const { return law_.sample(rng); }
  /// Bernoulli draw with mean f^{(arm)}(x); consumes exactly one uniform.
  double draw_reward(Arm arm, const Point& x, Rng& rng) const {
    return rng.uniform() < mean_reward(arm, x) ? 1.0 : 0.0;
  }
  /// Optimal arm (ties go to +1) and the absolute gap.
  ArmGap optimal_arm_and_gap(const Point& x) const {
    const double p = f_plus_(x);
    const double m = f_minus_(x);
    return {p >= m ? Arm::Plus : Arm::Minus, std::abs(p - m)};
  }

  /// sup over the closed box of f^{(arm)} - f^{(other arm)}. Exact for bump surfaces:
  /// the candidates are clamped bump centers plus a lattice over the box.
  double sup_advantage(Arm arm, const Box& box) const;

 private:
  std::string name_;
  BumpField f_plus_;
  BumpField f_minus_;
  CovariateLaw law_;
  DeclaredParams declared_;
};

struct SmoothnessReport {
  double max_violation = 0.0;
  bool holds = true;
};

/// Monte Carlo search for violations of |f(x)-f(x')| <= L ||x-x'||_2^beta over both arms.
/// Half of the pairs are global, half are local perturbations at log-uniform radii.
SmoothnessReport verify_smoothness(const BanditInstance& instance, int n_pairs, Rng& rng,
                                   double tolerance = 1e-9);

struct MarginReport {
  std::vector<double> deltas;
  std::vector<double> probs;
  std::vector<double> std_errors;
  /// Smallest D0 with p(delta) <= D0 delta^alpha over the grid.
  double fitted_d0 = 0.0;
  bool holds = true;
};

/// Estimates P(0 < |f1 - f-1| <= delta) per delta. When the instance declares a margin
/// constant, holds requires p(delta) - 3 SE <= D0 delta^alpha for every delta.
MarginReport verify_margin(const BanditInstance& instance, std::span<const double> deltas,
                           int n_samples, Rng& rng);

}  // namespace bbandit
