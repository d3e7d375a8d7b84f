#include "bbandit/grid_planner.hpp"

#include <cmath>
#include <limits>
#include <ostream>
#include <sstream>

#include <fmt/format.h>

#include "bbandit/core.hpp"

namespace bbandit {

namespace {

void validate(const PlanParams& p) {
  if (p.M < 1) throw std::invalid_argument("M must be >= 1");
  if (p.T < p.M) throw std::invalid_argument("T must be >= M");
  if (!(p.alpha > 0.0)) throw std::invalid_argument("alpha must be positive");
  if (!(p.beta > 0.0 && p.beta <= 1.0)) throw std::invalid_argument("beta must lie in (0,1]");
  if (p.d < 1) throw std::invalid_argument("d must be >= 1");
  if (!(p.L > 0.0)) throw std::invalid_argument("L must be positive");
  if (!(p.c_batch > 0.0) || !(p.c_thresh > 0.0)) throw std::invalid_argument("c_batch and c_thresh must be positive");
  if (p.alpha * p.beta > 1.0 + 1e-12)
    throw std::invalid_argument("alpha*beta > 1: the problem reduces to a static multi-armed bandit (need alpha*beta <= 1)");
  if (p.M > 1 && p.M > p.D1 * std::log(static_cast<double>(p.T)))
    throw std::invalid_argument("M exceeds D1 log T");
}

/// floor(c_batch * l * w^{-(2beta+d)} * log(T w^d)); -1 when the log is not positive.
std::int64_t batch_length(const PlanParams& p, double l, double w) {
  const double inner = static_cast<double>(p.T) * std::pow(w, p.d);
  if (!(inner > 1.0)) return -1;
  const double len = p.c_batch * l * std::pow(w, -(2.0 * p.beta + p.d)) * std::log(inner);
  if (len > 9.0e18) return std::numeric_limits<std::int64_t>::max();
  return static_cast<std::int64_t>(std::floor(len));
}

}  // namespace

double gamma_exponent(double alpha, double beta, int d) { return beta * (1.0 + alpha) / (2.0 * beta + d); }

double rate_exponent(double alpha, double beta, int d, int M) {
  const double g = gamma_exponent(alpha, beta, d);
  return (1.0 - g) / (1.0 - std::pow(g, M));
}

double smoothness_c0(double L, double beta, int d) { return 2.0 * L * std::pow(static_cast<double>(d), beta / 2.0) + 1.0; }

std::vector<double> widths_from_splits(const std::vector<std::int64_t>& split_factors) {
  std::vector<double> w;
  w.reserve(split_factors.size());
  double prod = 1.0;
  for (std::size_t i = 0; i < split_factors.size(); ++i) {
    w.push_back(1.0 / prod);
    prod *= static_cast<double>(split_factors[i]);
  }
  return w;
}

PlanTrial trial_plan(const PlanParams& p, double b) {
  const int M = p.M;
  const double gamma = gamma_exponent(p.alpha, p.beta, p.d);
  const double l = 2.0 / std::pow(smoothness_c0(p.L, p.beta, p.d), 2.0);
  PlanTrial trial;
  trial.split_factors.assign(M, 1);
  if (M >= 2) {
    trial.split_factors[0] = std::max<std::int64_t>(1, guarded_floor(std::pow(b, 1.0 / (2.0 * p.beta + p.d))));
    for (int i = 1; i <= M - 2; ++i)
      trial.split_factors[i] =
          std::max<std::int64_t>(1, guarded_floor(std::pow(static_cast<double>(trial.split_factors[i - 1]), gamma)));
  }
  const auto widths = widths_from_splits(trial.split_factors);
  trial.grid.assign(1, 0);
  bool positive = true;
  for (int i = 1; i <= M - 1; ++i) {
    const std::int64_t len = batch_length(p, l, widths[i]);
    if (len >= p.T || trial.grid.back() >= p.T - len) return trial;
    positive = positive && len >= 1;
    trial.grid.push_back(trial.grid.back() + std::max<std::int64_t>(len, 0));
  }
  if (M == 1) {
    trial.fits = trial.feasible = true;
    return trial;
  }
  // Natural length of the final batch: one more refinement step of the split recursion,
  // left unrounded.
  const double virtual_split = std::max(1.0, std::pow(static_cast<double>(trial.split_factors[M - 2]), gamma));
  const double w_final = widths[M - 1] / virtual_split;
  const std::int64_t target = batch_length(p, l, w_final);
  trial.final_target = target < 0 ? std::numeric_limits<std::int64_t>::max() : target;
  const std::int64_t last = trial.grid.back();
  trial.fits = last < p.T && trial.final_target <= p.T - last;
  trial.feasible = trial.fits && positive && trial.final_target >= 1;
  return trial;
}

BatchPlan solve_plan(const PlanParams& params) {
  validate(params);
  BatchPlan plan;
  plan.params = params;
  plan.gamma = gamma_exponent(params.alpha, params.beta, params.d);
  plan.c0 = smoothness_c0(params.L, params.beta, params.d);
  plan.c1 = 8.0 * plan.c0;
  const double l = 2.0 / (plan.c0 * plan.c0);
  const int M = params.M;

  if (M == 1) {
    plan.b = 1.0;
    plan.split_factors = {1};
    plan.widths = {1.0};
    plan.grid = {0, params.T};
    return plan;
  }

  // Batch lengths grow with b, so "fits in T" is monotone and bisection finds its edge.
  // Below that edge some g_0 may still give a batch shorter than one round; the plan only
  // depends on g_0, so scan g_0 downward for the largest fully feasible one.
  double lo = 1.0;
  double hi = static_cast<double>(params.T);
  if (trial_plan(params, hi).fits) {
    lo = hi;
  } else {
    for (int it = 0; it < 60; ++it) {
      const double mid = 0.5 * (lo + hi);
      if (trial_plan(params, mid).fits)
        lo = mid;
      else
        hi = mid;
    }
  }
  const double root = 1.0 / (2.0 * params.beta + params.d);
  std::int64_t g0 = std::max<std::int64_t>(1, guarded_floor(std::pow(lo, root)));
  while (g0 >= 1 && !trial_plan(params, std::pow(static_cast<double>(g0), 1.0 / root)).feasible) --g0;
  if (g0 < 1) throw InfeasiblePlan(fmt::format("no grid with {} batches fits horizon T={}", M, params.T));
  lo = std::pow(static_cast<double>(g0), 1.0 / root);
  auto trial = trial_plan(params, lo);
  // Every b with the same g_0 yields the same plan; report the smallest one.
  plan.b = std::pow(static_cast<double>(trial.split_factors[0]), 2.0 * params.beta + params.d);
  plan.split_factors = trial.split_factors;
  plan.widths = widths_from_splits(plan.split_factors);
  plan.grid = trial.grid;
  plan.grid.push_back(params.T);
  plan.l_consts.assign(M - 1, l);
  return plan;
}

double width_of_layer(const BatchPlan& plan, int i) {
  if (i < 0 || i >= static_cast<int>(plan.widths.size())) throw std::out_of_range("width_of_layer: index out of range");
  return plan.widths[i];
}

void print_plan_table(std::ostream& os, const BatchPlan& plan) {
  os << fmt::format("gamma={:.6g} b={:.6g} c0={:.6g} c1={:.6g}\n", plan.gamma, plan.b, plan.c0, plan.c1);
  os << fmt::format("{:>3} {:>12} {:>12} {:>6} {:>14}\n", "i", "t_i", "dt_i", "g_i", "w_i");
  for (int i = 0; i <= plan.M(); ++i) {
    const std::int64_t dt = i == 0 ? 0 : plan.grid[i] - plan.grid[i - 1];
    if (i < plan.M())
      os << fmt::format("{:>3} {:>12} {:>12} {:>6} {:>14.8g}\n", i, plan.grid[i], dt, plan.split_factors[i], plan.widths[i]);
    else
      os << fmt::format("{:>3} {:>12} {:>12} {:>6} {:>14}\n", i, plan.grid[i], dt, "-", "-");
  }
}

std::string plan_summary(const BatchPlan& plan) {
  std::ostringstream os;
  os << "grid=";
  for (std::size_t i = 0; i < plan.grid.size(); ++i) os << (i ? ";" : "") << plan.grid[i];
  os << " splits=";
  for (std::size_t i = 0; i < plan.split_factors.size(); ++i) os << (i ? ";" : "") << plan.split_factors[i];
  os << fmt::format(" gamma={:.6g} b={:.6g} c0={:.6g} c1={:.6g}", plan.gamma, plan.b, plan.c0, plan.c1);
  return os.str();
}

}  // namespace bbandit
