#pragma once

#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

namespace bbandit {

struct PlanParams {
  std::int64_t T = 1000;
  int M = 1;
  double alpha = 1.0;
  double beta = 1.0;
  int d = 1;
  double L = 1.0;
  double c_batch = 1.0;
  double c_thresh = 1.0;
  double D1 = 10.0;
};

/// Raised when no grid exists for the requested (T, M).
class InfeasiblePlan : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct BatchPlan {
  PlanParams params;
  double gamma = 0.0;
  double b = 1.0;
  std::vector<std::int64_t> split_factors;  // g_0 .. g_{M-1}
  std::vector<double> widths;               // w_0 .. w_{M-1}
  std::vector<std::int64_t> grid;           // t_0 .. t_M
  std::vector<double> l_consts;             // l_1 .. l_{M-1}
  double c0 = 0.0;
  double c1 = 0.0;

  int M() const { return params.M; }
  std::int64_t T() const { return params.T; }
};

double gamma_exponent(double alpha, double beta, int d);

/// Regret exponent (1 - gamma) / (1 - gamma^M).
double rate_exponent(double alpha, double beta, int d, int M);

/// c0 = 2 L d^{beta/2} + 1.
double smoothness_c0(double L, double beta, int d);

/// Throws std::invalid_argument for invalid parameters, InfeasiblePlan when T is too
/// small for M batches.
BatchPlan solve_plan(const PlanParams& params);

/// Split factors and batch lengths that a given base b induces. Exposed for tests.
struct PlanTrial {
  std::vector<std::int64_t> split_factors;
  std::vector<std::int64_t> grid;  // t_0 .. t_{M-1}
  std::int64_t final_target = 0;   // natural length of the final batch
  bool fits = false;      // t_{M-1} plus the final target stays within T
  bool feasible = false;  // fits, and every batch has at least one round
};
PlanTrial trial_plan(const PlanParams& params, double b);

double width_of_layer(const BatchPlan& plan, int i);

/// Widths from split factors: w_0 = 1, w_i = 1 / prod_{l<i} g_l.
std::vector<double> widths_from_splits(const std::vector<std::int64_t>& split_factors);

/// Table with columns i, t_i, dt_i, g_i, w_i.
void print_plan_table(std::ostream& os, const BatchPlan& plan);
std::string plan_summary(const BatchPlan& plan);

}  // namespace bbandit
