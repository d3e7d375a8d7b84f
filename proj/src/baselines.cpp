#include "bbandit/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace bbandit {

std::vector<std::int64_t> static_split_factors(std::int64_t g, int M) {
  if (M < 1) throw std::invalid_argument("static_split_factors: M must be >= 1");
  std::vector<std::int64_t> s(M, 1);
  s[0] = g;
  return s;
}

std::unique_ptr<Policy> static_se_policy(const StaticSEConfig& config, int d, double c_thresh,
                                         BinningContext context) {
  if (config.g < 1) throw std::invalid_argument("static_se: g must be >= 1");
  if (config.grid.size() < 2) throw std::invalid_argument("static_se: grid needs at least one batch");
  BinningPlan plan;
  plan.grid = config.grid;
  plan.split_factors = static_split_factors(config.g, static_cast<int>(config.grid.size()) - 1);
  plan.d = d;
  plan.c_thresh = c_thresh;
  plan.context = context;
  return std::make_unique<BaSEDBPolicy>(std::move(plan), "static_se");
}

OnlineBSEPolicy::OnlineBSEPolicy(OnlineBSEConfig config, std::int64_t T, int d)
    : config_(config), d_(d), grid_{0, T} {
  if (config_.g < 1) throw std::invalid_argument("online_bse: g must be >= 1");
  if (T < 1) throw std::invalid_argument("online_bse: T must be >= 1");
  if (d < 1 || d > kMaxDim) throw std::invalid_argument("online_bse: dimension out of range");
  width_ = 1.0 / static_cast<double>(config_.g);
  if (!(2.0 * static_cast<double>(T) * std::pow(width_, d) > 1.0))
    throw std::invalid_argument("online_bse: bins too small for the horizon (need 2 T w^d > 1)");
  std::int64_t n = 1;
  for (int j = 0; j < d; ++j) n *= config_.g;
  bins_.resize(static_cast<std::size_t>(n));
}

int OnlineBSEPolicy::bin_of(const Point& x) const {
  std::int64_t flat = 0;
  for (int j = 0; j < d_; ++j) {
    const auto c = std::clamp<std::int64_t>(static_cast<std::int64_t>(x[j] * static_cast<double>(config_.g)), 0,
                                            config_.g - 1);
    flat = flat * config_.g + c;
  }
  return static_cast<int>(flat);
}

Arm OnlineBSEPolicy::select(const Point& x) {
  Bin& b = bins_[bin_of(x)];
  if (b.active == kBothArms) return (b.rr++ % 2 == 0) ? Arm::Plus : Arm::Minus;
  return (b.active & 1u) ? Arm::Plus : Arm::Minus;
}

void OnlineBSEPolicy::observe(const Observation& obs) {
  Bin& b = bins_[bin_of(obs.x)];
  const int k = arm_index(obs.arm);
  ++b.pulls[k];
  b.sums[k] += obs.reward;
  if (b.active != kBothArms || b.pulls[0] == 0 || b.pulls[1] == 0) return;
  const double u = threshold_U(b.pulls[0] + b.pulls[1], grid_[1], width_, d_, config_.c_thresh);
  const double m0 = b.sums[0] / static_cast<double>(b.pulls[0]);
  const double m1 = b.sums[1] / static_cast<double>(b.pulls[1]);
  // The leader always survives since its own gap is zero.
  if (m0 - m1 > u)
    b.active = 0b01;
  else if (m1 - m0 > u)
    b.active = 0b10;
}

}  // namespace bbandit
