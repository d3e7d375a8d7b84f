#include "bbandit/engine.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include <omp.h>

#include "bbandit/basedb.hpp"

namespace bbandit {

std::vector<std::int64_t> log_checkpoints(std::int64_t T, int n) {
  if (T < 1) throw std::invalid_argument("log_checkpoints: T must be >= 1");
  std::vector<std::int64_t> out;
  if (n < 1) return out;
  const double lt = std::log(static_cast<double>(T));
  for (int k = 1; k <= n; ++k) {
    const auto t = std::clamp<std::int64_t>(std::llround(std::exp(lt * k / n)), 1, T);
    if (out.empty() || t > out.back()) out.push_back(t);
  }
  if (out.back() != T) out.push_back(T);
  return out;
}

EpisodeResult run_episode(const BanditInstance& instance, Policy& policy, std::int64_t T, std::uint64_t seed,
                          std::span<const std::int64_t> checkpoints) {
  const auto grid = policy.grid();
  if (policy.horizon() != T || grid.empty() || grid.back() != T || grid.front() != 0)
    throw std::invalid_argument("run_episode: policy horizon does not match T");
  for (std::size_t k = 1; k < checkpoints.size(); ++k)
    if (checkpoints[k] <= checkpoints[k - 1]) throw std::invalid_argument("run_episode: checkpoints must increase");

  EpisodeResult res;
  res.seed = seed;
  res.checkpoints.assign(checkpoints.begin(), checkpoints.end());
  res.curve.reserve(checkpoints.size());
  Rng rng(seed);
  const bool online = policy.online();
  const int M = static_cast<int>(grid.size()) - 1;
  std::vector<Observation> buffer;
  int batch = 1;
  std::size_t next_cp = 0;
  double regret = 0.0;

  for (std::int64_t t = 1; t <= T; ++t) {
    const Point x = instance.sample_context(rng);
    const Arm a = policy.select(x);
    const double reward = instance.draw_reward(a, x, rng);
    const auto [best, gap] = instance.optimal_arm_and_gap(x);
    if (a != best && gap > 0.0) {
      regret += gap;
      ++res.inferior_count;
    }
    ++res.pulls[arm_index(a)];
    res.reward_sum += reward;

    if (online) {
      policy.observe({x, a, reward});
    } else {
      if (batch < M) buffer.push_back({x, a, reward});
      if (batch < M && t == grid[batch]) {
        policy.end_batch(batch, buffer);
        buffer.clear();
        ++batch;
      }
    }
    while (next_cp < checkpoints.size() && checkpoints[next_cp] == t) {
      res.curve.push_back(regret);
      ++next_cp;
    }
  }
  policy.finish();
  res.regret = regret;
  if (policy.binning() != nullptr) {
    res.monitored = true;
    res.clean = clean_event_monitor(instance, policy);
  }
  return res;
}

CleanEventFlags clean_event_monitor(const BanditInstance& instance, const Policy& policy) {
  CleanEventFlags flags;
  const BinningContext* ctx = policy.binning();
  if (ctx == nullptr) return flags;
  const auto& law = instance.covariate_law();
  for (const auto& rec : policy.batch_records()) {
    const double dt = static_cast<double>(rec.end - rec.start);
    for (const auto& leaf : rec.leaves) {
      const double m_star = dt * law.mass(leaf.box);
      const double m = static_cast<double>(leaf.contexts);
      if (m < 0.5 * m_star || m > 1.5 * m_star) ++flags.e_count;
      if (leaf.arms_before != kBothArms || leaf.arms_after == kBothArms) continue;
      const double bar = ctx->c1 * std::pow(leaf.width, ctx->beta);
      for (Arm k : {Arm::Plus, Arm::Minus}) {
        const bool eliminated = !(leaf.arms_after & (1u << arm_index(k)));
        if (eliminated && instance.sup_advantage(k, leaf.box) > bar) ++flags.ac_count;
      }
    }
  }
  flags.e_violation = flags.e_count > 0;
  flags.ac_violation = flags.ac_count > 0;
  return flags;
}

std::uint64_t replication_seed(std::uint64_t master_seed, std::uint64_t stream_key, int r) {
  return mix_seeds(mix_seeds(master_seed, stream_key), static_cast<std::uint64_t>(r));
}

CellStats summarize(std::vector<EpisodeResult> reps) {
  CellStats s;
  s.reps = std::move(reps);
  const auto R = static_cast<double>(s.reps.size());
  if (s.reps.empty()) return s;
  double sum = 0.0, inf = 0.0, e = 0.0, ac = 0.0;
  for (const auto& r : s.reps) {
    sum += r.regret;
    inf += static_cast<double>(r.inferior_count);
    e += r.clean.e_violation ? 1.0 : 0.0;
    ac += r.clean.ac_violation ? 1.0 : 0.0;
  }
  s.mean = sum / R;
  s.mean_inferior = inf / R;
  s.e_rate = e / R;
  s.ac_rate = ac / R;
  if (s.reps.size() >= 2) {
    double ss = 0.0;
    for (const auto& r : s.reps) ss += (r.regret - s.mean) * (r.regret - s.mean);
    s.se = std::sqrt(ss / (R - 1.0) / R);
  }
  return s;
}

namespace {

EpisodeResult run_replication(const EpisodeSpec& spec, std::uint64_t seed) {
  const auto inst = spec.instance(seed);
  auto policy = spec.policy(*inst);
  return run_episode(*inst, *policy, spec.T, seed, spec.checkpoints);
}

}  // namespace

CellStats monte_carlo_serial(const EpisodeSpec& spec, int R, std::uint64_t master_seed, std::uint64_t stream_key) {
  if (R < 1) throw std::invalid_argument("monte_carlo: R must be >= 1");
  std::vector<EpisodeResult> reps;
  reps.reserve(R);
  for (int r = 0; r < R; ++r) reps.push_back(run_replication(spec, replication_seed(master_seed, stream_key, r)));
  return summarize(std::move(reps));
}

CellStats monte_carlo(const EpisodeSpec& spec, int R, std::uint64_t master_seed, std::uint64_t stream_key,
                      int threads) {
  if (R < 1) throw std::invalid_argument("monte_carlo: R must be >= 1");
  std::vector<EpisodeResult> reps(R);
  std::vector<std::exception_ptr> errors(R);
  const int nt = threads > 0 ? threads : omp_get_max_threads();
#pragma omp parallel for schedule(dynamic, 1) num_threads(nt)
  for (int r = 0; r < R; ++r) {
    try {
      reps[r] = run_replication(spec, replication_seed(master_seed, stream_key, r));
    } catch (...) {
      errors[r] = std::current_exception();
    }
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  return summarize(std::move(reps));
}

SlopeFit slope_fit(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw std::invalid_argument("slope_fit: size mismatch");
  if (x.size() < 3) throw std::invalid_argument("slope_fit: need at least 3 points");
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0.0) || !(y[i] > 0.0)) throw std::invalid_argument("slope_fit: values must be positive");
    lx.push_back(std::log(x[i]));
    ly.push_back(std::log(y[i]));
  }
  const double n = static_cast<double>(lx.size());
  const double mx = std::accumulate(lx.begin(), lx.end(), 0.0) / n;
  const double my = std::accumulate(ly.begin(), ly.end(), 0.0) / n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
    syy += (ly[i] - my) * (ly[i] - my);
  }
  if (sxx <= 0.0) throw std::invalid_argument("slope_fit: x values must be distinct");
  SlopeFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  f.r2 = syy > 0.0 ? (sxy * sxy) / (sxx * syy) : 1.0;
  return f;
}

double inferior_rate_ratio(std::int64_t S_n, std::int64_t n, double R_n, double alpha) {
  if (n < 1 || !(R_n > 0.0)) throw std::invalid_argument("inferior_rate_ratio: need n >= 1 and R_n > 0");
  return static_cast<double>(S_n) /
         (std::pow(static_cast<double>(n), 1.0 / (1.0 + alpha)) * std::pow(R_n, alpha / (1.0 + alpha)));
}

double elimination_exceedance_rate(const EliminationTrial& p) {
  if (p.trials < 1) throw std::invalid_argument("elimination_exceedance_rate: trials must be >= 1");
  Rng rng(p.seed);
  int exceed = 0;
  for (int k = 0; k < p.trials; ++k) {
    std::array<std::int64_t, 2> n{};
    std::array<double, 2> s{};
    std::int64_t m = 0;
    for (std::int64_t t = 0; t < p.dt; ++t) {
      if (!(rng.uniform() < p.width)) continue;
      const int arm = static_cast<int>(m++ % 2);
      const double mean = arm == 0 ? 0.5 + p.delta : 0.5;
      ++n[arm];
      s[arm] += rng.uniform() < mean ? 1.0 : 0.0;
    }
    if (n[0] == 0 || n[1] == 0) continue;
    const double diff = s[0] / n[0] - s[1] / n[1];
    if (diff > threshold_U(m, p.T, p.width, 1, p.c_thresh)) ++exceed;
  }
  return static_cast<double>(exceed) / p.trials;
}

}  // namespace bbandit
