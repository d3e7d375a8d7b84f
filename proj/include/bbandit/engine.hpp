#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <vector>

#include "bbandit/instance.hpp"
#include "bbandit/policy.hpp"

namespace bbandit {

struct CleanEventFlags {
  bool e_violation = false;   // some bin/batch had m_{C,i} outside [m*/2, 3m*/2]
  bool ac_violation = false;  // some arm was eliminated where it beats the other by more than c1 w^beta
  std::int64_t e_count = 0;
  std::int64_t ac_count = 0;
};

struct EpisodeResult {
  double regret = 0.0;
  std::vector<std::int64_t> checkpoints;
  std::vector<double> curve;  // cumulative regret at each checkpoint
  std::int64_t inferior_count = 0;
  std::array<std::int64_t, 2> pulls{};
  double reward_sum = 0.0;
  std::uint64_t seed = 0;
  bool monitored = false;
  CleanEventFlags clean;
};

/// n log-spaced integer times in [1, T], deduplicated, always ending at T.
std::vector<std::int64_t> log_checkpoints(std::int64_t T, int n = 64);

/// Plays T rounds. Each round draws the context then one reward uniform from the same stream,
/// so two policies run with the same seed see the same contexts.
EpisodeResult run_episode(const BanditInstance& instance, Policy& policy, std::int64_t T, std::uint64_t seed,
                          std::span<const std::int64_t> checkpoints = {});

/// Audit of a finished binning policy's batch records against the instance.
CleanEventFlags clean_event_monitor(const BanditInstance& instance, const Policy& policy);

/// Seed for replication r: a 64-bit mix of the master seed, a stream key and r.
std::uint64_t replication_seed(std::uint64_t master_seed, std::uint64_t stream_key, int r);

using InstanceSource = std::function<std::shared_ptr<const BanditInstance>(std::uint64_t rep_seed)>;

struct EpisodeSpec {
  InstanceSource instance;
  PolicyFactory policy;
  std::int64_t T = 0;
  std::vector<std::int64_t> checkpoints;
};

struct CellStats {
  std::vector<EpisodeResult> reps;
  double mean = 0.0;
  double se = 0.0;
  double mean_inferior = 0.0;
  double e_rate = 0.0;
  double ac_rate = 0.0;
};

CellStats summarize(std::vector<EpisodeResult> reps);

/// Reference implementation: replications one after another.
CellStats monte_carlo_serial(const EpisodeSpec& spec, int R, std::uint64_t master_seed, std::uint64_t stream_key);

/// OpenMP over replications; results are reduced in replication order and equal the serial ones.
/// threads <= 0 uses the OpenMP default.
CellStats monte_carlo(const EpisodeSpec& spec, int R, std::uint64_t master_seed, std::uint64_t stream_key,
                      int threads = 0);

struct SlopeFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
};

/// Least squares of log y against log x.
SlopeFit slope_fit(std::span<const double> x, std::span<const double> y);

/// S_n / (n^{1/(1+alpha)} R_n^{alpha/(1+alpha)}); no reference value exists for the constant.
double inferior_rate_ratio(std::int64_t S_n, std::int64_t n, double R_n, double alpha);

/// One bin of the given width receiving Binomial(dt, width) contexts in a batch, arms pulled
/// alternately, arm +1 better by delta. Returns the fraction of trials in which
/// mean(+1) - mean(-1) > U(m, T, width).
struct EliminationTrial {
  std::int64_t T = 50000;
  double width = 0.125;
  std::int64_t dt = 4000;
  double delta = 0.0;
  double c_thresh = 1.0;
  int trials = 2000;
  std::uint64_t seed = 1;
};
double elimination_exceedance_rate(const EliminationTrial& trial);

}  // namespace bbandit
