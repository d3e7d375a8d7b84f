#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "bbandit/engine.hpp"
#include "bbandit/grid_planner.hpp"

namespace bbandit {

inline constexpr const char* kToolVersion = "bbandit 0.3.0";

/// Bad or missing configuration; the message names the offending key.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct InstanceConfig {
  std::string name = "experiment";  // experiment | cz | multiscale | static_failure | constant
  std::string omega = "random";     // random (per replication) | seed | list
  std::uint64_t omega_seed = 1;
  std::vector<int> signs;
  double alpha = 0.2;
  double beta = 1.0;
  double L = 2.0;
  int d = 1;
  // Bin count for cz / static_failure.
  std::string z_rule = "fixed";  // fixed | t1 | power
  int z = 4;
  double z_scale = 1.0;
  double z_power = 0.25;
  int orientation = -1;
  int multiscale_M = 2;
  double f_plus = 0.5;
  double f_minus = 0.5;
  // Overrides of the constructor's declared parameters (for verify).
  std::optional<double> declared_alpha, declared_beta, declared_L;
};

struct PolicyConfig {
  std::optional<double> c_thresh;    // overrides the plan's c_thresh
  std::string g_rule = "fixed";      // fixed | plan_g0 | power
  std::int64_t g = 1;
  double g_scale = 1.0;
  double g_power = 1.0 / 3.0;
  int arm = -1;                      // fixed_arm only
};

struct ExperimentConfig {
  InstanceConfig instance;
  PlanParams plan;
  std::vector<std::string> policies{"basedb"};
  std::map<std::string, PolicyConfig> policy_options;
  std::vector<std::int64_t> T_values;
  std::vector<int> M_values;
  std::vector<std::int64_t> g_values;  // optional sweep over g for static_se / online_bse
  int replications = 10;
  std::uint64_t master_seed = 1;
  int checkpoints = 0;
  int threads = 0;
  std::string output;
  std::string tree_dump;
  std::string study;  // optional summary label: fig3 | thm4 | rates

  const PolicyConfig& options(const std::string& policy) const;
};

ExperimentConfig parse_config(std::istream& in);
ExperimentConfig load_config(const std::string& path);
/// Canonical key=value text of the effective config (output paths and thread count excluded).
std::string canonical_config(const ExperimentConfig& cfg);
/// FNV-1a 64 of the canonical text, as 16 hex digits.
std::string config_hash(const ExperimentConfig& cfg);
std::uint64_t fnv1a64(const std::string& text);

/// One point of the sweep after resolving rules.
struct Cell {
  int id = 0;
  std::string policy;
  std::int64_t T = 0;
  int M = 1;
  std::int64_t g = 0;  // static_se / online_bse
  std::optional<BatchPlan> plan;
  int z = 0;           // resolved instance bin count when applicable
  std::string instance_label;
  std::uint64_t stream_key = 0;
  std::string g_or_splits;
};

/// Deduplicated cartesian product of T x M x policy x g in that nesting order.
std::vector<Cell> build_cells(const ExperimentConfig& cfg);

EpisodeSpec episode_spec(const ExperimentConfig& cfg, const Cell& cell);

/// Instance for a given replication seed (random omega draws from it).
std::shared_ptr<const BanditInstance> make_instance(const ExperimentConfig& cfg, const Cell& cell,
                                                    std::uint64_t rep_seed);

struct CellOutcome {
  Cell cell;
  CellStats stats;
};

struct SweepResult {
  std::string hash;
  std::vector<CellOutcome> cells;
};

SweepResult run_sweep(const ExperimentConfig& cfg);

/// Header block, one row per replication, aggregated rows (replication = -1) and summary comments.
void write_csv(std::ostream& os, const ExperimentConfig& cfg, const SweepResult& result);
/// Mean regret curve per cell at the configured checkpoints.
void write_curves(std::ostream& os, const SweepResult& result);

/// Canned configs for `reproduce`.
std::string canned_config(const std::string& figure);
std::vector<std::string> canned_figures();

/// Slope fits over T per (policy, M) and static/basedb ratios per T, when the sweep allows them.
std::vector<std::string> summary_lines(const SweepResult& result, const ExperimentConfig& cfg);

}  // namespace bbandit
