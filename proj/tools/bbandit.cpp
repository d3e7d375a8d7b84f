// Command line front end: run, reproduce, verify, plan.
#include <fstream>
#include <iostream>
#include <sstream>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "bbandit/basedb.hpp"
#include "bbandit/experiment.hpp"
#include "bbandit/hard_instances.hpp"

using namespace bbandit;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitInfeasible = 3;
constexpr int kExitVerify = 4;

struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<int> reps;
  std::optional<int> threads;
  std::string out;
};

void apply(ExperimentConfig& cfg, const Overrides& o) {
  if (o.seed) cfg.master_seed = *o.seed;
  if (o.reps) {
    if (*o.reps < 1) throw ConfigError("--reps: must be >= 1");
    cfg.replications = *o.reps;
  }
  if (o.threads) cfg.threads = *o.threads;
  if (!o.out.empty()) cfg.output = o.out;
}

void write_outputs(const ExperimentConfig& cfg, const SweepResult& res) {
  if (cfg.output.empty() || cfg.output == "-") {
    write_csv(std::cout, cfg, res);
  } else {
    std::ofstream f(cfg.output, std::ios::binary);
    if (!f) throw ConfigError("cannot write '" + cfg.output + "'");
    write_csv(f, cfg, res);
    if (cfg.checkpoints > 0) {
      std::ofstream c(cfg.output + ".curves.csv", std::ios::binary);
      write_curves(c, res);
    }
  }
  if (!cfg.tree_dump.empty()) {
    // Replay replication 0 of every binning cell; episodes are deterministic given the seed.
    std::ofstream f(cfg.tree_dump, std::ios::binary);
    bool header = true;
    for (const auto& co : res.cells) {
      if (co.cell.policy != "basedb" && co.cell.policy != "static_se") continue;
      const EpisodeSpec spec = episode_spec(cfg, co.cell);
      const auto seed = replication_seed(cfg.master_seed, co.cell.stream_key, 0);
      const auto inst = spec.instance(seed);
      auto policy = spec.policy(*inst);
      run_episode(*inst, *policy, spec.T, seed);
      f << "# cell=" << co.cell.id << " policy=" << co.cell.policy << " T=" << co.cell.T << " M=" << co.cell.M << "\n";
      write_tree_dump(f, policy->batch_records(), header);
      header = false;
    }
  }
}

int run_config(ExperimentConfig cfg, const Overrides& o) {
  apply(cfg, o);
  const auto hash = config_hash(cfg);
  std::cout << "config_hash=" << hash << "\n";
  const SweepResult res = run_sweep(cfg);
  write_outputs(cfg, res);
  if (!cfg.output.empty() && cfg.output != "-") {
    for (const auto& co : res.cells)
      std::cout << fmt::format("cell {:>3} {:<10} {:<22} T={:<8} M={} mean={:.4f} se={:.4f} E={:.3f} AC={:.3f}\n",
                               co.cell.id, co.cell.policy, co.cell.instance_label, co.cell.T, co.cell.M, co.stats.mean,
                               co.stats.se, co.stats.e_rate, co.stats.ac_rate);
    for (const auto& line : summary_lines(res, cfg))
      if (line.rfind("inferior", 0) != 0) std::cout << line << "\n";
    std::cout << "wrote " << cfg.output << "\n";
  }
  return 0;
}

int verify(const ExperimentConfig& cfg, int pairs, int samples) {
  const auto cells = build_cells(cfg);
  if (cells.empty()) throw ConfigError("no cells to verify");
  const auto inst = make_instance(cfg, cells.front(), cfg.master_seed);
  const auto& decl = inst->declared();
  Rng rng(mix_seeds(cfg.master_seed, 0x766572696679ULL));
  const auto smooth = verify_smoothness(*inst, pairs, rng);
  const std::vector<double> deltas{0.01, 0.02, 0.05, 0.1, 0.2};
  const auto margin = verify_margin(*inst, deltas, samples, rng);
  std::cout << fmt::format("instance {} declared alpha={} beta={} L={}\n", cells.front().instance_label, decl.alpha,
                           decl.beta, decl.L);
  std::cout << fmt::format("smoothness max_violation={:.3e} holds={}\n", smooth.max_violation, smooth.holds);
  for (std::size_t k = 0; k < deltas.size(); ++k)
    std::cout << fmt::format("margin delta={:<5} p={:.5f} se={:.5f}\n", deltas[k], margin.probs[k],
                             margin.std_errors[k]);
  std::cout << fmt::format("margin fitted_D0={:.5f} declared_D0={} holds={}\n", margin.fitted_d0,
                           decl.margin_d0 ? fmt::format("{:.5f}", *decl.margin_d0) : std::string("none"),
                           margin.holds);
  return smooth.holds && margin.holds ? 0 : kExitVerify;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Batched nonparametric contextual bandit simulator"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kToolVersion);

  Overrides o;
  std::string config_path;
  std::string figure;
  std::uint64_t seed_value = 0;
  int reps_value = 0, threads_value = 0;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--out,-o", o.out, "Output CSV path ('-' for stdout)");
    sub->add_option("--seed", seed_value, "Master seed override");
    sub->add_option("--reps", reps_value, "Replication count override");
    sub->add_option("--threads", threads_value, "OpenMP threads (0 = default)");
  };

  auto* run = app.add_subcommand("run", "Run the sweep described by a config file");
  run->add_option("--config,-c", config_path, "Config file")->required();
  add_common(run);

  auto* repro = app.add_subcommand("reproduce", "Run a canned study");
  repro->add_option("figure,--figure", figure, "fig3 | thm4 | rates");
  bool print_config = false;
  repro->add_flag("--print-config", print_config, "Print the canned config and exit");
  add_common(repro);

  int pairs = 100000, samples = 200000;
  auto* ver = app.add_subcommand("verify", "Check the configured instance against its declared assumptions");
  ver->add_option("--config,-c", config_path, "Config file")->required();
  ver->add_option("--pairs", pairs, "Point pairs for the smoothness check");
  ver->add_option("--samples", samples, "Samples for the margin check");
  ver->add_option("--seed", seed_value, "Seed override");

  auto* plan = app.add_subcommand("plan", "Print the batch plan table");
  plan->add_option("--config,-c", config_path, "Config file");
  PlanParams pp;
  plan->add_option("--T", pp.T, "Horizon");
  plan->add_option("--M", pp.M, "Batches");
  plan->add_option("--alpha", pp.alpha);
  plan->add_option("--beta", pp.beta);
  plan->add_option("--d", pp.d);
  plan->add_option("--L", pp.L);
  plan->add_option("--c-batch", pp.c_batch);

  CLI11_PARSE(app, argc, argv);
  const auto given = [&](const char* flag) {
    const auto* opt = app.get_subcommands().front()->get_option_no_throw(flag);
    return opt != nullptr && opt->count() > 0;
  };
  if (given("--seed")) o.seed = seed_value;
  if (given("--reps")) o.reps = reps_value;
  if (given("--threads")) o.threads = threads_value;

  try {
    if (*run) return run_config(load_config(config_path), o);
    if (*repro) {
      if (figure.empty()) throw ConfigError("reproduce: name a figure (fig3, thm4 or rates)");
      if (print_config) {
        std::cout << canned_config(figure);
        return 0;
      }
      std::istringstream in(canned_config(figure));
      return run_config(parse_config(in), o);
    }
    if (*ver) {
      auto cfg = load_config(config_path);
      apply(cfg, o);
      return verify(cfg, pairs, samples);
    }
    if (*plan) {
      if (!config_path.empty()) {
        const auto cfg = load_config(config_path);
        for (auto T : cfg.T_values) {
          for (int M : cfg.M_values) {
            PlanParams p = cfg.plan;
            p.T = T;
            p.M = M;
            std::cout << fmt::format("T={} M={}\n", T, M);
            print_plan_table(std::cout, solve_plan(p));
          }
        }
      } else {
        print_plan_table(std::cout, solve_plan(pp));
      }
      return 0;
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const InfeasiblePlan& e) {
    std::cerr << "infeasible plan: " << e.what() << "\n";
    return kExitInfeasible;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  }
  return 0;
}
