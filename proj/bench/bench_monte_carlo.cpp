// Serial reference against the OpenMP sweep on a fig3-sized cell.
#include <benchmark/benchmark.h>

#include "bbandit/basedb.hpp"
#include "bbandit/baselines.hpp"
#include "bbandit/engine.hpp"
#include "bbandit/hard_instances.hpp"

using namespace bbandit;

namespace {

EpisodeSpec basedb_cell(std::int64_t T, int M) {
  PlanParams p;
  p.T = T;
  p.M = M;
  p.alpha = 0.2;
  p.L = 2.0;
  p.c_thresh = 0.1;
  const auto plan = solve_plan(p);
  EpisodeSpec spec;
  spec.instance = [](std::uint64_t seed) {
    return std::make_shared<const BanditInstance>(make_experiment_instance(mix_seeds(seed, 0x6f6d656761ULL)));
  };
  spec.policy = [plan](const BanditInstance&) { return std::make_unique<BaSEDBPolicy>(BinningPlan::from(plan)); };
  spec.T = T;
  return spec;
}

void BM_serial(benchmark::State& state) {
  const auto spec = basedb_cell(50000, 5);
  const int R = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(monte_carlo_serial(spec, R, 1, 2).mean);
  state.SetItemsProcessed(state.iterations() * R * spec.T);
}

void BM_openmp(benchmark::State& state) {
  const auto spec = basedb_cell(50000, 5);
  const int R = static_cast<int>(state.range(0));
  const int threads = static_cast<int>(state.range(1));
  for (auto _ : state) benchmark::DoNotOptimize(monte_carlo(spec, R, 1, 2, threads).mean);
  state.SetItemsProcessed(state.iterations() * R * spec.T);
  state.counters["threads"] = threads;
}

void BM_episode_bse(benchmark::State& state) {
  const auto inst = make_experiment_instance(std::uint64_t{1});
  std::uint64_t seed = 0;
  for (auto _ : state) {
    OnlineBSEPolicy pol({37, 0.2}, 50000, 1);
    benchmark::DoNotOptimize(run_episode(inst, pol, 50000, ++seed).regret);
  }
  state.SetItemsProcessed(state.iterations() * 50000);
}

}  // namespace

BENCHMARK(BM_serial)->Arg(32)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_openmp)
    ->ArgsProduct({{32}, {1, 2, 4, 8}})
    ->Unit(benchmark::kMillisecond)
    ->UseRealTime();
BENCHMARK(BM_episode_bse)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
