#include <benchmark/benchmark.h>

#include <string>

#include "emod/device.hpp"
#include "emod/frontend.hpp"
#include "emod/opdict.hpp"
#include "emod/planner.hpp"
#include "emod/random.hpp"
#include "emod/regress.hpp"
#include "emod/runner.hpp"

using namespace emod;

namespace {

const std::string kGameLoop = std::string(EMOD_FIXTURES_DIR) + "/game_loop.mj";

void BM_Parse(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(parse_file(kGameLoop));
}
BENCHMARK(BM_Parse);

void BM_Dictionary(benchmark::State& state) {
  Program p = parse_file(kGameLoop);
  BlockTable t = divide_blocks(p);
  for (auto _ : state) benchmark::DoNotOptimize(build_dictionary(p, t));
}
BENCHMARK(BM_Dictionary);

void BM_PathRun(benchmark::State& state) {
  Program p = parse_file(kGameLoop);
  BlockTable t = divide_blocks(p);
  OpDictionary d = build_dictionary(p, t);
  ExecutionCase c = plan_cases(t, ScenarioSpec{}, 2, 1).front();
  c.duration_s = static_cast<double>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(run(p, t, d.op_ids(), c));
  state.counters["frames"] = c.duration_s * 30.0;
}
BENCHMARK(BM_PathRun)->Arg(1)->Arg(4)->Unit(benchmark::kMillisecond);

void BM_Integrate(benchmark::State& state) {
  PowerTrace tr;
  Rng rng(3);
  for (int i = 0; i < state.range(0); ++i) {
    tr.t_s.push_back(i / 30.0);
    tr.power_w.push_back(rng.uniform(0.5, 3.0));
  }
  for (auto _ : state) benchmark::DoNotOptimize(integrate(tr));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Integrate)->Arg(300)->Arg(30000);

void BM_Fit(benchmark::State& state) {
  const int m = 150, l = static_cast<int>(state.range(0));
  Rng rng(9);
  Eigen::MatrixXd n(m, l);
  Eigen::VectorXd cost(l);
  for (int j = 0; j < l; ++j) cost(j) = rng.uniform(0.1e-6, 50e-6);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < l; ++j) n(i, j) = static_cast<double>(rng.uniform_int(0, 100000));
  Eigen::VectorXd e = n * cost;
  FitConfig f;
  f.restarts = 1;
  f.jobs = 1;
  f.max_iters = 20000;
  for (auto _ : state) benchmark::DoNotOptimize(fit(n, e, f));
}
BENCHMARK(BM_Fit)->Arg(20)->Arg(90)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
