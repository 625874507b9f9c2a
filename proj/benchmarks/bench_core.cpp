#include <benchmark/benchmark.h>

#include "crowdimpute/crowd.hpp"
#include "crowdimpute/imputation.hpp"
#include "crowdimpute/mice.hpp"
#include "crowdimpute/pooling.hpp"
#include "crowdimpute/synthetic.hpp"

using namespace crowdimpute;

namespace {

void BM_BayesDraw(benchmark::State& state) {
  const auto d = linear_gaussian(static_cast<std::size_t>(state.range(0)), 4, 1.0, 1);
  const auto task = regression_task(d, "y");
  Rng rng(2);
  for (auto _ : state) benchmark::DoNotOptimize(bayes_draw(task, rng));
}
BENCHMARK(BM_BayesDraw)->Arg(50)->Arg(654)->Arg(5000);

void BM_MiceCycle(benchmark::State& state) {
  auto d = fev_like(static_cast<std::size_t>(state.range(0)), 3);
  const auto [amputed, truth] = ampute(d, "age", d.rows() / 10, 4);
  Rng rng(5);
  for (auto _ : state) benchmark::DoNotOptimize(mice_cycle(amputed, MiceOptions{}, rng));
}
BENCHMARK(BM_MiceCycle)->Arg(200)->Arg(654)->Unit(benchmark::kMillisecond);

void BM_MultipleImpute(benchmark::State& state) {
  auto d = fev_like(654, 3);
  const auto [amputed, truth] = ampute(d, "age", 10, 4);
  const auto threads = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(multiple_impute(amputed, 30, MiceOptions{}, 9, threads));
}
BENCHMARK(BM_MultipleImpute)->Arg(1)->Arg(4)->Unit(benchmark::kMillisecond)->UseRealTime();

void BM_PoolPoint(benchmark::State& state) {
  std::vector<double> v(static_cast<std::size_t>(state.range(0)));
  Rng rng(6);
  for (auto& x : v) x = rng.normal(0, 1);
  for (auto _ : state) benchmark::DoNotOptimize(pool_point(v));
}
BENCHMARK(BM_PoolPoint)->Arg(30)->Arg(1000);

void BM_SimulateCrowd(benchmark::State& state) {
  auto d = fev_like(654, 7);
  const auto [amputed, truth] = ampute(d, "age", 10, 8);
  const auto stats = summarize(amputed);
  const auto qns = batch(render_questions(amputed, stats, "age"), build_intro(amputed, stats, "age"), 30);
  const auto mix = single_persona(persona_preset("experienced"));
  for (auto _ : state) benchmark::DoNotOptimize(run_crowd(qns.front(), mix, stats, 11));
}
BENCHMARK(BM_SimulateCrowd)->Unit(benchmark::kMicrosecond);

}  // namespace

BENCHMARK_MAIN();
