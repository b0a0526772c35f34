#include <benchmark/benchmark.h>

#include "elaudit/audit.hpp"
#include "elaudit/baseline.hpp"
#include "elaudit/elcore.hpp"
#include "elaudit/numerics.hpp"
#include "elaudit/sim.hpp"

namespace {

using namespace elaudit;

GeneratedSample sample(std::size_t n, std::size_t m) {
  ModelSpec spec;
  spec.n = n;
  spec.m = m;
  spec.seed = 42;
  return generate(spec);
}

void BM_ElLogRatio(benchmark::State& state) {
  const auto s = sample(static_cast<std::size_t>(state.range(0)), static_cast<std::size_t>(state.range(1)));
  const EstimatingSystem sys = s.system();
  for (auto _ : state) benchmark::DoNotOptimize(el_log_ratio(sys, s.true_eps).log_ratio);
}
BENCHMARK(BM_ElLogRatio)->Args({2000, 1})->Args({4000, 10})->Args({8000, 10})->Unit(benchmark::kMicrosecond);

void BM_EelLogRatio(benchmark::State& state) {
  const auto s = sample(static_cast<std::size_t>(state.range(0)), static_cast<std::size_t>(state.range(1)));
  const EstimatingSystem sys = s.system();
  for (auto _ : state) benchmark::DoNotOptimize(eel_log_ratio(sys, s.true_eps).log_ratio);
}
BENCHMARK(BM_EelLogRatio)->Args({2000, 1})->Args({4000, 10})->Args({8000, 10})->Unit(benchmark::kMicrosecond);

void BM_Bootstrap(benchmark::State& state) {
  const auto s = sample(static_cast<std::size_t>(state.range(0)), static_cast<std::size_t>(state.range(1)));
  const EstimatingSystem sys = s.system();
  BootstrapConfig cfg;
  cfg.B = static_cast<std::size_t>(state.range(2));
  for (auto _ : state) benchmark::DoNotOptimize(bootstrap_region(sys, cfg).covers(s.true_eps));
}
BENCHMARK(BM_Bootstrap)->Args({4000, 10, 500})->Args({4000, 10, 1000})->Unit(benchmark::kMillisecond);

void BM_ConfidenceInterval(benchmark::State& state) {
  const auto s = sample(static_cast<std::size_t>(state.range(0)), 1);
  const EstimatingSystem sys = s.system();
  for (auto _ : state) benchmark::DoNotOptimize(confidence_interval(sys, 0, 0.05, IntervalKind::TwoSided).lo);
}
BENCHMARK(BM_ConfidenceInterval)->Arg(2000)->Unit(benchmark::kMicrosecond);

void BM_Chi2Quantile(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(chi2_quantile(0.95, static_cast<int>(state.range(0))));
}
BENCHMARK(BM_Chi2Quantile)->Arg(1)->Arg(10);

}  // namespace

BENCHMARK_MAIN();
