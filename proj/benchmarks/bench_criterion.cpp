#include <benchmark/benchmark.h>

#include "rmdecon/criterion.hpp"
#include "rmdecon/density_estimator.hpp"
#include "rmdecon/ecf.hpp"
#include "rmdecon/scenario.hpp"

using namespace rmdecon;

namespace {

const PairedSample& data() {
  static const PairedSample s = simulate(catalog_scenario("CK3", 1000, 1));
  return s;
}

void bm_ecf_table(benchmark::State& state) {
  const QuadGrid g{2.0, static_cast<std::size_t>(state.range(0)), static_cast<std::size_t>(state.range(0))};
  for (auto _ : state) benchmark::DoNotOptimize(ecf_table(data(), g));
}

void bm_criterion_value(benchmark::State& state) {
  const std::size_t k = static_cast<std::size_t>(state.range(0));
  const CriterionContext ctx(data(), QuadGrid{2.0, k, k});
  const auto p = PolyCF::constant(15);
  for (auto _ : state) benchmark::DoNotOptimize(criterion_value(ctx, p));
}

void bm_criterion_gradient(benchmark::State& state) {
  const std::size_t k = static_cast<std::size_t>(state.range(0));
  const CriterionContext ctx(data(), QuadGrid{2.0, k, k});
  const auto p = PolyCF::constant(15);
  for (auto _ : state) benchmark::DoNotOptimize(criterion_value_and_gradient(ctx, p));
}

void bm_invert(benchmark::State& state) {
  const auto grid = regular_grid(-5.0, 5.0, static_cast<std::size_t>(state.range(0)));
  const auto p = PolyCF::constant(15);
  for (auto _ : state) benchmark::DoNotOptimize(invert(p, EstimatorParams{15, 2.0, 2.0}, grid));
}

}  // namespace

BENCHMARK(bm_ecf_table)->Arg(100)->Arg(500)->Unit(benchmark::kMillisecond);
BENCHMARK(bm_criterion_value)->Arg(100)->Arg(500)->Unit(benchmark::kMillisecond);
BENCHMARK(bm_criterion_gradient)->Arg(100)->Arg(500)->Unit(benchmark::kMillisecond);
BENCHMARK(bm_invert)->Arg(2000)->Unit(benchmark::kMillisecond);
BENCHMARK_MAIN();
