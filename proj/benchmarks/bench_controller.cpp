#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "ecbf/oracle.hpp"
#include "ecbf/partition.hpp"

using namespace ecbf;

namespace {

std::vector<Vec> sample_states(std::size_t n) {
  std::mt19937_64 rng(42);
  std::uniform_real_distribution<double> d(-3.5, 3.5);
  std::vector<Vec> xs(n, Vec(2));
  for (auto& x : xs) x << d(rng), d(rng);
  return xs;
}

void BM_Explicit(benchmark::State& state) {
  const ProblemSpec spec = linear2d_example();
  const SafeController ctl(spec, static_cast<Mode>(state.range(0)));
  const auto xs = sample_states(1024);
  std::size_t i = 0;
  for (auto _ : state) benchmark::DoNotOptimize(ctl.solve(xs[i++ & 1023]));
}
BENCHMARK(BM_Explicit)->Arg(static_cast<int>(Mode::kStandard))->Arg(static_cast<int>(Mode::kAdaptive));

void BM_OracleStandard(benchmark::State& state) {
  const ProblemSpec spec = linear2d_example();
  const auto xs = sample_states(1024);
  std::size_t i = 0;
  for (auto _ : state) benchmark::DoNotOptimize(oracle_standard(spec, xs[i++ & 1023]));
}
BENCHMARK(BM_OracleStandard);

void BM_OracleAdaptive(benchmark::State& state) {
  const ProblemSpec spec = linear2d_example();
  const auto xs = sample_states(1024);
  std::size_t i = 0;
  for (auto _ : state) benchmark::DoNotOptimize(oracle_adaptive(spec, xs[i++ & 1023]));
}
BENCHMARK(BM_OracleAdaptive);

void BM_ClassifyGrid(benchmark::State& state) {
  const ProblemSpec spec = linear2d_example();
  const int res = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(classify_grid(spec, Mode::kAdaptive, res));
  state.SetItemsProcessed(state.iterations() * res * res);
}
BENCHMARK(BM_ClassifyGrid)->Arg(101)->Arg(301)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
