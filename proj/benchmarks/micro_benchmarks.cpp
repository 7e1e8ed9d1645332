#include <benchmark/benchmark.h>

#include <vector>

#include "rmlr/linalg.hpp"
#include "rmlr/model.hpp"
#include "rmlr/rng.hpp"
#include "rmlr/robust_pca.hpp"
#include "rmlr/robust_stats.hpp"

using namespace rmlr;

static void BM_DoubleFilterStep(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const PointSample s = figure2_points(10, 0.02, n, 1);
  const IndexSet rows = all_indices(n);
  std::uint64_t seed = 0;
  for (auto _ : state) benchmark::DoNotOptimize(double_filter(s.observed, rows, 1, 0.02, 1.1, seed++));
  state.SetItemsProcessed(state.iterations() * n);
}
BENCHMARK(BM_DoubleFilterStep)->Arg(1000)->Arg(10000);

static void BM_RobustSubspace(benchmark::State& state) {
  const PointSample s = figure2_points(10, 0.02, static_cast<int>(state.range(0)), 2);
  std::uint64_t seed = 0;
  for (auto _ : state) benchmark::DoNotOptimize(robust_subspace(s.observed, {1, 0.02, 1.1, 0.1}, seed++));
}
BENCHMARK(BM_RobustSubspace)->Arg(10000)->Unit(benchmark::kMillisecond);

static void BM_Hrpca(benchmark::State& state) {
  const PointSample s = figure2_points(10, 0.02, static_cast<int>(state.range(0)), 3);
  std::uint64_t seed = 0;
  for (auto _ : state) benchmark::DoNotOptimize(hrpca(s.observed, 1, 0.02, seed++));
}
BENCHMARK(BM_Hrpca)->Arg(2000)->Arg(10000)->Unit(benchmark::kMillisecond);

static void BM_TopKSubspace(benchmark::State& state) {
  const int d = static_cast<int>(state.range(0));
  const MetaParameter m = orthogonal_preset(d, 3, 4.0, Vector::Ones(3), Vector::Constant(3, 1.0 / 3.0), 4);
  const Matrix p = rank_one_statistics(sample_tasks(m, 20000, 1, 5).tasks);
  for (auto _ : state) benchmark::DoNotOptimize(top_k_subspace_of_points(p, 3));
}
BENCHMARK(BM_TopKSubspace)->Arg(32)->Arg(128)->Unit(benchmark::kMillisecond);

static void BM_TrimmedMean(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  Rng rng(6);
  std::vector<double> x(n);
  for (double& v : x) v = rng.normal();
  for (auto _ : state) benchmark::DoNotOptimize(trimmed_mean(x, 0.05));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n));
}
BENCHMARK(BM_TrimmedMean)->Arg(10000)->Arg(1000000);

BENCHMARK_MAIN();
