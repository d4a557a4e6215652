#include <random>
#include <vector>

#include <benchmark/benchmark.h>

#include "aapl/profiling/silhouette.hpp"

namespace {

struct Points {
  std::vector<double> coords;
  std::vector<int> labels;
};

Points make_points(std::size_t n, std::size_t dim) {
  std::mt19937_64 rng(7);
  std::normal_distribution<double> g(0.0, 1.0);
  Points p;
  for (std::size_t i = 0; i < n; ++i) {
    const int label = static_cast<int>(i % 14);
    p.labels.push_back(label);
    for (std::size_t j = 0; j < dim; ++j) p.coords.push_back(g(rng) + 0.5 * label);
  }
  return p;
}

void BM_SilhouetteParallel(benchmark::State& state) {
  const auto p = make_points(static_cast<std::size_t>(state.range(0)), 32);
  for (auto _ : state) {
    benchmark::DoNotOptimize(aapl::profiling::silhouette_scores(p.coords, 32, p.labels));
  }
}

void BM_SilhouetteSerial(benchmark::State& state) {
  const auto p = make_points(static_cast<std::size_t>(state.range(0)), 32);
  for (auto _ : state) {
    benchmark::DoNotOptimize(aapl::profiling::silhouette_scores_serial(p.coords, 32, p.labels));
  }
}

}  // namespace

BENCHMARK(BM_SilhouetteParallel)->Arg(280)->Arg(1400);
BENCHMARK(BM_SilhouetteSerial)->Arg(280)->Arg(1400);
BENCHMARK_MAIN();
