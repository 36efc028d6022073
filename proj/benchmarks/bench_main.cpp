#include "anacp/anacp.hpp"

#include <benchmark/benchmark.h>

using namespace anacp;

namespace {

Matrix gaussian(Index rows, Index cols, std::uint64_t seed) {
  Rng rng(seed);
  Matrix m(rows, cols);
  for (Index i = 0; i < rows; ++i)
    for (Index j = 0; j < cols; ++j) m(i, j) = rng.normal();
  return m;
}

void BM_RidgeSolve(benchmark::State& state) {
  const Index D = state.range(0);
  const Matrix Z = gaussian(2 * D, D, 1);
  const Matrix G = Z.transpose() * Z;
  const Matrix H = gaussian(D, 64, 2);
  for (auto _ : state) benchmark::DoNotOptimize(ridge_solve(G, H, 100.0));
}
BENCHMARK(BM_RidgeSolve)->Arg(250)->Arg(1000)->Unit(benchmark::kMillisecond);

void BM_Project(benchmark::State& state) {
  const RPMatrix rp = random_projection(64, state.range(0), 3);
  const Matrix X = gaussian(400, 64, 4);
  for (auto _ : state) benchmark::DoNotOptimize(project(rp, X));
  state.SetItemsProcessed(state.iterations() * X.rows());
}
BENCHMARK(BM_Project)->Arg(1000)->Arg(5000)->Unit(benchmark::kMillisecond);

void BM_SeparatePrototypes(benchmark::State& state) {
  const auto C = static_cast<int>(state.range(0));
  SynthSpec spec;
  spec.dim = 64;
  spec.num_classes = C;
  spec.train_per_class = 20;
  spec.test_per_class = 1;
  const SynthData data = generate_synthetic(spec);
  ClassStats stats(spec.dim);
  stats.update(data.train.as_double(), data.train.labels);
  const WhitenTransform w = make_whitener(stats);
  for (auto _ : state) benchmark::DoNotOptimize(separate_prototypes(stats, w, 1.0));
}
BENCHMARK(BM_SeparatePrototypes)->Arg(20)->Arg(100)->Unit(benchmark::kMicrosecond);

void BM_CPUpdate(benchmark::State& state) {
  SynthSpec spec;
  spec.dim = 64;
  spec.num_classes = 20;
  const SynthData data = generate_synthetic(spec);
  const Matrix X = data.train.as_double();
  ClassStats stats(spec.dim);
  stats.update(X, data.train.labels);
  CPConfig config;
  config.rp_dim = state.range(0);
  for (auto _ : state) {
    CPLayer cp(spec.dim, config);
    cp.update(X, data.train.labels, stats);
    benchmark::DoNotOptimize(cp.heads().front().weights.data());
  }
}
BENCHMARK(BM_CPUpdate)->Arg(250)->Arg(1000)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
