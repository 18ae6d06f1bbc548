#include <benchmark/benchmark.h>

#include <random>

#include "labelsearch/evaluation.hpp"
#include "labelsearch/inner_solver.hpp"
#include "labelsearch/meta_opt.hpp"
#include "labelsearch/sparsemax.hpp"
#include "labelsearch/task_encoder.hpp"

namespace {

using namespace labelsearch;

Matrix gaussian(Index rows, Index cols, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  Matrix m(rows, cols);
  for (Index i = 0; i < m.size(); ++i) m.data()[i] = normal(rng);
  return m;
}

void BM_SparsemaxRows(benchmark::State& state) {
  const Matrix logits = gaussian(4096, state.range(0), 1) * 10.0;
  for (auto _ : state) benchmark::DoNotOptimize(sparsemax_rows(logits));
  state.SetItemsProcessed(state.iterations() * logits.rows());
}
BENCHMARK(BM_SparsemaxRows)->Arg(10)->Arg(100)->Arg(1000);

void BM_FitProbe(benchmark::State& state) {
  const Index n = state.range(0);
  const Matrix phi2 = gaussian(n, 64, 2);
  const Matrix targets = sparsemax_rows(gaussian(n, 10, 3) * 5.0);
  const ProbeOptions options{50, 0.5, 0.0};
  for (auto _ : state) benchmark::DoNotOptimize(fit_probe(phi2, targets, options, Matrix::Zero(10, 64)));
}
BENCHMARK(BM_FitProbe)->Arg(1000)->Arg(9000)->Unit(benchmark::kMillisecond);

void BM_OuterLossAndHypergradient(benchmark::State& state) {
  const Index n = state.range(0);
  Matrix phi1 = gaussian(n, 64, 4);
  phi1 = phi1.array().colwise() / phi1.rowwise().norm().array();
  const Matrix phi2 = gaussian(n, 64, 5);
  TrainConfig config = preset_config("synthetic");
  config.num_classes = 10;
  config.subset_size = static_cast<std::size_t>(n);
  config.inner_steps = 50;
  config.inner_lr = 0.5;
  const TaskEncoder encoder = ortho_rand(10, 64, 6, 0.1);
  std::mt19937_64 rng(7);
  const SplitIndices split = sample_splits(static_cast<std::size_t>(n), config.subset_size, 0.9, rng);
  for (auto _ : state) {
    const OuterForward fwd = outer_loss(encoder, phi1, phi2, split, config);
    benchmark::DoNotOptimize(hypergradient(fwd));
  }
}
BENCHMARK(BM_OuterLossAndHypergradient)->Arg(1000)->Arg(10000)->Unit(benchmark::kMillisecond);

void BM_Hungarian(benchmark::State& state) {
  const Matrix cost = gaussian(state.range(0), state.range(0), 8);
  for (auto _ : state) benchmark::DoNotOptimize(hungarian_match(cost));
}
BENCHMARK(BM_Hungarian)->Arg(10)->Arg(100)->Arg(1000)->Unit(benchmark::kMicrosecond);

}  // namespace

BENCHMARK_MAIN();
