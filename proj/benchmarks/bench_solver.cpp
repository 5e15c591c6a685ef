#include <benchmark/benchmark.h>

#include <random>

#include "bandprec/gp_solver.hpp"
#include "bandprec/pipeline.hpp"
#include "bandprec/simulation.hpp"

using namespace bandprec;

static void BM_ProjectBlockNorms(benchmark::State& state) {
  const auto s = static_cast<Index>(state.range(0));
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0.0, 3.0);
  Vector b(s), w(s);
  for (Index j = 0; j < s; ++j) {
    b[j] = u(rng);
    w[j] = 0.1 + u(rng);
  }
  const double M = 0.1 * w.dot(b);
  for (auto _ : state) benchmark::DoNotOptimize(project_block_norms(b, {w}, M));
}
BENCHMARK(BM_ProjectBlockNorms)->Arg(8)->Arg(80)->Arg(800);

static void BM_GradientLs(benchmark::State& state) {
  const auto p = static_cast<Index>(state.range(0));
  const DataMatrix d = generate({ModelKind::AR6Banded, p}, 100, Law::Normal, 2);
  const BandedCholesky t = true_model({ModelKind::AR6Banded, p}).factor;
  for (auto _ : state) benchmark::DoNotOptimize(gradient_ls(d, t));
}
BENCHMARK(BM_GradientLs)->Arg(50)->Arg(100)->Arg(200)->Unit(benchmark::kMicrosecond);

static void BM_EstimateBp(benchmark::State& state) {
  const auto p = static_cast<Index>(state.range(0));
  const DataMatrix d = generate({ModelKind::AR6Banded, p}, 100, Law::Normal, 3);
  for (auto _ : state) benchmark::DoNotOptimize(estimate_bp(d, {}));
}
BENCHMARK(BM_EstimateBp)->Arg(50)->Arg(100)->Unit(benchmark::kMillisecond);
BENCHMARK_MAIN();
