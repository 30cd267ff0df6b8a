#include <benchmark/benchmark.h>

#include <random>

#include "qef/cascade.hpp"
#include "qef/frequency.hpp"
#include "qef/model.hpp"
#include "qef/statespace_rate.hpp"

namespace {

const qef::OqhoModel& bench_model() {
  static const qef::OqhoModel m = qef::random_pr_model(4, 6, 7, 0.5);
  return m;
}

void BM_Lyapunov(benchmark::State& state) {
  const auto n = state.range(0);
  std::mt19937_64 rng(1);
  std::normal_distribution<double> dist;
  qef::Matrix a = qef::Matrix::NullaryExpr(n, n, [&] { return dist(rng); }) / std::sqrt(double(n));
  a.diagonal().array() -= 3.0;
  const qef::Matrix u = qef::Matrix::NullaryExpr(n, n, [&] { return dist(rng); });
  for (auto _ : state) benchmark::DoNotOptimize(qef::solve_lyapunov(a, u));
}
BENCHMARK(BM_Lyapunov)->Arg(8)->Arg(32)->Arg(64);

void BM_Cascade(benchmark::State& state) {
  const int r = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(qef::compute_cascade(bench_model(), r));
}
BENCHMARK(BM_Cascade)->DenseRange(0, 4);

void BM_StateSpaceRate(benchmark::State& state) {
  const int r = static_cast<int>(state.range(0));
  const double theta = 0.5 * qef::theta_zero(bench_model(), qef::default_grid(bench_model(), 512));
  for (auto _ : state) benchmark::DoNotOptimize(qef::qef_rate_ss(bench_model(), theta, r));
}
BENCHMARK(BM_StateSpaceRate)->DenseRange(0, 3)->Unit(benchmark::kMillisecond);

void BM_DirectRate(benchmark::State& state) {
  const qef::FrequencyGrid grid = qef::default_grid(bench_model(), static_cast<int>(state.range(0)));
  const double theta = 0.5 * qef::theta_zero(bench_model(), grid);
  for (auto _ : state) benchmark::DoNotOptimize(qef::qef_rate_direct(bench_model(), theta, grid));
}
BENCHMARK(BM_DirectRate)->Arg(512)->Arg(2048)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
