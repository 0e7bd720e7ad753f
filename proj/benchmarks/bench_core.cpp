#include <benchmark/benchmark.h>

#include "seplrt/fit_alt.hpp"
#include "seplrt/fit_null.hpp"
#include "seplrt/lear.hpp"
#include "seplrt/lrt.hpp"
#include "seplrt/simulate.hpp"

namespace {

using namespace seplrt;

Dataset table1_dataset(int n_subjects, int t_max) {
  SimConfig cfg;
  cfg.n_subjects = n_subjects;
  cfg.t_max = t_max;
  cfg.s_max = 4;
  cfg.seed = 7;
  return make_replicate(cfg, 0);
}

void BM_lear_corr(benchmark::State& state) {
  const int m = static_cast<int>(state.range(0));
  Matrix d = Matrix::Zero(m, m);
  for (int j = 0; j < m; ++j)
    for (int k = 0; k < m; ++k) d(j, k) = 2.0 * std::abs(j - k);
  const DistanceScale scale{2.0, 2.0 * (m - 1)};
  const LearParams params{0.8, 0.25 * scale.range()};
  for (auto _ : state) {
    Matrix c = lear_corr(d, scale, params);
    benchmark::DoNotOptimize(c.data());
  }
}
BENCHMARK(BM_lear_corr)->Arg(4)->Arg(12)->Arg(28);

void BM_cholesky_solve(benchmark::State& state) {
  const int m = static_cast<int>(state.range(0));
  RngStream rng(11, 0);
  Matrix a(m, m);
  for (int i = 0; i < m * m; ++i) a(i / m, i % m) = rng.normal();
  Matrix pd = a * a.transpose() + m * Matrix::Identity(m, m);
  Vector b(m);
  for (int i = 0; i < m; ++i) b(i) = rng.normal();
  for (auto _ : state) {
    const CholFactor f = cholesky(pd);
    Vector x = f.solve(b);
    benchmark::DoNotOptimize(x.data());
  }
}
BENCHMARK(BM_cholesky_solve)->Arg(4)->Arg(12)->Arg(28);

void BM_chi2_sf(benchmark::State& state) {
  double x = 60.0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(chi2_sf(x, 73));
    x = x < 700.0 ? x + 1.0 : 60.0;
  }
}
BENCHMARK(BM_chi2_sf);

void BM_profile_loglik(benchmark::State& state) {
  const Dataset ds = table1_dataset(80, 3);
  const LearTau tau{{0.8, 0.5}, {0.8, 1.0}};
  Vector beta = Vector::Zero(1);
  for (auto _ : state) benchmark::DoNotOptimize(profile_loglik(ds, beta, tau));
}
BENCHMARK(BM_profile_loglik);

void BM_fit_null(benchmark::State& state) {
  const Dataset ds = table1_dataset(static_cast<int>(state.range(0)), 3);
  for (auto _ : state) {
    NullFitResult fit = fit_null(ds);
    benchmark::DoNotOptimize(fit.loglik);
  }
}
BENCHMARK(BM_fit_null)->Arg(80)->Arg(200)->Unit(benchmark::kMillisecond);

void BM_fit_alt(benchmark::State& state) {
  const Dataset ds = table1_dataset(static_cast<int>(state.range(0)), 3);
  for (auto _ : state) {
    AltFitResult fit = fit_alt(ds);
    benchmark::DoNotOptimize(fit.loglik);
  }
}
BENCHMARK(BM_fit_alt)->Arg(80)->Arg(200)->Unit(benchmark::kMillisecond);

void BM_run_test(benchmark::State& state) {
  const Dataset ds = table1_dataset(80, 3);
  for (auto _ : state) {
    LrtResult r = run_test(ds, 0.05, AdjustmentSet{});
    benchmark::DoNotOptimize(r.stat);
  }
}
BENCHMARK(BM_run_test)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
