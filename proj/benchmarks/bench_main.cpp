#include "vecspin/diagnostics.hpp"
#include "vecspin/functionals.hpp"
#include "vecspin/optimize.hpp"
#include "vecspin/sampler.hpp"

#include <benchmark/benchmark.h>

#include <random>

using namespace vecspin;

namespace {

MixedModel model_m(int m) {
  Vec b2 = Vec::LinSpaced(m, 0.8, 1.2), b4 = Vec::LinSpaced(m, 0.3, 0.5);
  return MixedModel(m, {{2, b2}, {4, b4}}, Vec::Constant(m, 0.1));
}

SymMat corr(int m) {
  Mat q = Mat::Constant(m, m, 0.2);
  q.diagonal().setOnes();
  return SymMat(q);
}

DiscreteOrderParam levels(int m, int r) {
  DiscreteOrderParam p;
  const SymMat q = corr(m);
  for (int k = 0; k < r; ++k) {
    p.x.push_back(k == 0 ? 0.0 : (k == r - 1 ? 1.0 : double(k) / (r - 1)));
    p.Qs.push_back(q * (double(k + 1) / r));
  }
  return p;
}

void BM_DiscreteCs(benchmark::State& st) {
  const int m = static_cast<int>(st.range(0)), r = static_cast<int>(st.range(1));
  const MixedModel model = model_m(m);
  const auto p = levels(m, r);
  for (auto _ : st) benchmark::DoNotOptimize(discrete_cs(model, p));
}
BENCHMARK(BM_DiscreteCs)->Args({2, 3})->Args({3, 5})->Args({5, 8});

void BM_ContinuousCs(benchmark::State& st) {
  const int m = static_cast<int>(st.range(0));
  const MixedModel model = model_m(m);
  const auto [x, path] = sine_interpolate(levels(m, 3));
  for (auto _ : st) benchmark::DoNotOptimize(continuous_cs(model, x, path));
}
BENCHMARK(BM_ContinuousCs)->Arg(1)->Arg(2)->Arg(3)->Unit(benchmark::kMillisecond);

void BM_MinimizeCs(benchmark::State& st) {
  const MixedModel model = model_m(2);
  OptimizerConfig cfg;
  cfg.restarts = 1;
  cfg.r_schedule = {static_cast<int>(st.range(0))};
  for (auto _ : st) benchmark::DoNotOptimize(minimize_discrete_cs(model, corr(2), cfg).best_value);
}
BENCHMARK(BM_MinimizeCs)->Arg(2)->Arg(3)->Unit(benchmark::kMillisecond);

void BM_CriticalResidual(benchmark::State& st) {
  const MixedModel model = model_m(2);
  const auto [x, path] = sine_interpolate(levels(2, 3));
  for (auto _ : st) benchmark::DoNotOptimize(critical_residual(model, x, path).residual_sup);
}
BENCHMARK(BM_CriticalResidual)->Unit(benchmark::kMillisecond);

void BM_SamplerGradient(benchmark::State& st) {
  const int n = static_cast<int>(st.range(0));
  const MixedModel sk(1, {{2, Vec::Ones(1)}}, Vec::Zero(1));
  const auto s = sample_hamiltonian(sk, n, 4, 1);
  std::mt19937_64 rng(3);
  std::normal_distribution<double> z;
  Mat sigma(1, n);
  for (int i = 0; i < n; ++i) sigma(0, i) = z(rng);
  for (auto _ : st) benchmark::DoNotOptimize(s.gradient(sigma).sum());
}
BENCHMARK(BM_SamplerGradient)->Arg(100)->Arg(400);

}  // namespace

BENCHMARK_MAIN();
