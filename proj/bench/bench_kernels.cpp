// Serial reference kernels against their OpenMP counterparts.

#include "lsicert/kernels.hpp"
#include "lsicert/measure.hpp"
#include "lsicert/quadrature.hpp"

#include <benchmark/benchmark.h>

namespace {

using namespace lsicert;

SmoothedMeasure bench_measure(int d, int n_atoms) {
  const Matrix X = kernels::serial::sample(SmoothedMeasure(BallMeasure::point_mass(d), 0.3), n_atoms, 7);
  return SmoothedMeasure(BallMeasure::uniform(X), 0.5);
}

template <bool Parallel>
void BM_log_density(benchmark::State& state) {
  const auto sm = bench_measure(2, 16);
  const Matrix pts = kernels::serial::sample(sm, static_cast<std::size_t>(state.range(0)), 11);
  for (auto _ : state) {
    Vector v = Parallel ? kernels::omp::log_density_points(sm, pts) : kernels::serial::log_density_points(sm, pts);
    benchmark::DoNotOptimize(v.data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

template <bool Parallel>
void BM_cost_matrix(benchmark::State& state) {
  const auto sm = bench_measure(2, 4);
  const auto n = static_cast<std::size_t>(state.range(0));
  const Matrix a = kernels::serial::sample(sm, n, 1), b = kernels::serial::sample(sm, n, 2);
  const CostSpec spec = CostSpec::paper_k();
  for (auto _ : state) {
    Matrix C = Parallel ? kernels::omp::cost_matrix(a, b, spec) : kernels::serial::cost_matrix(a, b, spec);
    benchmark::DoNotOptimize(C.data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0) * state.range(0));
}

template <bool Parallel>
void BM_sample(benchmark::State& state) {
  const auto sm = bench_measure(8, 32);
  const auto n = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) {
    Matrix S = Parallel ? kernels::omp::sample(sm, n, 3) : kernels::serial::sample(sm, n, 3);
    benchmark::DoNotOptimize(S.data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

template <bool Parallel>
void BM_hessian_range(benchmark::State& state) {
  const auto sm = bench_measure(2, 8);
  const Matrix pts = kernels::serial::sample(sm, static_cast<std::size_t>(state.range(0)), 5);
  for (auto _ : state) {
    auto r = Parallel ? kernels::omp::hessian_range(sm, pts) : kernels::serial::hessian_range(sm, pts);
    benchmark::DoNotOptimize(r);
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

template <bool Parallel>
void BM_gaussian_smooth(benchmark::State& state) {
  const auto sm = bench_measure(1, 8);
  const CubatureRule rule = gaussian_cubature(1, 64, 0.2);
  const kernels::ScalarField W = [&sm](const Vector& x) { return sm.w_delta(x); };
  Matrix pts(1, state.range(0));
  for (Eigen::Index k = 0; k < pts.cols(); ++k) pts(0, k) = -3.0 + 6.0 * k / (pts.cols() - 1.0);
  for (auto _ : state) {
    Vector v = Parallel ? kernels::omp::gaussian_smooth(W, rule.offsets, rule.weights, pts)
                        : kernels::serial::gaussian_smooth(W, rule.offsets, rule.weights, pts);
    benchmark::DoNotOptimize(v.data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

}  // namespace

BENCHMARK(BM_log_density<false>)->Arg(1 << 16);
BENCHMARK(BM_log_density<true>)->Arg(1 << 16);
BENCHMARK(BM_cost_matrix<false>)->Arg(512);
BENCHMARK(BM_cost_matrix<true>)->Arg(512);
BENCHMARK(BM_sample<false>)->Arg(1 << 17);
BENCHMARK(BM_sample<true>)->Arg(1 << 17);
BENCHMARK(BM_hessian_range<false>)->Arg(1 << 14);
BENCHMARK(BM_hessian_range<true>)->Arg(1 << 14);
BENCHMARK(BM_gaussian_smooth<false>)->Arg(2048);
BENCHMARK(BM_gaussian_smooth<true>)->Arg(2048);

BENCHMARK_MAIN();
