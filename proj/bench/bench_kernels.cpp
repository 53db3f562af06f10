// Serial reference kernels vs their OpenMP counterparts, plus the
// stream-parallel Monte Carlo paths.

#include <benchmark/benchmark.h>

#include "sscn/kernels.hpp"
#include "sscn/rng.hpp"
#include "sscn/sketch.hpp"
#include "sscn/solver.hpp"
#include "sscn/theory.hpp"
#include "sscn/verify.hpp"

using namespace sscn;

namespace {

Matrix random_matrix(Index n, Index k, std::uint64_t seed) {
  Rng rng = make_rng(seed);
  Matrix m(n, k);
  for (Index j = 0; j < k; ++j)
    for (Index i = 0; i < n; ++i) m(i, j) = uniform(rng, -1, 1);
  return m;
}

template <kernels::Policy P>
void BM_TransposeTimes(benchmark::State& state) {
  const Index n = state.range(0), tau = state.range(1);
  const Matrix cols = random_matrix(n, tau, 1);
  const Vector u = random_matrix(n, 1, 2).col(0);
  for (auto _ : state) benchmark::DoNotOptimize(kernels::transpose_times(P, cols, u));
  state.SetItemsProcessed(state.iterations() * n * tau);
}

template <kernels::Policy P>
void BM_WeightedGram(benchmark::State& state) {
  const Index n = state.range(0), tau = state.range(1);
  const Matrix cols = random_matrix(n, tau, 3);
  const Vector w = random_matrix(n, 1, 4).col(0).cwiseAbs();
  for (auto _ : state) benchmark::DoNotOptimize(kernels::weighted_gram(P, cols, w));
  state.SetItemsProcessed(state.iterations() * n * tau * tau);
}

template <kernels::Policy P>
void BM_AddProduct(benchmark::State& state) {
  const Index n = state.range(0), tau = state.range(1);
  const Matrix cols = random_matrix(n, tau, 5);
  const Vector h = random_matrix(tau, 1, 6).col(0);
  Vector r = Vector::Zero(n);
  for (auto _ : state) {
    kernels::add_product(P, r, cols, h);
    benchmark::ClobberMemory();
  }
  state.SetItemsProcessed(state.iterations() * n * tau);
}

template <kernels::Policy P>
void BM_Sum(benchmark::State& state) {
  const Vector v = random_matrix(state.range(0), 1, 7).col(0);
  for (auto _ : state) benchmark::DoNotOptimize(kernels::sum(P, kernels::as_span(v)));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

template <kernels::Policy P>
void BM_SscnIterations(benchmark::State& state) {
  auto f = make_logistic(state.range(0), 50, 0.1, 0);
  f->set_kernel_policy(P);
  RunConfig cfg;
  cfg.sampler = SamplerSpec::uniform(state.range(1));
  cfg.max_iterations = 100;
  cfg.trace_every = 1000;
  const RunContext ctx{std::nullopt, estimate_constants(*f), std::nullopt};
  for (auto _ : state) benchmark::DoNotOptimize(sscn_run(*f, cfg, Vector::Zero(50), ctx));
  state.SetItemsProcessed(state.iterations() * 100);
}

void BM_ZetaMonteCarlo(benchmark::State& state) {
  const Matrix G = random_matrix(30, 30, 8);
  const Matrix H = G * G.transpose() + Matrix::Identity(30, 30);
  const bool parallel = state.range(0) != 0;
  for (auto _ : state) benchmark::DoNotOptimize(compute_zeta(H, SamplerSpec::uniform(5), 20000, 0, true, parallel));
}

void BM_EmpiricalProjection(benchmark::State& state) {
  const bool parallel = state.range(0) != 0;
  for (auto _ : state)
    benchmark::DoNotOptimize(empirical_projection(SamplerSpec::uniform(3), 100, 100000, 0, parallel));
}

constexpr auto kSerial = kernels::Policy::serial;
constexpr auto kParallel = kernels::Policy::parallel;

void shapes(benchmark::internal::Benchmark* b) {
  for (long n : {10000L, 200000L})
    for (long tau : {1L, 8L}) b->Args({n, tau});
}

}  // namespace

BENCHMARK(BM_TransposeTimes<kSerial>)->Apply(shapes);
BENCHMARK(BM_TransposeTimes<kParallel>)->Apply(shapes);
BENCHMARK(BM_WeightedGram<kSerial>)->Apply(shapes);
BENCHMARK(BM_WeightedGram<kParallel>)->Apply(shapes);
BENCHMARK(BM_AddProduct<kSerial>)->Apply(shapes);
BENCHMARK(BM_AddProduct<kParallel>)->Apply(shapes);
BENCHMARK(BM_Sum<kSerial>)->Arg(1 << 20);
BENCHMARK(BM_Sum<kParallel>)->Arg(1 << 20);
BENCHMARK(BM_SscnIterations<kSerial>)->Args({20000, 5});
BENCHMARK(BM_SscnIterations<kParallel>)->Args({20000, 5});
BENCHMARK(BM_ZetaMonteCarlo)->Arg(0)->Arg(1);
BENCHMARK(BM_EmpiricalProjection)->Arg(0)->Arg(1);

BENCHMARK_MAIN();
