#include <benchmark/benchmark.h>

#include "wht/bench.hpp"
#include "wht/dsm.hpp"
#include "wht/solvers.hpp"

namespace {

using namespace wht;

struct Problem {
  CsInstance inst;
  LeastSquares ls;
  DiagonalScaling d;
  SparseIterate x;

  explicit Problem(std::size_t s)
      : inst(generate_cs_instance(64, 256, s, 42)),
        ls(inst.a, inst.b),
        d(DiagonalScaling::uniform(256, max_eigenvalue(ls.hessian_bound()).value)),
        x(project_sparse(ls.gradient(Vector(256, 0.0)), s)) {}
};

void BM_WeightedStep(benchmark::State& state) {
  const Problem p(static_cast<std::size_t>(state.range(0)));
  const auto g = p.ls.gradient(p.x.x);
  for (auto _ : state) benchmark::DoNotOptimize(weighted_step(p.x, g, p.d));
}
BENCHMARK(BM_WeightedStep)->Arg(10)->Arg(30);

void BM_Gradient(benchmark::State& state) {
  const Problem p(10);
  for (auto _ : state) benchmark::DoNotOptimize(p.ls.gradient(p.x.x));
}
BENCHMARK(BM_Gradient);

void BM_LineSearchStep(benchmark::State& state) {
  const Problem p(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(line_search_step(p.ls, p.x, p.d, 0.5, 8, 1e-4));
}
BENCHMARK(BM_LineSearchStep)->Arg(10)->Arg(30);

void BM_NewtonStep(benchmark::State& state) {
  const Problem p(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(newton_step(p.ls, p.x, 1e-4));
}
BENCHMARK(BM_NewtonStep)->Arg(10)->Arg(30);

DenseMatrix bench_gram(std::size_t n) {
  return gram(generate_cs_instance(n / 8, n, 1, 7).a);
}

void BM_MaxEigenvalue(benchmark::State& state) {
  const auto c = bench_gram(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(max_eigenvalue(c));
}
BENCHMARK(BM_MaxEigenvalue)->Arg(256)->Arg(512)->Unit(benchmark::kMillisecond);

void BM_BcmSweep(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto model = state.range(1) ? DsmModel::quadratic : DsmModel::linear;
  const auto c = bench_gram(n);
  DenseMatrix b = initial_factor(n, default_rank(n), 1);
  for (auto _ : state) {
    benchmark::DoNotOptimize(model == DsmModel::linear ? bcm_linear_sweep(c, b) : bcm_quadratic_sweep(c, b));
  }
}
BENCHMARK(BM_BcmSweep)->Args({256, 0})->Args({256, 1})->Args({512, 0})->Unit(benchmark::kMillisecond);

void BM_BcmParallelSweep(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto c = bench_gram(n);
  DenseMatrix b = initial_factor(n, default_rank(n), 1);
  for (auto _ : state) bcm_parallel_sweep(c, b, DsmModel::linear, workers_from_env(1));
}
BENCHMARK(BM_BcmParallelSweep)->Arg(256)->Arg(512)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
