// Serial reference kernels against the OpenMP versions.
//
//   bench_kernels --benchmark_filter=forward_cov

#include <map>

#include <benchmark/benchmark.h>

#include "randsource/kernels.hpp"
#include "randsource/operator.hpp"
#include "randsource/phantom.hpp"

using namespace randsource;

namespace {

struct Problem {
  GridPtr grid;
  MeasurementBasis basis;
  Eigen::MatrixXcd A;
  Eigen::VectorXd wq;
  Eigen::MatrixXcd C;
};

const Problem& problem(int n) {
  static std::map<int, Problem> cache;
  auto it = cache.find(n);
  if (it == cache.end()) {
    Problem p;
    p.grid = make_grid(3, n);
    p.basis = MeasurementBasis::with_default_degree(4.0, 3.0, 6);
    p.A = kernels::parallel::assemble_potential(*p.grid, p.basis);
    p.wq = p.grid->weight * eval_phantom(phantom_shapes(3), p.grid).values;
    p.C = kernels::parallel::forward_cov(p.A, p.wq);
    it = cache.emplace(n, std::move(p)).first;
  }
  return it->second;
}

void set_counters(benchmark::State& state, const Problem& p) {
  state.counters["M"] = static_cast<double>(p.A.rows());
  state.counters["J"] = static_cast<double>(p.A.cols());
}

template <bool Parallel>
void assemble(benchmark::State& state) {
  const auto& p = problem(static_cast<int>(state.range(0)));
  for (auto _ : state) {
    auto A = Parallel ? kernels::parallel::assemble_potential(*p.grid, p.basis)
                      : kernels::serial::assemble_potential(*p.grid, p.basis);
    benchmark::DoNotOptimize(A.data());
  }
  set_counters(state, p);
}

template <bool Parallel>
void forward(benchmark::State& state) {
  const auto& p = problem(static_cast<int>(state.range(0)));
  for (auto _ : state) {
    auto C = Parallel ? kernels::parallel::forward_cov(p.A, p.wq) : kernels::serial::forward_cov(p.A, p.wq);
    benchmark::DoNotOptimize(C.data());
  }
  set_counters(state, p);
}

template <bool Parallel>
void adjoint(benchmark::State& state) {
  const auto& p = problem(static_cast<int>(state.range(0)));
  for (auto _ : state) {
    auto v = Parallel ? kernels::parallel::adjoint_cov(p.A, p.C) : kernels::serial::adjoint_cov(p.A, p.C);
    benchmark::DoNotOptimize(v.data());
  }
  set_counters(state, p);
}

template <bool Parallel>
void normal(benchmark::State& state) {
  const auto& p = problem(static_cast<int>(state.range(0)));
  for (auto _ : state) {
    auto S = Parallel ? kernels::parallel::normal_matrix_lower(p.A) : kernels::serial::normal_matrix(p.A);
    benchmark::DoNotOptimize(S.data());
  }
  set_counters(state, p);
}

}  // namespace

BENCHMARK(assemble<false>)->Name("assemble_potential/serial")->Arg(8)->Arg(12)->Unit(benchmark::kMillisecond);
BENCHMARK(assemble<true>)->Name("assemble_potential/parallel")->Arg(8)->Arg(12)->Unit(benchmark::kMillisecond);
BENCHMARK(forward<false>)->Name("forward_cov/serial")->Arg(8)->Arg(12)->Unit(benchmark::kMillisecond);
BENCHMARK(forward<true>)->Name("forward_cov/parallel")->Arg(8)->Arg(12)->Unit(benchmark::kMillisecond);
BENCHMARK(adjoint<false>)->Name("adjoint_cov/serial")->Arg(8)->Arg(12)->Unit(benchmark::kMillisecond);
BENCHMARK(adjoint<true>)->Name("adjoint_cov/parallel")->Arg(8)->Arg(12)->Unit(benchmark::kMillisecond);
BENCHMARK(normal<false>)->Name("normal_matrix/serial")->Arg(8)->Unit(benchmark::kMillisecond);
BENCHMARK(normal<true>)->Name("normal_matrix/parallel")->Arg(8)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
