#include "hvac/qp.hpp"

#include <benchmark/benchmark.h>

#include <random>

using namespace hvac;

namespace {

// Box- and row-constrained QP shaped like a zone subproblem (3H + slack variables).
QpProblem random_qp(int n, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  Matrix m(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) m(i, j) = g(rng);
  QpProblem p = QpProblem::unconstrained(n);
  p.quadratic = m * m.transpose() + Matrix::Identity(n, n);
  p.linear = Vector::NullaryExpr(n, [&] { return g(rng) * 5.0; });
  const int rows = n / 2;
  p.ineq_a = Matrix::NullaryExpr(rows, n, [&] { return g(rng); });
  p.ineq_b = Vector::Constant(rows, 1.0);
  p.lower = Vector::Constant(n, -1.0);
  p.upper = Vector::Constant(n, 1.0);
  return p;
}

void BM_QpCold(benchmark::State& state) {
  const QpProblem p = random_qp(static_cast<int>(state.range(0)), 7);
  for (auto _ : state) {
    auto s = solve_qp(p);
    benchmark::DoNotOptimize(s.objective);
  }
}
BENCHMARK(BM_QpCold)->Arg(6)->Arg(16)->Arg(31);

// Repeated solves with a drifting linear term, as inside the coordination loop.
void BM_QpWarm(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  QpProblem p = random_qp(n, 11);
  QpSolver solver(p);
  solver.solve();
  std::mt19937_64 rng(3);
  std::normal_distribution<double> g(0.0, 0.05);
  Vector c = p.linear;
  for (auto _ : state) {
    for (int i = 0; i < n; ++i) c[i] = p.linear[i] + g(rng);
    auto s = solver.solve(c);
    benchmark::DoNotOptimize(s.objective);
  }
}
BENCHMARK(BM_QpWarm)->Arg(6)->Arg(16)->Arg(31);

}  // namespace

BENCHMARK_MAIN();
