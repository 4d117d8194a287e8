#include "hvac/qp.hpp"
#include "oracles.hpp"
#include "support.hpp"

#include <gtest/gtest.h>

#include <limits>
#include <random>

using namespace hvac;
using namespace hvac::test;

TEST(SolveQp, ProjectionOntoHalfLine) {
  QpProblem p = QpProblem::unconstrained(1);
  p.quadratic = Matrix::Constant(1, 1, 2.0);
  p.lower = Vector::Constant(1, 1.0);
  auto s = solve_qp(p);
  ASSERT_TRUE(s.ok());
  EXPECT_NEAR(s.x(0), 1.0, 1e-8);
  EXPECT_NEAR(s.objective, 1.0, 1e-8);
}

TEST(SolveQp, ClampedUnconstrainedOptimum) {
  QpProblem p = QpProblem::unconstrained(1);
  p.quadratic = Matrix::Constant(1, 1, 2.0);
  p.linear = Vector::Constant(1, -6.0);
  p.lower = Vector::Zero(1);
  p.upper = Vector::Constant(1, 2.0);
  auto s = solve_qp(p);
  ASSERT_TRUE(s.ok());
  EXPECT_NEAR(s.x(0), 2.0, 1e-8);
}

TEST(SolveQp, EqualityConstrainedSymmetric) {
  QpProblem p = QpProblem::unconstrained(2);
  p.quadratic = 2.0 * Matrix::Identity(2, 2);
  p.eq_a = Matrix::Ones(1, 2);
  p.eq_b = Vector::Ones(1);
  auto s = solve_qp(p);
  ASSERT_TRUE(s.ok());
  EXPECT_NEAR(s.x(0), 0.5, 1e-8);
  EXPECT_NEAR(s.x(1), 0.5, 1e-8);
  EXPECT_LE(s.kkt_residual, 1e-8);
}

TEST(SolveQp, DetectsInfeasibility) {
  QpProblem p = QpProblem::unconstrained(2);
  p.quadratic = Matrix::Identity(2, 2);
  p.ineq_a = Matrix::Ones(1, 2);
  p.ineq_b = Vector::Constant(1, -3.0);
  p.lower = Vector::Constant(2, -1.0);
  p.upper = Vector::Constant(2, 1.0);
  EXPECT_EQ(solve_qp(p).status, QpStatus::infeasible);
}

TEST(SolveQp, InfeasibilityMatchesBoxRange) {
  // One row a'x over a box reaches exactly [sum min(a lo, a up), sum max(...)].
  std::mt19937_64 rng(23);
  for (int t = 0; t < 200; ++t) {
    const Eigen::Index n = 2 + t % 5;
    QpProblem p = QpProblem::unconstrained(n);
    p.quadratic = Matrix::Identity(n, n);
    p.lower = Vector::NullaryExpr(n, [&] { return uniform(rng, -2.0, 0.0); });
    p.upper = p.lower + Vector::NullaryExpr(n, [&] { return uniform(rng, 0.1, 2.0); });
    const Vector a = Vector::NullaryExpr(n, [&] { return uniform(rng, -1.0, 1.0); });
    const double lo = a.cwiseProduct(p.lower).cwiseMin(a.cwiseProduct(p.upper)).sum();
    const double hi = a.cwiseProduct(p.lower).cwiseMax(a.cwiseProduct(p.upper)).sum();
    const bool equality = t % 2 == 0;
    const bool feasible = t % 4 < 2;
    const double b = feasible ? lo + 1e-3 : (equality && t % 8 >= 4 ? hi + 1e-3 : lo - 1e-3);
    if (equality) {
      p.eq_a = a.transpose();
      p.eq_b = Vector::Constant(1, b);
    } else {
      p.ineq_a = a.transpose();
      p.ineq_b = Vector::Constant(1, b);
    }
    const auto s = solve_qp(p);
    if (feasible) {
      EXPECT_TRUE(s.ok()) << "trial " << t;
      EXPECT_LE(p.violation(s.x), 1e-8) << "trial " << t;
    } else {
      EXPECT_EQ(s.status, QpStatus::infeasible) << "trial " << t;
    }
  }
}

TEST(SolveQp, RejectsMalformedInput) {
  QpProblem p = QpProblem::unconstrained(2);
  p.lower(0) = 2.0;
  p.upper(0) = 1.0;
  EXPECT_THROW(p.validate(), InputError);
  p = QpProblem::unconstrained(2);
  p.linear(1) = std::numeric_limits<double>::quiet_NaN();
  EXPECT_THROW(p.validate(), InputError);
}

TEST(ProjectBox, Examples) {
  Vector lo = Vector::Zero(2), hi = Vector::Ones(2);
  Vector x(2);
  x << 0.3, 0.7;
  EXPECT_EQ(project_box(x, lo, hi), x);
  x << -1.0, 5.0;
  Vector once = project_box(x, lo, hi);
  EXPECT_EQ(once(0), 0.0);
  EXPECT_EQ(once(1), 1.0);
  EXPECT_EQ(project_box(once, lo, hi), once);
}

TEST(SolveQp, MatchesEnumerationOracle) {
  std::mt19937_64 rng(2024);
  for (int trial = 0; trial < 300; ++trial) {
    const int n = 1 + static_cast<int>(rng() % 6);
    const QpProblem p = random_feasible_qp(rng, n, trial % 4 == 3);
    const double oracle = enumerate_optimum(p);
    ASSERT_TRUE(std::isfinite(oracle)) << "trial " << trial;
    const auto s = solve_qp(p);
    ASSERT_TRUE(s.ok()) << "trial " << trial << " status " << to_string(s.status);
    EXPECT_NEAR(s.objective, oracle, 1e-6 * (1.0 + std::abs(oracle))) << "trial " << trial;
    EXPECT_LE(p.violation(s.x), 1e-7);
  }
}

TEST(SolveQp, NoFeasibleDescentDirection) {
  std::mt19937_64 rng(77);
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 2 + static_cast<int>(rng() % 5);
    const QpProblem p = random_feasible_qp(rng, n, false);
    const auto s = solve_qp(p);
    ASSERT_TRUE(s.ok());
    for (int d = 0; d < 50; ++d) {
      Vector dir = Vector::NullaryExpr(n, [&] { return uniform(rng, -1.0, 1.0); });
      for (double step : {1e-3, 1e-2, 1e-1}) {
        const Vector y = s.x + step * dir;
        if (p.violation(y) > 0.0) continue;
        EXPECT_GE(p.objective(y), s.objective - 1e-7);
      }
    }
  }
}

TEST(QpSolver, WarmAndColdStartsAgree) {
  std::mt19937_64 rng(13);
  for (int trial = 0; trial < 50; ++trial) {
    const int n = 2 + static_cast<int>(rng() % 5);
    QpProblem p = random_feasible_qp(rng, n, false);
    QpSolver solver(p);
    solver.solve();
    for (int r = 0; r < 5; ++r) {
      Vector c = p.linear + Vector::NullaryExpr(n, [&] { return uniform(rng, -1.0, 1.0); });
      const auto warm = solver.solve(c);
      QpProblem q = p;
      q.linear = c;
      const auto cold = solve_qp(q);
      ASSERT_TRUE(warm.ok());
      EXPECT_LT((warm.x - cold.x).cwiseAbs().maxCoeff(), 1e-7);
    }
  }
}
