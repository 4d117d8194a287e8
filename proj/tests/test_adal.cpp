#include "hvac/adal.hpp"
#include "hvac/qp.hpp"

#include <gtest/gtest.h>

using namespace hvac;

namespace {

// min (x - target)^2 on [lo, hi]
AdalAgent scalar_agent(double target, double lo, double hi, std::vector<int> rows, Matrix coupling) {
  AdalAgent a;
  a.local = QpProblem::unconstrained(1);
  a.local.quadratic = Matrix::Constant(1, 1, 2.0);
  a.local.linear = Vector::Constant(1, -2.0 * target);
  a.local.lower = Vector::Constant(1, lo);
  a.local.upper = Vector::Constant(1, hi);
  a.rows = std::move(rows);
  a.coupling = std::move(coupling);
  return a;
}

}  // namespace

TEST(Adal, SatisfiedCouplingStopsAtFirstIteration) {
  AdalProblem p;
  p.agents.push_back(scalar_agent(1.0, -5.0, 5.0, {0}, Matrix::Ones(1, 1)));
  p.agents.push_back(scalar_agent(-1.0, -5.0, 5.0, {0}, Matrix::Ones(1, 1)));
  p.rhs = Vector::Zero(1);
  AdalConfig cfg;
  AdalSolver solver(p, cfg);
  auto r = solver.run();
  ASSERT_TRUE(r.converged());
  EXPECT_EQ(r.iterations, 1);
  EXPECT_EQ(r.multipliers(0), 0.0);
  EXPECT_NEAR(r.x[0](0), 1.0, 1e-8);
  EXPECT_NEAR(r.x[1](0), -1.0, 1e-8);
}

TEST(Adal, DecoupledAgentsSolveIndependently) {
  AdalProblem p;
  p.agents.push_back(scalar_agent(0.7, 0.0, 0.5, {}, Matrix(0, 1)));
  p.agents.push_back(scalar_agent(-0.2, 0.0, 0.5, {}, Matrix(0, 1)));
  p.rhs = Vector::Zero(0);
  auto r = AdalSolver(p, AdalConfig{}).run();
  ASSERT_TRUE(r.converged());
  EXPECT_NEAR(r.x[0](0), 0.5, 1e-8);
  EXPECT_NEAR(r.x[1](0), 0.0, 1e-8);
}

TEST(Adal, SharedCapacityMatchesCentralizedSolve) {
  // x1 + x2 + s = cap with s >= 0 held by a third agent.
  const double cap = 0.5;
  AdalProblem p;
  p.agents.push_back(scalar_agent(0.4, 0.0, 0.5, {0}, Matrix::Ones(1, 1)));
  p.agents.push_back(scalar_agent(0.35, 0.0, 0.5, {0}, Matrix::Ones(1, 1)));
  AdalAgent slack;
  slack.local = QpProblem::unconstrained(1);
  slack.local.quadratic = Matrix::Zero(1, 1);
  slack.local.lower = Vector::Zero(1);
  slack.local.upper = Vector::Constant(1, cap);
  slack.rows = {0};
  slack.coupling = Matrix::Ones(1, 1);
  p.agents.push_back(slack);
  p.rhs = Vector::Constant(1, cap);

  AdalConfig cfg;
  cfg.tau = 1.0 / 3.0;
  cfg.max_inner = 2000;
  auto r = AdalSolver(p, cfg).run();
  ASSERT_TRUE(r.converged());
  EXPECT_NEAR(r.x[0](0) + r.x[1](0), cap, cfg.eps_in);

  QpProblem c = QpProblem::unconstrained(2);
  c.quadratic = 2.0 * Matrix::Identity(2, 2);
  c.linear << -0.8, -0.7;
  c.ineq_a = Matrix::Ones(1, 2);
  c.ineq_b = Vector::Constant(1, cap);
  c.lower = Vector::Zero(2);
  c.upper = Vector::Constant(2, 0.5);
  auto central = solve_qp(c);
  ASSERT_TRUE(central.ok());
  EXPECT_NEAR(r.x[0](0), central.x(0), 5e-3);
  EXPECT_NEAR(r.x[1](0), central.x(1), 5e-3);
}

TEST(Adal, ReportsInfeasibleAgent) {
  AdalProblem p;
  AdalAgent a = scalar_agent(0.0, 0.0, 1.0, {0}, Matrix::Ones(1, 1));
  a.local.ineq_a = Matrix::Ones(1, 1);
  a.local.ineq_b = Vector::Constant(1, -1.0);
  p.agents.push_back(a);
  p.agents.push_back(scalar_agent(0.0, 0.0, 1.0, {0}, Matrix::Ones(1, 1)));
  p.rhs = Vector::Zero(1);
  auto r = AdalSolver(p, AdalConfig{}).run();
  EXPECT_EQ(r.status, AdalStatus::infeasible);
  EXPECT_EQ(r.infeasible_agent, 0);
}

TEST(Adal, ResidualBalancingStillConverges) {
  AdalProblem p;
  p.agents.push_back(scalar_agent(2.0, -5.0, 5.0, {0}, Matrix::Ones(1, 1)));
  p.agents.push_back(scalar_agent(2.0, -5.0, 5.0, {0}, -Matrix::Ones(1, 1)));
  p.agents.push_back(scalar_agent(-1.0, -5.0, 5.0, {1}, Matrix::Ones(1, 1)));
  p.agents[1].rows = {0, 1};
  p.agents[1].coupling = Matrix(2, 1);
  p.agents[1].coupling << -1.0, -1.0;
  p.rhs = Vector::Zero(2);
  for (bool balance : {false, true}) {
    AdalConfig cfg;
    cfg.residual_balancing = balance;
    cfg.record_history = true;
    auto r = AdalSolver(p, cfg).run();
    ASSERT_TRUE(r.converged()) << balance;
    EXPECT_LE(r.residual_norm, cfg.eps_in);
    // consensus x0 = x1 = x2 at the mean of the targets
    EXPECT_NEAR(r.x[0](0), 1.0, 1e-2);
    EXPECT_NEAR(r.x[2](0), 1.0, 1e-2);
  }
}

TEST(AdalConfig, Validation) {
  AdalConfig c;
  c.tau = 0.0;
  EXPECT_THROW(c.validate(), InputError);
  c = AdalConfig{};
  c.rho = -1.0;
  EXPECT_THROW(c.validate(), InputError);
}
