#include "hvac/baselines.hpp"
#include "hvac/scenario_gen.hpp"
#include "hvac/ulc.hpp"
#include "support.hpp"

#include <gtest/gtest.h>

using namespace hvac;
using namespace hvac::test;

namespace {

Vector profile(const Building& b, double d) { return Vector::Constant(b.horizon.horizon_steps, d); }

PlantState mid_afternoon(const Case& c) {
  PlantState s;
  s.temps = Vector::Constant(static_cast<Eigen::Index>(c.building.zone_count()), 25.0);
  s.co2 = Vector::Constant(static_cast<Eigen::Index>(c.building.zone_count()), 500.0);
  s.time_index = 28;
  return s;
}

}  // namespace

TEST(Ulc, NoLoadNoCostGivesZeroFlow) {
  Building b = isolated_building(1, 3, 6);
  Scenario s = constant_scenario(b, 25.0, 0.0, 0.0, 0.0);
  auto r = solve_ulc(b, s, s.initial_state(), profile(b, b.ahu.dr_max));
  ASSERT_TRUE(r.converged);
  // Zero price: every in-band plan is optimal, zero flow included.
  EXPECT_NEAR(r.objective, 0.0, 1e-9);
  auto idle = rollout(b, s, s.initial_state(), ControlPlan{Matrix::Zero(1, 3), profile(b, b.ahu.dr_max)});
  EXPECT_NEAR(idle.temps.maxCoeff(), 25.0, 1e-12);
  EXPECT_NEAR(idle.temps.minCoeff(), 25.0, 1e-12);

  // Any positive price makes flow strictly costly.
  s = constant_scenario(b, 25.0, 0.0, 0.0, 0.2);
  r = solve_ulc(b, s, s.initial_state(), profile(b, b.ahu.dr_max));
  ASSERT_TRUE(r.converged);
  EXPECT_LT(r.flows.cwiseAbs().maxCoeff(), 1e-3);
}

TEST(Ulc, CloseToGridOptimumOnOneZone) {
  Building b = isolated_building(1, 2, 4);
  Scenario s = constant_scenario(b, 33.0, 0.0, 1.5);
  s.initial_temps(0) = 25.6;
  const PlantState st = s.initial_state();
  auto r = solve_ulc(b, s, st, profile(b, b.ahu.dr_max));
  ASSERT_TRUE(r.converged);

  OracleOptions oo;
  oo.flow_levels = 21;
  oo.dr_levels = 1;
  auto orc = brute_force_oracle(b, s, st, oo);
  ASSERT_TRUE(orc.feasible);
  // relaxation lower-bounds every exactly feasible plan
  EXPECT_LE(r.objective, orc.cost + 1e-6);
  EXPECT_LE(r.exact_cost, 1.05 * orc.cost);
}

TEST(Ulc, DecoupledZonesMatchIndependentSolves) {
  Building b = isolated_building(2, 3, 6);
  b.ahu.total_flow_max = 1.0;
  Scenario s = constant_scenario(b, 32.0, 0.0, 1.0);
  s.internal_gain[1].assign(s.internal_gain[1].size(), 2.0);
  s.initial_temps << 25.5, 25.0;
  auto joint = solve_ulc(b, s, s.initial_state(), profile(b, 0.9));
  ASSERT_TRUE(joint.converged);
  for (int z = 0; z < 2; ++z) {
    Building bz = isolated_building(1, 3, 6);
    Scenario sz = constant_scenario(bz, 32.0, 0.0, z == 0 ? 1.0 : 2.0);
    sz.initial_temps(0) = s.initial_temps(z);
    auto alone = solve_ulc(bz, sz, sz.initial_state(), profile(bz, 0.9));
    ASSERT_TRUE(alone.converged);
    EXPECT_LT((joint.flows.row(z) - alone.flows.row(0)).cwiseAbs().maxCoeff(), 5e-3) << "zone " << z;
  }
}

TEST(Ulc, BenchmarkConvergesAndRespectsCapacity) {
  Case c = benchmark5();
  AdalConfig cfg = UlcOptions::default_adal();
  UlcOptions o;
  o.adal.max_inner = 200;
  auto r = solve_ulc(c.building, c.scenario, c.scenario.initial_state(), profile(c.building, 0.9), o);
  EXPECT_TRUE(r.converged);
  EXPECT_LE(r.residual, cfg.eps_in);
  EXPECT_LE(r.iterations, 200);
  for (int k = 0; k < r.flows.cols(); ++k) EXPECT_LE(r.flows.col(k).sum(), c.building.ahu.total_flow_max);
  ControlPlan p{r.flows, profile(c.building, 0.9)};
  EXPECT_TRUE(p.check(c.building).empty());
}

TEST(Ulc, RecoveredTemperaturesStayNearBand) {
  Case c = benchmark5();
  for (int t : {20, 28, 34}) {
    PlantState s = mid_afternoon(c);
    s.time_index = t;
    auto r = solve_ulc(c.building, c.scenario, s, profile(c.building, 0.9));
    ASSERT_TRUE(r.converged);
    for (std::size_t i = 0; i < c.building.zone_count(); ++i) {
      const auto ii = static_cast<Eigen::Index>(i);
      EXPECT_GE(r.recovered_temps.row(ii).tail(10).minCoeff(), c.building.zones[i].temp_min - 0.1);
      EXPECT_LE(r.recovered_temps.row(ii).tail(10).maxCoeff(), c.building.zones[i].temp_max + 0.1);
    }
  }
}

TEST(Ulc, CostNonIncreasingInRecirculation) {
  Case c = benchmark5();
  const PlantState s = mid_afternoon(c);
  double prev = -1.0;
  for (double d : {0.9, 0.6, 0.3, 0.0}) {
    auto r = solve_ulc(c.building, c.scenario, s, profile(c.building, d));
    ASSERT_TRUE(r.converged);
    if (prev >= 0.0) EXPECT_GE(r.objective, prev - 1e-3 * prev) << "d=" << d;
    prev = r.objective;
  }
}

TEST(Ulc, ReusedSolverMatchesFreshSolve) {
  Case c = benchmark5();
  const PlantState s = mid_afternoon(c);
  UlcSolver solver(c.building, c.scenario, s, {s.time_index, c.building.horizon.horizon_steps});
  solver.solve(profile(c.building, 0.9));
  auto warm = solver.solve(profile(c.building, 0.5));
  auto cold = solve_ulc(c.building, c.scenario, s, profile(c.building, 0.5));
  ASSERT_TRUE(warm.converged);
  EXPECT_NEAR(warm.objective, cold.objective, 2e-3 * cold.objective);
}

TEST(Ulc, DeterministicResult) {
  Case c = benchmark5();
  const PlantState s = mid_afternoon(c);
  auto a = solve_ulc(c.building, c.scenario, s, profile(c.building, 0.7));
  auto b = solve_ulc(c.building, c.scenario, s, profile(c.building, 0.7));
  EXPECT_EQ(a.flows, b.flows);
  EXPECT_EQ(a.iterations, b.iterations);
}

TEST(UlcBounds, TransientRelaxationFromHotStart) {
  Case c = benchmark5();
  const PlantState s = c.scenario.initial_state();
  auto bd = ulc_bounds(c.building, c.scenario, s, {0, c.building.horizon.horizon_steps}, UlcOptions{});
  // Upper bound is the band or the fastest reachable trajectory plus margin, whichever is higher.
  const double margin = UlcOptions{}.transient_margin;
  for (Eigen::Index i = 0; i < bd.temp_hi.rows(); ++i) {
    const auto& z = c.building.zones[static_cast<std::size_t>(i)];
    for (Eigen::Index k = 0; k < bd.temp_hi.cols(); ++k) {
      EXPECT_DOUBLE_EQ(bd.temp_hi(i, k), std::max(z.temp_max, bd.fastest(i, k + 1) + margin));
      EXPECT_LE(bd.temp_lo(i, k), z.temp_min);
    }
  }

  // A start too hot to reach the band in one step relaxes the first sample only as far as needed.
  PlantState hot = s;
  hot.temps = Vector::Constant(5, 40.0);
  bd = ulc_bounds(c.building, c.scenario, hot, {0, c.building.horizon.horizon_steps}, UlcOptions{});
  EXPECT_GT(bd.temp_hi(0, 0), c.building.zones[0].temp_max);
  EXPECT_NEAR(bd.temp_hi(0, 0), bd.fastest(0, 1) + margin, 1e-12);
}
