#include "hvac/model.hpp"
#include "hvac/scenario_gen.hpp"
#include "support.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace hvac;
using namespace hvac::test;

TEST(ThermalCoeffs, IsolatedZoneSelfTerm) {
  Building b = isolated_building();
  Scenario s = constant_scenario(b, 32.0, 0.0, 0.0);
  auto c = thermal_coeffs(b, s, {0, 3});
  EXPECT_NEAR(c.a_self(0), 0.976, 1e-12);
  EXPECT_NEAR(c.c_flow(0), -1.2144, 1e-12);
  EXPECT_NEAR(c.d_drive(0, 0), 1800.0 * 32.0 / (1500.0 * 50.0), 1e-12);
}

TEST(ThermalCoeffs, NeighbourTerm) {
  Building b = isolated_building(2);
  b.topology = BuildingTopology(2, {{0, 1, 14.0}});
  Scenario s = constant_scenario(b, 30.0, 0.0, 0.0);
  auto c = thermal_coeffs(b, s, {0, 1});
  ASSERT_EQ(c.a_neighbor[0].size(), 1u);
  EXPECT_NEAR(c.a_neighbor[0][0].second, 1800.0 / (14.0 * 1500.0), 1e-12);
  EXPECT_NEAR(c.a_neighbor[0][0].second, 0.0857142857, 1e-9);
  EXPECT_NEAR(c.a_self(0), 1.0 - 0.024 - 1800.0 / 21000.0, 1e-12);
}

TEST(ThermalCoeffs, RejectsBadParameters) {
  Building b = isolated_building();
  Scenario s = constant_scenario(b, 30.0, 0.0, 0.0);
  b.zones[0].heat_capacity = 0.0;
  EXPECT_THROW(thermal_coeffs(b, s, {0, 1}), ParameterError);
  b.zones[0].heat_capacity = 1500.0;
  b.zones[0].resistance_to_outside = -1.0;
  EXPECT_THROW(thermal_coeffs(b, s, {0, 1}), ParameterError);
  b.zones[0].resistance_to_outside = 50.0;
  EXPECT_THROW(thermal_coeffs(b, s, {5, 100}), InputError);
}

TEST(ThermalStep, WorkedExample) {
  Building b = isolated_building();
  Scenario s = constant_scenario(b, 32.0, 0.0, 0.0);
  auto c = thermal_coeffs(b, s, {0, 1});
  Vector t = thermal_step(Vector::Constant(1, 30.0), Vector::Constant(1, 0.3), c, 0);
  EXPECT_NEAR(t(0), 24.5832, 1e-9);
}

TEST(ThermalStep, FixedPointAtOutdoorTemperature) {
  Building b = isolated_building(3);
  b.topology = BuildingTopology(3, {{0, 1, 14.0}, {1, 2, 20.0}});
  Scenario s = constant_scenario(b, 28.0, 0.0, 0.0);
  auto c = thermal_coeffs(b, s, {0, 2});
  Vector t = Vector::Constant(3, 28.0);
  Vector next = thermal_step(t, Vector::Zero(3), c, 1);
  EXPECT_LT((next - t).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(ThermalStep, SymmetricZonesGetEqualUpdates) {
  Building b = isolated_building(2);
  b.topology = BuildingTopology(2, {{0, 1, 14.0}});
  Scenario s = constant_scenario(b, 31.0, 3.0, 0.5);
  auto c = thermal_coeffs(b, s, {0, 1});
  Vector next = thermal_step(Vector::Constant(2, 27.0), Vector::Constant(2, 0.2), c, 0);
  EXPECT_DOUBLE_EQ(next(0), next(1));
}

TEST(SupplyCo2, Examples) {
  Vector co2(2);
  co2 << 600.0, 800.0;
  EXPECT_DOUBLE_EQ(supply_co2(co2, Vector::Constant(2, 0.3), 0.0, 400.0).value, 400.0);
  EXPECT_DOUBLE_EQ(supply_co2(co2, Vector::Constant(2, 0.3), 1.0, 400.0).value, 700.0);
  Vector f(2);
  f << 0.3, 0.1;
  co2 << 600.0, 1000.0;
  auto m = supply_co2(co2, f, 0.5, 400.0);
  EXPECT_NEAR(m.value, 550.0, 1e-12);
  EXPECT_FALSE(m.degenerate);
}

TEST(SupplyCo2, DegenerateMixingUsesUnweightedMean) {
  Vector co2(2);
  co2 << 600.0, 1000.0;
  auto m = supply_co2(co2, Vector::Zero(2), 0.5, 400.0);
  EXPECT_TRUE(m.degenerate);
  EXPECT_NEAR(m.value, 0.5 * 400.0 + 0.5 * 800.0, 1e-12);
}

TEST(SupplyCo2, ConvexCombinationProperty) {
  std::mt19937_64 rng(42);
  for (int trial = 0; trial < 2000; ++trial) {
    const int n = 1 + static_cast<int>(rng() % 6);
    Vector co2(n), flows(n);
    for (int i = 0; i < n; ++i) {
      co2(i) = uniform(rng, 350.0, 1500.0);
      flows(i) = uniform(rng, 0.0, 0.5);
    }
    flows(0) += 1e-3;
    const double co = uniform(rng, 350.0, 500.0);
    const double c = supply_co2(co2, flows, uniform(rng, 0.0, 1.0), co).value;
    EXPECT_GE(c, std::min(co, co2.minCoeff()) - 1e-9);
    EXPECT_LE(c, std::max(co, co2.maxCoeff()) + 1e-9);
  }
}

TEST(Co2Step, Examples) {
  Building b = isolated_building();
  auto c = co2_step(Vector::Constant(1, 600.0), Vector::Constant(1, 0.3), 450.0, Vector::Zero(1), b.zones,
                    b.horizon, 40.0);
  EXPECT_NEAR(c(0), 519.0, 1e-9);
  c = co2_step(Vector::Constant(1, 600.0), Vector::Zero(1), 450.0, Vector::Constant(1, 20.0), b.zones, b.horizon,
               40.0);
  EXPECT_NEAR(c(0), 1000.0, 1e-9);
  c = co2_step(Vector::Constant(1, 640.0), Vector::Constant(1, 0.4), 640.0, Vector::Zero(1), b.zones, b.horizon,
               40.0);
  EXPECT_DOUBLE_EQ(c(0), 640.0);
  EXPECT_DOUBLE_EQ(co2_ppm_per_gram(1000.0), 1.0);
}

TEST(Co2Step, EulerGuard) {
  Building b = isolated_building();
  b.zones[0].air_mass = 500.0;
  EXPECT_THROW(b.validate(), StabilityError);
  EXPECT_THROW(co2_step(Vector::Constant(1, 600.0), Vector::Constant(1, 0.4), 450.0, Vector::Zero(1), b.zones,
                        b.horizon, 40.0),
               StabilityError);
}

TEST(Co2Step, NeverBelowOutdoorFloor) {
  std::mt19937_64 rng(9);
  Building b = isolated_building(3, 3, 12);
  b.topology = BuildingTopology(3, {{0, 1, 14.0}, {1, 2, 14.0}});
  Scenario s = constant_scenario(b, 30.0, 0.0, 0.5);
  for (auto& v : s.outdoor_co2) v = uniform(rng, 380.0, 440.0);
  for (auto& z : s.occupancy)
    for (auto& v : z) v = static_cast<double>(rng() % 3);
  const double floor = *std::min_element(s.outdoor_co2.begin(), s.outdoor_co2.end());
  for (int trial = 0; trial < 200; ++trial) {
    PlantState st{Vector::Constant(3, 25.0), Vector::Constant(3, uniform(rng, 440.0, 900.0)), 0};
    for (int k = 0; k < 12; ++k) {
      Vector m(3);
      for (int i = 0; i < 3; ++i) m(i) = uniform(rng, 0.0, 0.5);
      st = plant_step(b, s, st, m, uniform(rng, 0.0, 0.9)).next;
      EXPECT_GE(st.co2.minCoeff(), floor - 1e-9);
    }
  }
}

TEST(Power, Examples) {
  AhuParams ahu;
  auto p = power(Vector::Constant(2, 0.5), Vector::Constant(2, 25.0), 1.0, 33.0, ahu);
  EXPECT_NEAR(p.cooling, 10.12, 1e-12);
  EXPECT_NEAR(p.fan, 0.08, 1e-12);
  p = power(Vector::Zero(2), Vector::Constant(2, 25.0), 0.5, 33.0, ahu);
  EXPECT_EQ(p.cooling, 0.0);
  EXPECT_EQ(p.fan, 0.0);
  p = power(Vector::Constant(2, 0.3), Vector::Constant(2, 25.0), 0.0, ahu.supply_temp, ahu);
  EXPECT_NEAR(p.cooling, 0.0, 1e-12);
}

TEST(Power, NegativeLoadClamped) {
  auto p = power(Vector::Constant(1, 0.3), Vector::Constant(1, 25.0), 0.0, 10.0, AhuParams{});
  EXPECT_EQ(p.cooling, 0.0);
  EXPECT_TRUE(p.cooling_clamped);
}

TEST(Power, FanStrictlyIncreasingInTotalFlow) {
  std::mt19937_64 rng(5);
  AhuParams ahu;
  for (int trial = 0; trial < 1000; ++trial) {
    Vector a(3);
    for (int i = 0; i < 3; ++i) a(i) = uniform(rng, 0.0, 0.5);
    Vector b = a;
    b(static_cast<Eigen::Index>(rng() % 3)) += uniform(rng, 1e-4, 0.2);
    EXPECT_LT(power(a, Vector::Constant(3, 25.0), 0.5, 30.0, ahu).fan,
              power(b, Vector::Constant(3, 25.0), 0.5, 30.0, ahu).fan);
  }
}

TEST(Cost, Examples) {
  std::vector<double> pc{10.0}, pf{0.2}, price{0.2};
  EXPECT_NEAR(energy_cost(pc, pf, price, 0.5), 1.02, 1e-12);
  std::vector<double> zero{0.0};
  EXPECT_EQ(energy_cost(pc, pf, zero, 0.5), 0.0);
  std::vector<double> c3{3.0, 4.0, 5.0}, f3{0.1, 0.2, 0.3}, p3{0.12, 0.2, 0.2}, p6{0.24, 0.4, 0.4};
  EXPECT_NEAR(energy_cost(c3, f3, p6, 0.5), 2.0 * energy_cost(c3, f3, p3, 0.5), 1e-12);
  EXPECT_THROW(energy_cost(c3, f3, price, 0.5), InputError);
}

TEST(Simulate, ZeroLengthPlan) {
  Building b = isolated_building();
  Scenario s = constant_scenario(b, 32.0, 2.0, 0.4);
  auto r = simulate(b, s, constant_plan(b, 0, 0.2, 0.5), s.initial_state());
  EXPECT_EQ(r.steps(), 0);
  EXPECT_EQ(r.total_cost, 0.0);
  EXPECT_EQ(r.temps.size(), 1u);
}

TEST(Simulate, OneStepMatchesComponents) {
  Building b = isolated_building(2);
  b.topology = BuildingTopology(2, {{0, 1, 14.0}});
  Scenario s = constant_scenario(b, 32.0, 4.0, 0.6);
  s.initial_co2 << 650.0, 700.0;
  s.initial_temps << 27.0, 26.0;
  ControlPlan p = constant_plan(b, 1, 0.25, 0.6);
  p.flows(1, 0) = 0.35;
  auto r = simulate(b, s, p, s.initial_state());
  auto tc = thermal_coeffs(b, s, {0, 1});
  Vector t = thermal_step(s.initial_temps, p.step_flows(0), tc, 0);
  double cz = supply_co2(s.initial_co2, p.step_flows(0), 0.6, 400.0).value;
  Vector c = co2_step(s.initial_co2, p.step_flows(0), cz, Vector::Constant(2, 4.0), b.zones, b.horizon, 40.0);
  EXPECT_EQ(r.temps[1], t);
  EXPECT_EQ(r.co2[1], c);
  auto pw = power(p.step_flows(0), s.initial_temps, 0.6, 32.0, b.ahu);
  EXPECT_EQ(r.cooling_power[0], pw.cooling);
  EXPECT_EQ(r.fan_power[0], pw.fan);
}

TEST(Simulate, DeterministicAndCostRecomputable) {
  Case c = benchmark5();
  const int steps = c.building.horizon.day_steps;
  ControlPlan p = constant_plan(c.building, steps, 0.3, 0.7);
  auto r1 = simulate(c.building, c.scenario, p, c.scenario.initial_state());
  auto r2 = simulate(c.building, c.scenario, p, c.scenario.initial_state());
  ASSERT_EQ(r1.temps.size(), r2.temps.size());
  for (std::size_t k = 0; k < r1.temps.size(); ++k) {
    EXPECT_EQ(r1.temps[k], r2.temps[k]);
    EXPECT_EQ(r1.co2[k], r2.co2[k]);
  }
  EXPECT_EQ(r1.total_cost, r2.total_cost);
  EXPECT_EQ(r1.total_cost, energy_cost(r1));
  EXPECT_EQ(r1.total_cost, energy_cost(r1.cooling_power, r1.fan_power, r1.price, r1.step_hours));
}

TEST(Rollout, MatchesSimulate) {
  Case c = benchmark5();
  ControlPlan p = constant_plan(c.building, 10, 0.35, 0.5);
  PlantState st = c.scenario.initial_state();
  st.time_index = 16;
  auto ro = rollout(c.building, c.scenario, st, p);
  auto sim = simulate(c.building, c.scenario, p, st);
  for (int k = 0; k <= 10; ++k) {
    EXPECT_LT((ro.temps.col(k) - sim.temps[static_cast<std::size_t>(k)]).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_LT((ro.co2.col(k) - sim.co2[static_cast<std::size_t>(k)]).cwiseAbs().maxCoeff(), 1e-9);
  }
  EXPECT_NEAR(ro.total_cost, sim.total_cost, 1e-12);
}

TEST(CheckComfort, Examples) {
  Building b = isolated_building();
  RunReport r = start_report("t", {Vector::Constant(1, 25.0), Vector::Constant(1, 700.0), 0}, 0.5);
  auto s = check_comfort(r, b.zones);
  EXPECT_TRUE(s.satisfied());
  EXPECT_EQ(s.max_temp_violation, 0.0);

  r.co2[0](0) = 810.0;
  s = check_comfort(r, b.zones);
  EXPECT_NEAR(s.max_co2_violation, 10.0, 1e-12);
  EXPECT_FALSE(s.co2_satisfied);

  r.co2[0](0) = 800.0;
  r.temps[0](0) = 26.0;
  s = check_comfort(r, b.zones);
  EXPECT_TRUE(s.satisfied());
  r.temps[0](0) = 24.0;
  EXPECT_TRUE(check_comfort(r, b.zones).satisfied());
}

TEST(CheckComfort, SkipsTransientForTemperatureOnly) {
  Building b = isolated_building();
  RunReport r = start_report("t", {Vector::Constant(1, 30.0), Vector::Constant(1, 850.0), 0}, 0.5);
  auto s = check_comfort(r, b.zones, 0.0, 1);
  EXPECT_TRUE(s.temp_satisfied);
  EXPECT_FALSE(s.co2_satisfied);
}

TEST(Validation, TopologyAndSeries) {
  EXPECT_THROW(BuildingTopology(2, {{0, 0, 14.0}}), InputError);
  EXPECT_THROW(BuildingTopology(2, {{0, 3, 14.0}}), InputError);
  Building b = isolated_building();
  Scenario s = constant_scenario(b, 30.0, 1.0, 0.3);
  s.occupancy[0][2] = 1.5;
  EXPECT_THROW(s.validate(b), InputError);
  s = constant_scenario(b, 30.0, 1.0, 0.3);
  s.price.pop_back();
  EXPECT_THROW(s.validate(b), InputError);
  b.ahu.dr_min = 0.95;
  EXPECT_THROW(b.validate(), ParameterError);
}

TEST(ControlPlan, CheckReportsBoundViolations) {
  Building b = isolated_building(2);
  ControlPlan p = constant_plan(b, 2, 0.3, 0.5);
  EXPECT_TRUE(p.check(b).empty());
  p.flows(0, 1) = 0.6;
  EXPECT_FALSE(p.check(b).empty());
  p = constant_plan(b, 2, 0.3, 0.95);
  EXPECT_FALSE(p.check(b).empty());
}
