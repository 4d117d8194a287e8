#pragma once

// Small builders shared by the test files.

#include "hvac/model.hpp"

#include <random>
#include <vector>

namespace hvac::test {

inline Building isolated_building(std::size_t zones = 1, int horizon = 3, int day = 6) {
  Building b;
  b.horizon.horizon_steps = horizon;
  b.horizon.day_steps = day;
  b.zones.assign(zones, ZoneParams{});
  b.topology = BuildingTopology(zones, {});
  b.ahu.total_flow_max = 0.5 * static_cast<double>(zones);
  return b;
}

inline Scenario constant_scenario(const Building& b, double t_out, double occupants, double gain,
                                  double price = 0.2, double c_out = 400.0) {
  const std::size_t len = static_cast<std::size_t>(b.horizon.day_steps + b.horizon.horizon_steps);
  const std::size_t n = b.zone_count();
  Scenario s;
  s.outdoor_temp.assign(len, t_out);
  s.outdoor_co2.assign(len, c_out);
  s.price.assign(len, price);
  s.occupancy.assign(n, std::vector<double>(len, occupants));
  s.internal_gain.assign(n, std::vector<double>(len, gain));
  s.initial_temps = Vector::Constant(static_cast<Eigen::Index>(n), 25.0);
  s.initial_co2 = Vector::Constant(static_cast<Eigen::Index>(n), c_out);
  return s;
}

inline ControlPlan constant_plan(const Building& b, int steps, double flow, double dr) {
  ControlPlan p;
  p.flows = Matrix::Constant(static_cast<Eigen::Index>(b.zone_count()), steps, flow);
  p.vent_fraction = Vector::Constant(steps, dr);
  return p;
}

inline double uniform(std::mt19937_64& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

}  // namespace hvac::test
