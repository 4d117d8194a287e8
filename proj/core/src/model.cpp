#include "hvac/model.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace hvac {

namespace {

bool finite(double v) { return std::isfinite(v); }

[[noreturn]] void param_error(const std::string& what) { throw ParameterError(what); }

std::string zone_label(std::size_t i) { return "zone " + std::to_string(i); }

}  // namespace

void HorizonConfig::validate() const {
  if (!(step_seconds > 0.0) || !finite(step_seconds)) param_error("step_seconds must be > 0");
  if (horizon_steps < 1) param_error("horizon_steps must be >= 1");
  if (day_steps < horizon_steps) param_error("day_steps must be >= horizon_steps");
}

void ZoneParams::validate(const HorizonConfig& horizon, std::size_t index) const {
  const std::string z = zone_label(index);
  if (!(heat_capacity > 0.0)) param_error(z + ": heat_capacity must be > 0");
  if (!(air_mass > 0.0)) param_error(z + ": air_mass must be > 0");
  if (!(area > 0.0)) param_error(z + ": area must be > 0");
  if (!(resistance_to_outside > 0.0)) param_error(z + ": resistance_to_outside must be > 0");
  if (!(flow_min >= 0.0)) param_error(z + ": flow_min must be >= 0");
  if (!(flow_min < flow_max)) param_error(z + ": flow_min must be < flow_max");
  if (!(temp_min < temp_max)) param_error(z + ": temp_min must be < temp_max");
  if (!(co2_max > 0.0)) param_error(z + ": co2_max must be > 0");
  if (air_mass < flow_max * horizon.step_seconds) {
    throw StabilityError(index, z + ": air_mass < flow_max * step_seconds (explicit CO2 update unstable)");
  }
}

BuildingTopology::BuildingTopology(std::size_t zone_count, std::vector<Adjacency> edges)
    : zone_count_(zone_count), edges_(std::move(edges)), neighbors_(zone_count) {
  for (const auto& e : edges_) {
    if (e.a >= zone_count_ || e.b >= zone_count_) {
      throw InputError("adjacency references zone index out of range");
    }
    if (e.a == e.b) throw InputError("adjacency self-loop on " + zone_label(e.a));
    neighbors_[e.a].emplace_back(e.b, e.resistance);
    neighbors_[e.b].emplace_back(e.a, e.resistance);
  }
  for (auto& n : neighbors_) {
    std::sort(n.begin(), n.end());
    for (std::size_t k = 1; k < n.size(); ++k) {
      if (n[k].first == n[k - 1].first) throw InputError("duplicate adjacency entry");
    }
  }
}

void BuildingTopology::validate() const {
  for (const auto& e : edges_) {
    if (!(e.resistance > 0.0)) param_error("adjacency resistance must be > 0");
  }
}

void AhuParams::validate() const {
  if (!(dr_min >= 0.0 && dr_min < dr_max && dr_max <= 1.0)) {
    param_error("ventilation fraction bounds must satisfy 0 <= dr_min < dr_max <= 1");
  }
  if (!(dr_step > 0.0)) param_error("dr_step must be > 0");
  if (!(total_flow_max > 0.0)) param_error("total_flow_max must be > 0");
  if (!(specific_heat > 0.0)) param_error("specific_heat must be > 0");
  if (!(cop_inverse > 0.0)) param_error("cop_inverse must be > 0");
  if (!(fan_coeff >= 0.0)) param_error("fan_coeff must be >= 0");
  if (!(air_density > 0.0)) param_error("air_density must be > 0");
}

void Building::validate() const {
  horizon.validate();
  if (zones.empty()) throw InputError("building has no zones");
  if (topology.zone_count() != zones.size()) throw InputError("topology zone count mismatch");
  for (std::size_t i = 0; i < zones.size(); ++i) zones[i].validate(horizon, i);
  topology.validate();
  ahu.validate();
  for (std::size_t i = 0; i < zones.size(); ++i) {
    if (!(ahu.supply_temp < zones[i].temp_min)) {
      param_error("supply_temp must be below temp_min of " + zone_label(i));
    }
  }
}

void PlantState::validate(std::size_t zones) const {
  if (static_cast<std::size_t>(temps.size()) != zones || static_cast<std::size_t>(co2.size()) != zones) {
    throw InputError("plant state size does not match zone count");
  }
  if (!temps.allFinite() || !co2.allFinite()) throw InputError("plant state has non-finite values");
  if ((co2.array() < 0.0).any()) throw InputError("plant state CO2 must be >= 0");
}

void Scenario::validate(const Building& building) const {
  const std::size_t need =
      static_cast<std::size_t>(building.horizon.day_steps + building.horizon.horizon_steps);
  const std::size_t n = building.zone_count();
  auto check_len = [&](std::size_t len, const std::string& name) {
    if (len < need) {
      throw InputError(name + " series has length " + std::to_string(len) + ", need >= " +
                       std::to_string(need));
    }
  };
  check_len(outdoor_temp.size(), "outdoor_temp");
  check_len(outdoor_co2.size(), "outdoor_co2");
  check_len(price.size(), "price");
  if (occupancy.size() != n) throw InputError("occupancy must have one series per zone");
  if (internal_gain.size() != n) throw InputError("internal_gain must have one series per zone");
  for (std::size_t i = 0; i < n; ++i) {
    check_len(occupancy[i].size(), "occupancy[" + std::to_string(i) + "]");
    check_len(internal_gain[i].size(), "internal_gain[" + std::to_string(i) + "]");
    for (double v : occupancy[i]) {
      if (!(v >= 0.0) || std::floor(v) != v) throw InputError("occupancy must be non-negative integers");
    }
    for (double v : internal_gain[i]) {
      if (!finite(v)) throw InputError("internal_gain must be finite");
    }
  }
  for (double v : outdoor_temp) {
    if (!finite(v)) throw InputError("outdoor_temp must be finite");
  }
  for (double v : outdoor_co2) {
    if (!(v > 0.0) || !finite(v)) throw InputError("outdoor_co2 must be > 0");
  }
  for (double v : price) {
    if (!(v >= 0.0) || !finite(v)) throw InputError("price must be >= 0");
  }
  if (!(co2_gen_rate >= 0.0)) throw InputError("co2_gen_rate must be >= 0");
  initial_state().validate(n);
}

std::vector<std::string> ControlPlan::check(const Building& building, double tol) const {
  std::vector<std::string> out;
  const auto n = static_cast<Eigen::Index>(building.zone_count());
  if (flows.rows() != n || flows.cols() != vent_fraction.size()) {
    out.emplace_back("plan dimensions do not match zone count / steps");
    return out;
  }
  for (Eigen::Index k = 0; k < flows.cols(); ++k) {
    for (Eigen::Index i = 0; i < n; ++i) {
      const auto& z = building.zones[static_cast<std::size_t>(i)];
      const double m = flows(i, k);
      if (m < z.flow_min - tol || m > z.flow_max + tol) {
        std::ostringstream s;
        s << "flow of " << zone_label(static_cast<std::size_t>(i)) << " at step " << k << " = " << m
          << " outside [" << z.flow_min << ", " << z.flow_max << "]";
        out.push_back(s.str());
      }
    }
    if (flows.col(k).sum() > building.ahu.total_flow_max + tol) {
      out.push_back("total flow at step " + std::to_string(k) + " exceeds AHU capacity");
    }
    const double d = vent_fraction(k);
    if (d < building.ahu.dr_min - tol || d > building.ahu.dr_max + tol) {
      out.push_back("ventilation fraction at step " + std::to_string(k) + " out of range");
    }
  }
  return out;
}

ThermalCoeffs thermal_coeffs(const Building& building, const Scenario& scenario, StepRange window) {
  if (window.begin < 0 || window.length < 0 ||
      static_cast<std::size_t>(window.begin + window.length) > scenario.length()) {
    throw InputError("thermal window outside scenario length");
  }
  const std::size_t n = building.zone_count();
  const double dt = building.horizon.step_seconds;
  ThermalCoeffs c;
  c.a_self.resize(static_cast<Eigen::Index>(n));
  c.c_flow.resize(static_cast<Eigen::Index>(n));
  c.a_neighbor.resize(n);
  c.d_drive.resize(static_cast<Eigen::Index>(n), window.length);
  c.supply_temp = building.ahu.supply_temp;
  for (std::size_t i = 0; i < n; ++i) {
    const auto& z = building.zones[i];
    if (!(z.heat_capacity > 0.0)) param_error(zone_label(i) + ": heat_capacity must be > 0");
    if (!(z.resistance_to_outside > 0.0)) param_error(zone_label(i) + ": resistance_to_outside must be > 0");
    const auto ii = static_cast<Eigen::Index>(i);
    double leak = dt / (z.heat_capacity * z.resistance_to_outside);
    for (const auto& [j, r] : building.topology.neighbors(i)) {
      if (!(r > 0.0)) param_error("adjacency resistance must be > 0");
      const double a = dt / (z.heat_capacity * r);
      c.a_neighbor[i].emplace_back(j, a);
      leak += a;
    }
    c.a_self(ii) = 1.0 - leak;
    c.c_flow(ii) = -dt * building.ahu.specific_heat / z.heat_capacity;
    for (int k = 0; k < window.length; ++k) {
      const auto t = static_cast<std::size_t>(window.begin + k);
      c.d_drive(ii, k) = dt * scenario.outdoor_temp[t] / (z.heat_capacity * z.resistance_to_outside) +
                         dt * scenario.internal_gain[i][t] / z.heat_capacity;
    }
  }
  return c;
}

Vector thermal_step(const Vector& temps, const Vector& flows, const ThermalCoeffs& coeffs, int k) {
  const Eigen::Index n = temps.size();
  Vector next(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    double v = coeffs.a_self(i) * temps(i);
    for (const auto& [j, a] : coeffs.a_neighbor[static_cast<std::size_t>(i)]) {
      v += a * temps(static_cast<Eigen::Index>(j));
    }
    v += coeffs.c_flow(i) * flows(i) * (temps(i) - coeffs.supply_temp);
    v += coeffs.d_drive(i, k);
    next(i) = v;
  }
  return next;
}

SupplyMix supply_co2(const Vector& co2, const Vector& flows, double dr, double c_out) {
  const double total = flows.sum();
  SupplyMix mix;
  double c_m;
  if (total > 0.0) {
    c_m = flows.dot(co2) / total;
  } else {
    c_m = co2.size() > 0 ? co2.mean() : c_out;
    mix.degenerate = true;
  }
  mix.value = (1.0 - dr) * c_out + dr * c_m;
  return mix;
}

double co2_ppm_per_gram(double air_mass) { return 1e3 / air_mass; }

Vector co2_step(const Vector& co2, const Vector& flows, double c_supply, const Vector& occupancy,
                std::span<const ZoneParams> zones, const HorizonConfig& horizon, double co2_gen_rate) {
  const double dt = horizon.step_seconds;
  const double gen_grams_per_step = co2_gen_rate * horizon.step_hours();
  Vector next(co2.size());
  for (Eigen::Index i = 0; i < co2.size(); ++i) {
    const auto& z = zones[static_cast<std::size_t>(i)];
    if (z.air_mass < flows(i) * dt) {
      throw StabilityError(static_cast<std::size_t>(i),
                           zone_label(static_cast<std::size_t>(i)) + ": air_mass < flow * step_seconds");
    }
    const double source = occupancy(i) * gen_grams_per_step * co2_ppm_per_gram(z.air_mass);
    next(i) = co2(i) + source + flows(i) * (c_supply - co2(i)) * dt / z.air_mass;
  }
  return next;
}

PowerDraw power(const Vector& flows, const Vector& temps, double dr, double t_out, const AhuParams& ahu) {
  PowerDraw p;
  const double total = flows.sum();
  const double k = ahu.specific_heat * ahu.cop_inverse;
  double recirc = 0.0;
  for (Eigen::Index i = 0; i < flows.size(); ++i) recirc += flows(i) * (temps(i) - ahu.supply_temp);
  const double cooling = k * (1.0 - dr) * total * (t_out - ahu.supply_temp) + k * dr * recirc;
  if (cooling < 0.0) {
    p.cooling = 0.0;
    p.cooling_clamped = true;
  } else {
    p.cooling = cooling;
  }
  p.fan = ahu.fan_coeff * total * total;
  return p;
}

double energy_cost(std::span<const double> cooling, std::span<const double> fan,
                   std::span<const double> price, double step_hours) {
  if (cooling.size() != fan.size() || cooling.size() != price.size()) {
    throw InputError("power and price series lengths differ");
  }
  double j = 0.0;
  for (std::size_t k = 0; k < cooling.size(); ++k) j += price[k] * (cooling[k] + fan[k]) * step_hours;
  return j;
}

double energy_cost(const RunReport& report) {
  return energy_cost(report.cooling_power, report.fan_power, report.price, report.step_hours);
}

PlantStep plant_step(const Building& building, const Scenario& scenario, const PlantState& state,
                     const Vector& flows, double dr) {
  const int t = state.time_index;
  if (t < 0 || static_cast<std::size_t>(t) >= scenario.length()) {
    throw InputError("plant step beyond scenario length");
  }
  const auto ts = static_cast<std::size_t>(t);
  const ThermalCoeffs tc = thermal_coeffs(building, scenario, {t, 1});
  PlantStep out;
  out.supply = supply_co2(state.co2, flows, dr, scenario.outdoor_co2[ts]);
  Vector occ(state.co2.size());
  for (Eigen::Index i = 0; i < occ.size(); ++i) occ(i) = scenario.occupancy[static_cast<std::size_t>(i)][ts];
  out.next.temps = thermal_step(state.temps, flows, tc, 0);
  out.next.co2 = co2_step(state.co2, flows, out.supply.value, occ, building.zones, building.horizon,
                          scenario.co2_gen_rate);
  out.next.time_index = t + 1;
  out.power = power(flows, state.temps, dr, scenario.outdoor_temp[ts], building.ahu);
  out.price = scenario.price[ts];
  out.cost = out.price * out.power.total() * building.horizon.step_hours();
  return out;
}

RunReport start_report(std::string method, const PlantState& init, double step_hours) {
  RunReport r;
  r.method = std::move(method);
  r.start_index = init.time_index;
  r.step_hours = step_hours;
  r.temps.push_back(init.temps);
  r.co2.push_back(init.co2);
  return r;
}

void append_step(RunReport& report, const Vector& flows, double dr, const PlantStep& step) {
  report.flows.push_back(flows);
  report.dr.push_back(dr);
  report.cooling_power.push_back(step.power.cooling);
  report.fan_power.push_back(step.power.fan);
  report.price.push_back(step.price);
  report.step_cost.push_back(step.cost);
  report.temps.push_back(step.next.temps);
  report.co2.push_back(step.next.co2);
  if (step.supply.degenerate) ++report.degenerate_mixing_steps;
  if (step.power.cooling_clamped) ++report.clamped_cooling_steps;
  report.total_cost = energy_cost(report);
}

RunReport simulate(const Building& building, const Scenario& scenario, const ControlPlan& plan,
                   const PlantState& init) {
  RunReport report = start_report("simulate", init, building.horizon.step_hours());
  PlantState state = init;
  for (int k = 0; k < plan.steps(); ++k) {
    const Vector m = plan.step_flows(k);
    const PlantStep step = plant_step(building, scenario, state, m, plan.vent_fraction(k));
    append_step(report, m, plan.vent_fraction(k), step);
    state = step.next;
  }
  return report;
}

Rollout rollout(const Building& building, const Scenario& scenario, const PlantState& init,
                const ControlPlan& plan) {
  const auto n = static_cast<Eigen::Index>(building.zone_count());
  const int steps = plan.steps();
  Rollout r;
  r.temps.resize(n, steps + 1);
  r.co2.resize(n, steps + 1);
  r.supply.resize(steps);
  r.cost.resize(steps);
  r.temps.col(0) = init.temps;
  r.co2.col(0) = init.co2;
  PlantState state = init;
  for (int k = 0; k < steps; ++k) {
    const PlantStep step = plant_step(building, scenario, state, plan.flows.col(k), plan.vent_fraction(k));
    r.temps.col(k + 1) = step.next.temps;
    r.co2.col(k + 1) = step.next.co2;
    r.supply(k) = step.supply.value;
    r.cost(k) = step.cost;
    state = step.next;
  }
  r.total_cost = steps ? r.cost.sum() : 0.0;
  return r;
}

ComfortSummary check_comfort(const RunReport& report, std::span<const ZoneParams> zones,
                             double tolerance, int skip_steps) {
  ComfortSummary s;
  s.zones.resize(zones.size());
  const double dt_h = report.step_hours;
  double temp_sum = 0.0;
  double co2_sum = 0.0;
  std::size_t temp_samples = 0;
  std::size_t co2_samples = 0;
  for (std::size_t k = 0; k < report.temps.size(); ++k) {
    for (std::size_t i = 0; i < zones.size(); ++i) {
      const auto ii = static_cast<Eigen::Index>(i);
      auto& zv = s.zones[i];
      const double c = report.co2[k](ii);
      s.max_co2 = std::max(s.max_co2, c);
      const double cv = std::max(0.0, c - zones[i].co2_max);
      zv.co2_above_max = std::max(zv.co2_above_max, cv);
      zv.co2_integral += cv * dt_h;
      co2_sum += cv;
      ++co2_samples;
      if (static_cast<int>(k) < skip_steps) continue;
      const double t = report.temps[k](ii);
      const double above = std::max(0.0, t - zones[i].temp_max);
      const double below = std::max(0.0, zones[i].temp_min - t);
      zv.temp_above_max = std::max(zv.temp_above_max, above);
      zv.temp_below_min = std::max(zv.temp_below_min, below);
      zv.temp_integral += (above + below) * dt_h;
      temp_sum += above + below;
      ++temp_samples;
    }
  }
  for (const auto& zv : s.zones) {
    s.max_temp_violation = std::max({s.max_temp_violation, zv.temp_above_max, zv.temp_below_min});
    s.max_co2_violation = std::max(s.max_co2_violation, zv.co2_above_max);
  }
  s.mean_temp_violation = temp_samples ? temp_sum / static_cast<double>(temp_samples) : 0.0;
  s.mean_co2_violation = co2_samples ? co2_sum / static_cast<double>(co2_samples) : 0.0;
  s.temp_satisfied = s.max_temp_violation <= tolerance;
  s.co2_satisfied = s.max_co2_violation <= tolerance;
  return s;
}

}  // namespace hvac
