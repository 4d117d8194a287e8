#pragma once

// Building parameters, exogenous data and the discrete-time thermal / CO2 /
// power / cost models shared by the plant simulator and every controller.
//
// Units: temperatures in degC, heat capacity in kJ/K, resistances in K/kW,
// mass flows in kg/s, air mass in kg, CO2 in ppm (by mass), power in kW,
// prices in $/kWh. Dynamics use the step length in seconds, costs in hours.

#include <Eigen/Dense>

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace hvac {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Malformed or inconsistent user input (files, series lengths, overrides).
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Physically invalid parameter (non-positive capacity, resistance, ...).
class ParameterError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Explicit-Euler CO2 update would overshoot the supply concentration.
class StabilityError : public std::runtime_error {
 public:
  StabilityError(std::size_t zone, const std::string& what)
      : std::runtime_error(what), zone_(zone) {}
  std::size_t zone() const noexcept { return zone_; }

 private:
  std::size_t zone_;
};

struct HorizonConfig {
  double step_seconds = 1800.0;
  int horizon_steps = 10;
  int day_steps = 48;

  double step_hours() const { return step_seconds / 3600.0; }
  void validate() const;
};

struct ZoneParams {
  double heat_capacity = 1.5e3;        // kJ/K
  double air_mass = 1000.0;            // kg
  double area = 100.0;                 // m^2
  double resistance_to_outside = 50.0; // K/kW
  double flow_min = 0.0;               // kg/s
  double flow_max = 0.5;               // kg/s
  double temp_min = 24.0;
  double temp_max = 26.0;
  double co2_max = 800.0;

  void validate(const HorizonConfig& horizon, std::size_t index) const;
};

struct Adjacency {
  std::size_t a = 0;
  std::size_t b = 0;
  double resistance = 14.0; // K/kW
};

/// Undirected zone graph. Edges are stored once; neighbors() expands both ways.
class BuildingTopology {
 public:
  BuildingTopology() = default;
  BuildingTopology(std::size_t zone_count, std::vector<Adjacency> edges);

  std::size_t zone_count() const { return zone_count_; }
  const std::vector<Adjacency>& edges() const { return edges_; }
  /// (neighbor index, coupling resistance) pairs, ascending by neighbor.
  const std::vector<std::pair<std::size_t, double>>& neighbors(std::size_t zone) const {
    return neighbors_.at(zone);
  }
  std::size_t degree(std::size_t zone) const { return neighbors_.at(zone).size(); }
  void validate() const;

 private:
  std::size_t zone_count_ = 0;
  std::vector<Adjacency> edges_;
  std::vector<std::vector<std::pair<std::size_t, double>>> neighbors_;
};

struct AhuParams {
  double supply_temp = 15.0;
  double fan_coeff = 0.08;     // kW/(kg/s)^2
  double cop_inverse = 1.0;
  double total_flow_max = 2.0; // kg/s
  double dr_min = 0.0;
  double dr_max = 0.9;
  double dr_step = 0.05;
  double specific_heat = 1.012; // kJ/(kg K)
  double air_density = 1.2;     // kg/m^3

  void validate() const;
};

struct Building {
  HorizonConfig horizon;
  std::vector<ZoneParams> zones;
  BuildingTopology topology;
  AhuParams ahu;

  std::size_t zone_count() const { return zones.size(); }
  void validate() const;
};

/// Zone temperatures and CO2 at one instant.
struct PlantState {
  Vector temps;
  Vector co2;
  int time_index = 0;

  void validate(std::size_t zones) const;
};

/// Exogenous series. Per-zone series are indexed [zone][t].
struct Scenario {
  std::vector<double> outdoor_temp;
  std::vector<double> outdoor_co2;
  std::vector<std::vector<double>> occupancy;
  std::vector<std::vector<double>> internal_gain; // kW
  std::vector<double> price;                      // $/kWh
  double co2_gen_rate = 40.0;                     // g/h per person
  Vector initial_temps;
  Vector initial_co2;

  std::size_t length() const { return outdoor_temp.size(); }
  PlantState initial_state() const { return {initial_temps, initial_co2, 0}; }
  void validate(const Building& building) const;
};

/// Contiguous step range [begin, begin + length) into the scenario.
struct StepRange {
  int begin = 0;
  int length = 0;
};

/// Per-zone mass flows (zones x steps) and per-step recirculation fraction.
struct ControlPlan {
  Matrix flows;
  Vector vent_fraction;

  int steps() const { return static_cast<int>(vent_fraction.size()); }
  Vector step_flows(int k) const { return flows.col(k); }
  /// Violations of actuator bounds and AHU capacity, empty when valid.
  std::vector<std::string> check(const Building& building, double tol = 1e-9) const;
};

struct ThermalCoeffs {
  Vector a_self;                                             // A_ii
  std::vector<std::vector<std::pair<std::size_t, double>>> a_neighbor; // A_ij
  Vector c_flow;                                             // C_ii, K per (kg/s)
  Matrix d_drive;                                            // D_i(k), zones x window
  double supply_temp = 15.0;
};

struct Co2Coeffs {
  Matrix e_supply; // E_i(k), zones x window
  Vector f_self;   // F_i, per (kg/s)
  Matrix g_occ;    // G_i(k), ppm per step
};

struct SupplyMix {
  double value = 0.0;
  bool degenerate = false; // all flows zero; return air taken as unweighted mean
};

struct PowerDraw {
  double cooling = 0.0;
  double fan = 0.0;
  bool cooling_clamped = false; // mixed air colder than supply setpoint

  double total() const { return cooling + fan; }
};

struct ZoneViolation {
  double temp_above_max = 0.0; // largest exceedance of T_max
  double temp_below_min = 0.0; // largest shortfall under T_min
  double temp_integral = 0.0;  // sum over samples of exceedance, K*h
  double co2_above_max = 0.0;
  double co2_integral = 0.0;   // ppm*h
};

struct ComfortSummary {
  std::vector<ZoneViolation> zones;
  double max_temp_violation = 0.0;
  double mean_temp_violation = 0.0;
  double max_co2_violation = 0.0;
  double mean_co2_violation = 0.0;
  double max_co2 = 0.0;
  bool temp_satisfied = true;
  bool co2_satisfied = true;

  bool satisfied() const { return temp_satisfied && co2_satisfied; }
};

/// Diagnostics for one MPC epoch.
struct EpochStats {
  int time_index = 0;
  int dr_iterations = 0;
  int ulc_iterations = 0;
  double ulc_residual = 0.0;
  bool ulc_converged = true;
  int llc_inner_iterations = 0;
  int llc_outer_iterations = 0;
  double llc_residual = 0.0;
  double llc_supply_delta = 0.0;
  bool llc_invoked = false;
  bool llc_converged = true;
  int adal_runs = 0;         // ADAL solves that ran to a verdict (not stopped by local infeasibility)
  int adal_unconverged = 0;  // of those, residual still above eps_in at max_inner
  int llc_runs = 0;          // completed LLC fixed-point loops
  int llc_c2_failures = 0;   // of those, supply estimate not settled within max_outer
  bool dr_floor_hit = false;
  bool fallback = false;
  double residual_violation = 0.0;
  double wall_ms = 0.0;
  std::string note;
};

struct RunReport {
  std::string method;
  int start_index = 0;
  std::vector<Vector> temps; // steps + 1 samples
  std::vector<Vector> co2;
  std::vector<Vector> flows; // steps samples
  std::vector<double> dr;
  std::vector<double> cooling_power;
  std::vector<double> fan_power;
  std::vector<double> price;
  std::vector<double> step_cost;
  double total_cost = 0.0;
  double step_hours = 0.5;
  int degenerate_mixing_steps = 0;
  int clamped_cooling_steps = 0;
  std::vector<EpochStats> solver_stats;

  int steps() const { return static_cast<int>(dr.size()); }
};

ThermalCoeffs thermal_coeffs(const Building& building, const Scenario& scenario, StepRange window);

/// One explicit step of the RC network, all zones updated from the same input.
Vector thermal_step(const Vector& temps, const Vector& flows, const ThermalCoeffs& coeffs, int k);

SupplyMix supply_co2(const Vector& co2, const Vector& flows, double dr, double c_out);

/// Grams of CO2 per kg of air scaled to ppm: grams / kg * 1e3.
double co2_ppm_per_gram(double air_mass);

/// Explicit Euler CO2 update. Throws StabilityError when air_mass < flow * dt.
Vector co2_step(const Vector& co2, const Vector& flows, double c_supply, const Vector& occupancy,
                std::span<const ZoneParams> zones, const HorizonConfig& horizon, double co2_gen_rate);

PowerDraw power(const Vector& flows, const Vector& temps, double dr, double t_out, const AhuParams& ahu);

/// J = sum_k c_k (P_c + P_f) dt_h. Throws InputError on length mismatch.
double energy_cost(std::span<const double> cooling, std::span<const double> fan,
                   std::span<const double> price, double step_hours);
double energy_cost(const RunReport& report);

struct PlantStep {
  PlantState next;
  PowerDraw power;
  SupplyMix supply;
  double price = 0.0;
  double cost = 0.0;
};

/// Exact coupled plant update for one step at state.time_index.
PlantStep plant_step(const Building& building, const Scenario& scenario, const PlantState& state,
                     const Vector& flows, double dr);

/// Appends one executed step to a report (state before the step must be the last sample).
void append_step(RunReport& report, const Vector& flows, double dr, const PlantStep& step);

/// Starts an empty report holding only the initial sample.
RunReport start_report(std::string method, const PlantState& init, double step_hours);

/// Rolls the exact dynamics for plan.steps() steps starting at init.time_index.
RunReport simulate(const Building& building, const Scenario& scenario, const ControlPlan& plan,
                   const PlantState& init);

/// Exact horizon prediction in matrix form: columns are time samples.
struct Rollout {
  Matrix temps;  // zones x (steps + 1)
  Matrix co2;    // zones x (steps + 1)
  Vector supply; // supply CO2 per step
  Vector cost;   // per step
  double total_cost = 0.0;
};

Rollout rollout(const Building& building, const Scenario& scenario, const PlantState& init,
                const ControlPlan& plan);

/// Bound exceedances of the report's state samples. Samples with index
/// < skip_steps are ignored for temperature (pre-cooling transient).
ComfortSummary check_comfort(const RunReport& report, std::span<const ZoneParams> zones,
                             double tolerance = 0.0, int skip_steps = 0);

/// Q_i = N_i * per_person + baseline.
struct GainModel {
  double per_person = 0.1; // kW
  double baseline = 0.2;   // kW
  double operator()(double occupants) const { return occupants * per_person + baseline; }
};

}  // namespace hvac
