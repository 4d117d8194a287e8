#pragma once

// Comparison controllers (fixed ventilation, DCV I / II on ULC flows) and a
// brute-force grid oracle for tiny instances.

#include "hvac/model.hpp"
#include "hvac/tldm.hpp"
#include "hvac/ulc.hpp"

#include <optional>

namespace hvac {

enum class DcvVariant { I, II };

struct DcvConfig {
  double per_person_rate = 21.0;  // L/s per person
  double per_area_rate = 0.0;     // L/s per m^2
  DcvVariant variant = DcvVariant::I;
  bool resolve = true;            // re-solve the ULC once at the amended profile

  static DcvConfig variant_one(double rp = 21.0) { return {rp, 0.0, DcvVariant::I, true}; }
  static DcvConfig variant_two(double rp = 16.0, double ra = 0.04) { return {rp, ra, DcvVariant::II, true}; }
  void validate() const;
};

struct DcvVentilation {
  Vector fresh_flows;  // kg/s per zone
  double total_fresh = 0.0;
  double z_max_ratio = 0.0;
  double x_ratio = 0.0;
  double y_corrected = 0.0;
  double dr = 0.0;
  bool over_demand = false;       // some zone needs more fresh air than its supply flow
  bool under_ventilated = false;  // fresh demand in a zone with zero flow
};

/// N R_p + A R_a per zone, converted from L/s to kg/s with the air density.
Vector dcv_fresh_air(const Vector& occupancy, std::span<const ZoneParams> zones, const DcvConfig& config,
                     double air_density);

/// Multi-zone correction Y = X / (1 + X - Z), d = 1 - Y, clamped to the AHU range.
DcvVentilation dcv_ventilation_rate(const Vector& fresh, const Vector& flows, const AhuParams& ahu);

struct BaselineOptions {
  UlcOptions ulc;
  MpcOptions mpc;
};

EpochResult fixed_vent_epoch(const Building& building, const Scenario& scenario, const PlantState& state,
                             const UlcOptions& options);
EpochResult dcv_epoch(const Building& building, const Scenario& scenario, const PlantState& state,
                      const DcvConfig& config, const UlcOptions& options);

RunReport run_fixed_vent(const Building& building, const Scenario& scenario, const BaselineOptions& options = {});
RunReport run_dcv(const Building& building, const Scenario& scenario, const DcvConfig& config,
                  const BaselineOptions& options = {});

struct CalibrationResult {
  DcvConfig config;
  double max_co2 = 0.0;
  double cost = 0.0;
  int evaluations = 0;
  bool converged = false;  // max CO2 landed inside the target band
};

/// Bisection on R_p (R_a held fixed) until the run's max CO2 lies in
/// [co2_max - band, co2_max] for the strictest zone cap.
CalibrationResult calibrate_dcv(const Building& building, const Scenario& scenario, DcvConfig config,
                                const BaselineOptions& options = {}, double band = 25.0, double rp_lo = 0.0,
                                double rp_hi = 60.0, int max_evaluations = 30);

struct OracleOptions {
  int flow_levels = 21;
  int dr_levels = 11;
  double max_combinations = 1e8;
  double temp_tolerance = 0.0;
};

struct OracleResult {
  bool feasible = false;
  ControlPlan plan;
  double cost = 0.0;
  double combinations = 0.0;
  long long evaluated = 0;  // nodes expanded
};

/// Exhaustive search over the flow x ventilation grid on the window at
/// state.time_index with the exact dynamics; comfort, flow and capacity limits are hard.
OracleResult brute_force_oracle(const Building& building, const Scenario& scenario, const PlantState& state,
                                const OracleOptions& options = {});

}  // namespace hvac
