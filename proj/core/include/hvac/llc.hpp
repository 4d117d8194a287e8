#pragma once

// Lower-level control: smallest flow increase over the ULC flows that keeps
// zone CO2 under its cap, for a given ventilation profile. The supply CO2 is
// fixed per outer iteration so zones decouple except for the AHU capacity,
// and the product m * C is relaxed with its McCormick envelope.

#include "hvac/adal.hpp"
#include "hvac/mccormick.hpp"
#include "hvac/model.hpp"

#include <vector>

namespace hvac {

struct LlcOptions {
  AdalConfig adal = default_adal();
  double co2_guard = 5.0;          // ppm below the cap that triggers the LLC
  double co2_floor_margin = 10.0;  // ppm under the lowest reachable CO2 for the envelope box
  double capacity_backoff = 1e-3;  // kg/s held back from the AHU limit
  double co2_scale = 100.0;        // ppm per internal unit
  bool soft_cap = false;           // allow penalised cap exceedance (fallback mode)
  double soft_penalty = 1e3;       // per internal CO2 unit

  static AdalConfig default_adal();
};

struct SupplyCo2Estimate {
  Vector c_z;  // per step
  int iteration = 0;
};

struct LlcTrigger {
  bool needed = false;
  Matrix predicted_co2;  // zones x (H + 1)
};

struct LlcResult {
  Matrix flows;     // zones x H, kg/s
  Matrix co2;       // exact rollout, zones x (H + 1)
  Matrix temps;     // exact rollout, zones x (H + 1)
  Matrix products;  // recovered m * C per step, zones x H
  Matrix relaxed_co2;
  SupplyCo2Estimate supply;
  double objective = 0.0;  // sum of squared flow increases, (kg/s)^2
  int inner_iterations = 0;       // summed over outer iterations
  int max_inner_iterations = 0;   // worst single ADAL run
  int outer_iterations = 0;
  int adal_runs = 0;
  int adal_unconverged = 0;
  double residual = 0.0;          // coupling residual of the last ADAL run
  double supply_delta = 0.0;      // last change of the supply estimate, ppm
  bool converged = false;         // every ADAL run converged and the supply estimate settled
  bool supply_settled = false;    // last supply change <= eps_out
  bool infeasible = false;        // some zone cannot meet its cap at this ventilation profile
  int infeasible_zone = -1;
  std::vector<double> residual_history;
};

/// Exact CO2 rollout under the ULC flows; true when any sample exceeds cap - guard.
LlcTrigger needs_llc(const Building& building, const Scenario& scenario, const PlantState& state,
                     const Matrix& flows_u, const Vector& dr, double guard = 5.0);

Co2Coeffs co2_coeffs(const Building& building, const Scenario& scenario, StepRange window,
                     const SupplyCo2Estimate& estimate);

/// Supply estimate from the zone flows and CO2 of an iterate: columns k = 0..H-1.
SupplyCo2Estimate update_supply_estimate(const Matrix& flows, const Matrix& co2, const Vector& dr,
                                         const std::vector<double>& outdoor, int iteration);

/// Zone agents 0..I-1 plus per-step capacity agents I..I+H-1 holding flow copies.
AdalProblem llc_agents(const Building& building, const Scenario& scenario, const PlantState& state,
                       const Matrix& flows_u, const Co2Coeffs& coeffs, const LlcOptions& options);

/// Exact coupled rollout of the LLC flows at profile dr, flows kept verbatim.
LlcResult recover_feasibility(const Building& building, const Scenario& scenario, const PlantState& state,
                              const Matrix& flows, const Vector& dr, LlcResult result);

LlcResult solve_llc(const Building& building, const Scenario& scenario, const PlantState& state,
                    const Matrix& flows_u, const Vector& dr, const LlcOptions& options = {});

/// Lowest CO2 the envelope box admits for a zone over the window.
double co2_floor(const Scenario& scenario, const PlantState& state, std::size_t zone, StepRange window,
                 double margin);

}  // namespace hvac
