#pragma once

// Upper-level control: zone flows that keep temperatures in band at minimum
// energy cost for a fixed ventilation profile. Each zone agent carries its
// own temperatures, flows, the relaxed product W = m (T - Tc) and local copies
// of its neighbours' temperatures. One capacity agent per step holds copies of
// all zone flows, enforces the AHU limit and carries the fan cost, so every
// coupling row links exactly two agents.

#include "hvac/adal.hpp"
#include "hvac/mccormick.hpp"
#include "hvac/model.hpp"

#include <memory>
#include <vector>

namespace hvac {

struct UlcOptions {
  AdalConfig adal = default_adal();
  double transient_margin = 0.05;  // degC added to the fastest reachable trajectory
  double repair_tolerance = 0.01;  // degC exceedance that triggers repair
  double repair_margin = 0.02;     // degC kept inside the band by the repair QP
  double tie_break = 1e-6;         // weight on sum of squared flows
  double capacity_backoff = 2e-3;  // kg/s held back from the AHU limit
  double theta_scale = 10.0;       // K, scales the relaxed product
  bool repair = true;
  bool warm_start = true;

  static AdalConfig default_adal();
};

/// Per-zone temperature bounds for samples 1..H after the transient relaxation.
struct UlcBounds {
  Matrix temp_lo;  // zones x H
  Matrix temp_hi;  // zones x H
  Matrix fastest;  // exact rollout under maximum admissible flow
};

struct UlcProblem {
  StepRange window;
  Vector dr;
  PlantState init;
  ThermalCoeffs coeffs;
  UlcBounds bounds;
  std::vector<double> price;
  std::vector<double> outdoor_temp;
  double flow_scale = 0.5;
  double capacity = 2.0;  // AHU limit after backoff

  int steps() const { return window.length; }
};

struct UlcResult {
  Matrix flows;             // zones x H, kg/s
  Matrix predicted_temps;   // zones x (H + 1), relaxed model
  Matrix recovered_temps;   // zones x (H + 1), exact rollout under flows
  double objective = 0.0;   // relaxed model cost, $
  double exact_cost = 0.0;  // cost of the exact rollout, $
  int iterations = 0;
  double residual = 0.0;
  bool converged = false;
  bool repaired = false;
  double temp_violation = 0.0;  // max exceedance of the (relaxed) bounds in the recovered rollout
};

UlcBounds ulc_bounds(const Building& building, const Scenario& scenario, const PlantState& state,
                     StepRange window, const UlcOptions& options);

UlcProblem build_ulc(const Building& building, const Scenario& scenario, const PlantState& state,
                     const Vector& dr, const UlcOptions& options = {});

/// ADAL layout of a ULC problem: agents 0..I-1 are zones, I..I+H-1 the per-step capacity agents.
AdalProblem ulc_agents(const Building& building, const UlcProblem& problem, const UlcOptions& options);

/// Keeps one coordinator across calls on the same epoch so that re-solves at
/// a different ventilation profile only change linear terms.
class UlcSolver {
 public:
  UlcSolver(const Building& building, const Scenario& scenario, const PlantState& state, StepRange window,
            UlcOptions options = {});
  UlcResult solve(const Vector& dr);
  const UlcProblem& problem() const { return problem_; }

 private:
  const Building& building_;
  const Scenario& scenario_;
  UlcOptions options_;
  UlcProblem problem_;
  std::unique_ptr<AdalSolver> adal_;
  std::vector<Vector> last_x_;
  Vector last_alpha_;
};

UlcResult solve_ulc(const Building& building, const Scenario& scenario, const PlantState& state,
                    const Vector& dr, const UlcOptions& options = {});

/// Linear-in-(m, W) cost coefficients of one zone for a ventilation profile.
Vector ulc_zone_linear(const Building& building, const UlcProblem& problem, std::size_t zone,
                       const UlcOptions& options);

}  // namespace hvac
