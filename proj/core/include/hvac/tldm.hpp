#pragma once

// Two-level orchestration for one epoch (ULC, CO2 trigger, LLC, temperature
// check, ventilation decrement) and the receding-horizon loop over a day.

#include "hvac/llc.hpp"
#include "hvac/model.hpp"
#include "hvac/ulc.hpp"

#include <functional>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>

namespace hvac {

/// An epoch could not produce a plan (comfort unreachable, local infeasibility).
class EpochError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct TldmConfig {
  UlcOptions ulc;
  LlcOptions llc;
  std::optional<Vector> dr_init;  // defaults to dr_max at every step
  double dr_step = 0.05;
  int max_dr_iters = 40;
  double temp_tolerance = 0.05;
  double co2_guard = 5.0;
  bool warm_start = true;
  bool soft_fallback = true;  // soft-cap LLC when the cap is unreachable at the floor

  void validate(const Building& building) const;
};

struct EpochResult {
  ControlPlan plan;
  Vector executed_flows;
  double executed_dr = 0.0;
  int l_iterations = 0;
  bool llc_invoked = false;
  bool llc_infeasible = false;  // cap unreachable even at the floor
  bool dr_floor_hit = false;
  double residual_temp_violation = 0.0;  // degC below T_min - tol left in the plan
  double residual_co2_violation = 0.0;   // ppm above the cap left in the plan
  double predicted_cost = 0.0;
  EpochStats stats;
  std::vector<Vector> dr_history;  // profile per l iteration
};

/// One application of the two-level method on the window starting at state.time_index.
EpochResult tldm_epoch(const Building& building, const Scenario& scenario, const PlantState& state,
                       const TldmConfig& config);

/// Per-epoch controller used by the receding-horizon harness.
using EpochFn = std::function<EpochResult(const PlantState&)>;

struct MpcOptions {
  std::ostream* log = nullptr;  // JSON lines, one per epoch
  int steps = -1;               // defaults to the scenario day
  int start = 0;
};

/// Receding-horizon loop: plan, execute the first step on the exact plant, repeat.
/// A failed epoch executes the previous plan shifted by one step, bound-clamped.
RunReport run_mpc(const Building& building, const Scenario& scenario, const std::string& method,
                  const EpochFn& epoch, const MpcOptions& options = {});

RunReport mpc_run(const Building& building, const Scenario& scenario, const TldmConfig& config,
                  const MpcOptions& options = {});

/// Previous plan advanced one step with the last column repeated, clamped to actuator bounds.
ControlPlan shift_plan(const ControlPlan& plan, const Building& building);

/// Clamps flows to zone limits and scales each step down to the AHU capacity.
void clamp_plan(ControlPlan& plan, const Building& building);

}  // namespace hvac
