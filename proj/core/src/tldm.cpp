#include "hvac/tldm.hpp"

#include <nlohmann/json.hpp>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ostream>

namespace hvac {

namespace {

constexpr double kEps = 1e-12;

// Steps k whose successor sample k+1 violates in any zone.
std::vector<bool> co2_steps(const Building& b, const Matrix& co2, double guard) {
  std::vector<bool> mask(static_cast<std::size_t>(co2.cols() - 1), false);
  for (Eigen::Index i = 0; i < co2.rows(); ++i) {
    const double cap = b.zones[static_cast<std::size_t>(i)].co2_max - guard;
    for (Eigen::Index k = 1; k < co2.cols(); ++k) {
      if (co2(i, k) > cap) mask[static_cast<std::size_t>(k - 1)] = true;
    }
  }
  return mask;
}

double co2_excess(const Building& b, const Matrix& co2) {
  double v = 0.0;
  for (Eigen::Index i = 0; i < co2.rows(); ++i) {
    const double cap = b.zones[static_cast<std::size_t>(i)].co2_max;
    v = std::max(v, co2.row(i).tail(co2.cols() - 1).maxCoeff() - cap);
  }
  return v;
}

// Decrement at the masked steps; a masked step already at the floor passes the
// decrement to the closest earlier step that can still move. False when nothing moved.
bool decrement(Vector& dr, const std::vector<bool>& mask, double step, double floor, bool walk_back) {
  std::vector<bool> pick(mask.size(), false);
  for (std::size_t k = 0; k < mask.size(); ++k) {
    if (!mask[k]) continue;
    auto j = static_cast<std::ptrdiff_t>(k);
    while (walk_back && j >= 0 && dr(j) <= floor + kEps) --j;
    if (j >= 0 && dr(j) > floor + kEps) pick[static_cast<std::size_t>(j)] = true;
  }
  bool moved = false;
  for (std::size_t k = 0; k < pick.size(); ++k) {
    if (!pick[k]) continue;
    const auto kk = static_cast<Eigen::Index>(k);
    dr(kk) = std::max(floor, dr(kk) - step);
    moved = true;
  }
  return moved;
}

// Worst inner count over all runs; residual and C2 figures of completed runs only.
void record_llc(EpochStats& s, const LlcResult& llc) {
  s.llc_inner_iterations = std::max(s.llc_inner_iterations, llc.max_inner_iterations);
  s.llc_outer_iterations = std::max(s.llc_outer_iterations, llc.outer_iterations);
  s.adal_runs += llc.adal_runs;
  s.adal_unconverged += llc.adal_unconverged;
  if (llc.infeasible) return;
  ++s.llc_runs;
  if (!llc.supply_settled) ++s.llc_c2_failures;
  s.llc_residual = llc.residual;
  s.llc_supply_delta = llc.supply_delta;
}

}  // namespace

void TldmConfig::validate(const Building& building) const {
  ulc.adal.validate();
  llc.adal.validate();
  if (!(dr_step > 0.0)) throw InputError("dr_step must be > 0");
  if (max_dr_iters < 1) throw InputError("max_dr_iters must be >= 1");
  if (temp_tolerance < 0.0 || co2_guard < 0.0) throw InputError("tolerances must be >= 0");
  if (dr_init) {
    if (dr_init->size() != building.horizon.horizon_steps) throw InputError("dr_init length must equal the horizon");
    if ((dr_init->array() < building.ahu.dr_min - kEps).any() || (dr_init->array() > building.ahu.dr_max + kEps).any()) {
      throw InputError("dr_init outside [dr_min, dr_max]");
    }
  }
}

EpochResult tldm_epoch(const Building& building, const Scenario& scenario, const PlantState& state,
                       const TldmConfig& config) {
  config.validate(building);
  const int H = building.horizon.horizon_steps;
  const double floor = building.ahu.dr_min;
  UlcOptions uo = config.ulc;
  uo.warm_start = config.warm_start;
  LlcOptions lo = config.llc;

  EpochResult res;
  res.stats.time_index = state.time_index;
  Vector dr = config.dr_init ? *config.dr_init : Vector::Constant(H, building.ahu.dr_max);

  std::unique_ptr<UlcSolver> ulc;
  try {
    ulc = std::make_unique<UlcSolver>(building, scenario, state, StepRange{state.time_index, H}, uo);
  } catch (const InputError& e) {
    throw EpochError(std::string("ULC setup failed: ") + e.what());
  }
  const Matrix& temp_lo = ulc->problem().bounds.temp_lo;

  auto finish = [&](ControlPlan plan, double cost) {
    res.plan = std::move(plan);
    res.executed_flows = res.plan.flows.col(0);
    res.executed_dr = res.plan.vent_fraction(0);
    res.predicted_cost = cost;
    res.stats.dr_iterations = res.l_iterations;
    res.stats.llc_invoked = res.llc_invoked;
    res.stats.dr_floor_hit = res.dr_floor_hit;
    res.stats.residual_violation = std::max(res.residual_temp_violation, res.residual_co2_violation);
    return res;
  };

  std::optional<LlcResult> last_llc;
  for (int l = 0; l < config.max_dr_iters; ++l) {
    res.l_iterations = l + 1;
    res.dr_history.push_back(dr);
    UlcResult u;
    try {
      u = ulc->solve(dr);
    } catch (const InputError& e) {
      throw EpochError(std::string("ULC infeasible: ") + e.what());
    }
    res.stats.ulc_iterations = std::max(res.stats.ulc_iterations, u.iterations);
    res.stats.ulc_residual = std::max(res.stats.ulc_residual, u.residual);
    res.stats.ulc_converged = res.stats.ulc_converged && u.converged;
    ++res.stats.adal_runs;
    if (!u.converged) ++res.stats.adal_unconverged;

    const LlcTrigger trig = needs_llc(building, scenario, state, u.flows, dr, config.co2_guard);
    if (!trig.needed) return finish(ControlPlan{u.flows, dr}, u.exact_cost);

    res.llc_invoked = true;
    LlcResult llc = solve_llc(building, scenario, state, u.flows, dr, lo);
    record_llc(res.stats, llc);

    if (llc.infeasible) {
      if (decrement(dr, co2_steps(building, trig.predicted_co2, config.co2_guard), config.dr_step, floor, true)) continue;
      // Cap unreachable at the floor: soft-cap plan or the ULC plan as is.
      res.dr_floor_hit = true;
      res.llc_infeasible = true;
      res.stats.note = "co2 cap unreachable at dr floor";
      if (config.soft_fallback) {
        lo.soft_cap = true;
        LlcResult soft = solve_llc(building, scenario, state, u.flows, dr, lo);
        record_llc(res.stats, soft);
        if (!soft.infeasible) {
          res.stats.llc_converged = res.stats.llc_converged && soft.converged;
          res.residual_co2_violation = std::max(0.0, co2_excess(building, soft.co2));
          const Rollout ro = rollout(building, scenario, state, ControlPlan{soft.flows, dr});
          return finish(ControlPlan{soft.flows, dr}, ro.total_cost);
        }
      }
      res.stats.llc_converged = false;
      res.residual_co2_violation = std::max(0.0, co2_excess(building, trig.predicted_co2));
      return finish(ControlPlan{u.flows, dr}, u.exact_cost);
    }
    res.stats.llc_converged = res.stats.llc_converged && llc.converged;

    std::vector<bool> cold(static_cast<std::size_t>(H), false);
    double worst = 0.0;
    for (Eigen::Index i = 0; i < llc.temps.rows(); ++i) {
      const double tmin = building.zones[static_cast<std::size_t>(i)].temp_min;
      for (int k = 0; k < H; ++k) {
        const double lo_k = std::min(tmin, temp_lo(i, k)) - config.temp_tolerance;
        const double gap = lo_k - llc.temps(i, k + 1);
        if (gap > 0.0) {
          cold[static_cast<std::size_t>(k)] = true;
          worst = std::max(worst, gap);
        }
      }
    }
    const Rollout ro = rollout(building, scenario, state, ControlPlan{llc.flows, dr});
    if (worst == 0.0) return finish(ControlPlan{llc.flows, dr}, ro.total_cost);
    if (!decrement(dr, cold, config.dr_step, floor, false)) {
      res.dr_floor_hit = true;
      res.residual_temp_violation = worst;
      res.stats.note = "temperature floor violated at dr floor";
      return finish(ControlPlan{llc.flows, dr}, ro.total_cost);
    }
    last_llc = std::move(llc);
  }
  // Iteration cap: keep the last LLC plan.
  res.stats.note = "max_dr_iters reached";
  if (last_llc) {
    const Rollout ro = rollout(building, scenario, state, ControlPlan{last_llc->flows, res.dr_history.back()});
    return finish(ControlPlan{last_llc->flows, res.dr_history.back()}, ro.total_cost);
  }
  throw EpochError("TLDM made no progress within max_dr_iters");
}

void clamp_plan(ControlPlan& plan, const Building& building) {
  for (Eigen::Index i = 0; i < plan.flows.rows(); ++i) {
    const auto& z = building.zones[static_cast<std::size_t>(i)];
    plan.flows.row(i) = plan.flows.row(i).cwiseMax(z.flow_min).cwiseMin(z.flow_max);
  }
  for (Eigen::Index k = 0; k < plan.flows.cols(); ++k) {
    const double total = plan.flows.col(k).sum();
    if (total > building.ahu.total_flow_max) plan.flows.col(k) *= building.ahu.total_flow_max / total;
  }
  plan.vent_fraction = plan.vent_fraction.cwiseMax(building.ahu.dr_min).cwiseMin(building.ahu.dr_max);
}

ControlPlan shift_plan(const ControlPlan& plan, const Building& building) {
  ControlPlan out = plan;
  const auto H = plan.flows.cols();
  if (H > 1) {
    out.flows.leftCols(H - 1) = plan.flows.rightCols(H - 1);
    out.vent_fraction.head(H - 1) = plan.vent_fraction.tail(H - 1);
  }
  clamp_plan(out, building);
  return out;
}

RunReport run_mpc(const Building& building, const Scenario& scenario, const std::string& method,
                  const EpochFn& epoch, const MpcOptions& options) {
  const int H = building.horizon.horizon_steps;
  const int steps = options.steps < 0 ? building.horizon.day_steps : options.steps;
  if (options.start < 0 || options.start + steps + H > static_cast<int>(scenario.length())) {
    throw InputError("scenario too short for the requested run");
  }
  PlantState state = scenario.initial_state();
  state.time_index = options.start;
  RunReport report = start_report(method, state, building.horizon.step_hours());
  std::optional<ControlPlan> previous;

  for (int t = 0; t < steps; ++t) {
    const auto t0 = std::chrono::steady_clock::now();
    EpochStats stats;
    ControlPlan plan;
    try {
      EpochResult r = epoch(state);
      stats = r.stats;
      plan = std::move(r.plan);
      clamp_plan(plan, building);
    } catch (const std::exception& e) {
      stats = EpochStats{};
      stats.time_index = state.time_index;
      stats.fallback = true;
      stats.note = e.what();
      if (previous) {
        plan = shift_plan(*previous, building);
      } else {
        // No plan yet: full ventilation and flows at the zone maxima scaled to capacity.
        plan.flows.resize(static_cast<Eigen::Index>(building.zone_count()), H);
        for (std::size_t i = 0; i < building.zone_count(); ++i) {
          plan.flows.row(static_cast<Eigen::Index>(i)).setConstant(building.zones[i].flow_max);
        }
        plan.vent_fraction = Vector::Constant(H, building.ahu.dr_min);
        clamp_plan(plan, building);
      }
      spdlog::warn("{} epoch {} fallback: {}", method, state.time_index, e.what());
    }
    const PlantStep step = plant_step(building, scenario, state, plan.flows.col(0), plan.vent_fraction(0));
    append_step(report, plan.flows.col(0), plan.vent_fraction(0), step);
    stats.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    if (options.log) {
      nlohmann::json j{{"method", method},
                       {"step", stats.time_index},
                       {"l", stats.dr_iterations},
                       {"ulc_iterations", stats.ulc_iterations},
                       {"ulc_residual", stats.ulc_residual},
                       {"llc_invoked", stats.llc_invoked},
                       {"llc_inner", stats.llc_inner_iterations},
                       {"llc_outer", stats.llc_outer_iterations},
                       {"llc_residual", stats.llc_residual},
                       {"supply_delta", stats.llc_supply_delta},
                       {"dr_floor_hit", stats.dr_floor_hit},
                       {"fallback", stats.fallback},
                       {"dr", std::vector<double>(plan.vent_fraction.data(), plan.vent_fraction.data() + plan.vent_fraction.size())},
                       {"note", stats.note},
                       {"wall_ms", stats.wall_ms}};
      *options.log << j.dump() << '\n';
    }
    spdlog::debug("{} step {} l={} llc={} dr0={:.2f} {:.1f} ms", method, stats.time_index, stats.dr_iterations,
                  stats.llc_invoked, plan.vent_fraction(0), stats.wall_ms);
    report.solver_stats.push_back(std::move(stats));
    previous = std::move(plan);
    state = step.next;
  }
  return report;
}

RunReport mpc_run(const Building& building, const Scenario& scenario, const TldmConfig& config,
                  const MpcOptions& options) {
  config.validate(building);
  return run_mpc(
      building, scenario, "tldm",
      [&](const PlantState& s) { return tldm_epoch(building, scenario, s, config); }, options);
}

}  // namespace hvac
