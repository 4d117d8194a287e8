#include "hvac/baselines.hpp"

#include "hvac/parallel.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

namespace hvac {

void DcvConfig::validate() const {
  if (per_person_rate < 0.0 || per_area_rate < 0.0) throw InputError("DCV rates must be >= 0");
  if (variant == DcvVariant::I && per_area_rate != 0.0) throw InputError("DCV I uses no per-area rate");
}

Vector dcv_fresh_air(const Vector& occupancy, std::span<const ZoneParams> zones, const DcvConfig& config,
                     double air_density) {
  config.validate();
  if (static_cast<std::size_t>(occupancy.size()) != zones.size()) throw InputError("occupancy length mismatch");
  Vector f(occupancy.size());
  for (Eigen::Index i = 0; i < f.size(); ++i) {
    const double litres = occupancy(i) * config.per_person_rate + zones[static_cast<std::size_t>(i)].area * config.per_area_rate;
    f(i) = litres * 1e-3 * air_density;
  }
  return f;
}

DcvVentilation dcv_ventilation_rate(const Vector& fresh, const Vector& flows, const AhuParams& ahu) {
  if (fresh.size() != flows.size()) throw InputError("fresh-air and flow vectors differ in length");
  DcvVentilation v;
  v.fresh_flows = fresh;
  v.total_fresh = fresh.sum();
  const double total = flows.sum();
  for (Eigen::Index i = 0; i < flows.size(); ++i) {
    if (flows(i) > 0.0) {
      v.z_max_ratio = std::max(v.z_max_ratio, fresh(i) / flows(i));
    } else if (fresh(i) > 0.0) {
      v.under_ventilated = true;
    }
  }
  if (v.z_max_ratio > 1.0) {
    v.over_demand = true;
    v.z_max_ratio = 1.0;
  }
  if (total > 0.0) {
    v.x_ratio = std::min(v.total_fresh / total, v.z_max_ratio);
    v.y_corrected = v.x_ratio / (1.0 + v.x_ratio - v.z_max_ratio);
  } else {
    v.y_corrected = v.total_fresh > 0.0 ? 1.0 : 0.0;
  }
  if (v.over_demand) v.y_corrected = 1.0;
  v.y_corrected = std::clamp(v.y_corrected, 0.0, 1.0);
  v.dr = std::clamp(1.0 - v.y_corrected, ahu.dr_min, ahu.dr_max);
  return v;
}

namespace {

EpochResult plan_result(const PlantState& state, const UlcResult& u, const Vector& dr) {
  EpochResult e;
  e.plan = ControlPlan{u.flows, dr};
  e.executed_flows = u.flows.col(0);
  e.executed_dr = dr(0);
  e.l_iterations = 1;
  e.predicted_cost = u.exact_cost;
  e.stats.time_index = state.time_index;
  e.stats.dr_iterations = 1;
  e.stats.ulc_iterations = u.iterations;
  e.stats.ulc_residual = u.residual;
  e.stats.ulc_converged = u.converged;
  e.stats.adal_runs = 1;
  e.stats.adal_unconverged = u.converged ? 0 : 1;
  return e;
}

UlcResult ulc_or_throw(UlcSolver& s, const Vector& dr) {
  try {
    return s.solve(dr);
  } catch (const InputError& e) {
    throw EpochError(std::string("ULC infeasible: ") + e.what());
  }
}

}  // namespace

EpochResult fixed_vent_epoch(const Building& building, const Scenario& scenario, const PlantState& state,
                             const UlcOptions& options) {
  const int H = building.horizon.horizon_steps;
  UlcSolver s(building, scenario, state, {state.time_index, H}, options);
  const Vector dr = Vector::Constant(H, building.ahu.dr_max);
  return plan_result(state, ulc_or_throw(s, dr), dr);
}

EpochResult dcv_epoch(const Building& building, const Scenario& scenario, const PlantState& state,
                      const DcvConfig& config, const UlcOptions& options) {
  const int H = building.horizon.horizon_steps;
  const auto n = static_cast<Eigen::Index>(building.zone_count());
  UlcSolver s(building, scenario, state, {state.time_index, H}, options);
  Vector dr = Vector::Constant(H, building.ahu.dr_max);
  UlcResult u = ulc_or_throw(s, dr);
  const UlcResult first = u;
  Vector amended(H);
  bool under = false;
  for (int k = 0; k < H; ++k) {
    Vector occ(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      occ(i) = scenario.occupancy[static_cast<std::size_t>(i)][static_cast<std::size_t>(state.time_index + k)];
    }
    const DcvVentilation v = dcv_ventilation_rate(dcv_fresh_air(occ, building.zones, config, building.ahu.air_density),
                                                  first.flows.col(k), building.ahu);
    amended(k) = v.dr;
    under = under || v.under_ventilated;
  }
  int solves = 1;
  if (config.resolve && (amended - dr).cwiseAbs().maxCoeff() > 0.0) {
    u = ulc_or_throw(s, amended);
    ++solves;
  }
  EpochResult e = plan_result(state, u, amended);
  e.stats.dr_iterations = solves;
  e.stats.adal_runs = solves;
  e.stats.adal_unconverged = (first.converged ? 0 : 1) + (solves > 1 && !u.converged ? 1 : 0);
  e.stats.ulc_converged = first.converged && u.converged;
  e.stats.ulc_iterations = std::max(first.iterations, u.iterations);
  e.stats.ulc_residual = std::max(first.residual, u.residual);
  if (under) e.stats.note = "under-ventilation: fresh-air demand in a zone with zero flow";
  return e;
}

RunReport run_fixed_vent(const Building& building, const Scenario& scenario, const BaselineOptions& options) {
  return run_mpc(
      building, scenario, "fixed",
      [&](const PlantState& s) { return fixed_vent_epoch(building, scenario, s, options.ulc); }, options.mpc);
}

RunReport run_dcv(const Building& building, const Scenario& scenario, const DcvConfig& config,
                  const BaselineOptions& options) {
  config.validate();
  return run_mpc(
      building, scenario, config.variant == DcvVariant::I ? "dcv1" : "dcv2",
      [&](const PlantState& s) { return dcv_epoch(building, scenario, s, config, options.ulc); }, options.mpc);
}

CalibrationResult calibrate_dcv(const Building& building, const Scenario& scenario, DcvConfig config,
                                const BaselineOptions& options, double band, double rp_lo, double rp_hi,
                                int max_evaluations) {
  if (!(rp_hi > rp_lo) || rp_lo < 0.0) throw InputError("calibration bracket must satisfy 0 <= lo < hi");
  double cap = std::numeric_limits<double>::infinity();
  for (const auto& z : building.zones) cap = std::min(cap, z.co2_max);
  CalibrationResult best;
  bool have = false;
  auto eval = [&](double rp) {
    DcvConfig c = config;
    c.per_person_rate = rp;
    const RunReport r = run_dcv(building, scenario, c, options);
    double mx = 0.0;
    for (const auto& v : r.co2) mx = std::max(mx, v.maxCoeff());
    ++best.evaluations;
    spdlog::info("calibrate R_p={:.4f} max CO2={:.2f} cost={:.4f}", rp, mx, r.total_cost);
    // Keep the smallest rate seen that respects the cap.
    if (mx <= cap && (!have || rp < best.config.per_person_rate)) {
      best.config = c;
      best.max_co2 = mx;
      best.cost = r.total_cost;
      have = true;
    }
    return mx;
  };
  const double at_hi = eval(rp_hi);
  if (at_hi > cap) {
    best.config = config;
    best.config.per_person_rate = rp_hi;
    best.max_co2 = at_hi;
    return best;  // bracket too small
  }
  if (at_hi >= cap - band) {
    best.converged = true;
    return best;
  }
  double lo = rp_lo, hi = rp_hi;
  while (best.evaluations < max_evaluations) {
    const double mid = 0.5 * (lo + hi);
    const double mx = eval(mid);
    if (mx > cap) {
      lo = mid;
    } else if (mx < cap - band) {
      hi = mid;
    } else {
      best.converged = true;
      break;
    }
  }
  return best;
}

namespace {

// Scalar mirror of the exact plant for at most two zones, used in the inner
// loop of the enumeration where Eigen temporaries dominate.
struct TinyPlant {
  int n = 0;
  std::array<double, 2> a_self{}, c_flow{}, air_mass{}, flow_min{}, flow_max{};
  std::array<std::array<double, 2>, 2> a_nb{};
  std::vector<std::array<double, 2>> drive;  // per step
  std::vector<std::array<double, 2>> source; // ppm per step
  std::vector<double> t_out, c_out, price;
  double tc = 15.0, kc = 1.0, kf = 0.0, dt = 1800.0, dt_h = 0.5, cap = 0.0;
};

struct Node {
  std::array<double, 2> t{}, c{};
};

}  // namespace

OracleResult brute_force_oracle(const Building& building, const Scenario& scenario, const PlantState& state,
                                const OracleOptions& options) {
  const int n = static_cast<int>(building.zone_count());
  const int H = building.horizon.horizon_steps;
  if (n < 1 || n > 2) throw InputError("oracle supports 1 or 2 zones");
  if (H < 1 || H > 3) throw InputError("oracle supports horizons of at most 3 steps");
  if (options.flow_levels < 2 || options.flow_levels > 21 || options.dr_levels < 1 || options.dr_levels > 21) {
    throw InputError("oracle grid levels must lie in [2, 21] (flows) and [1, 21] (ventilation)");
  }
  const double per_step = std::pow(static_cast<double>(options.flow_levels), n) * options.dr_levels;
  OracleResult res;
  res.combinations = std::pow(per_step, H);
  if (res.combinations > options.max_combinations) {
    throw InputError("oracle enumeration bound exceeded (" + std::to_string(res.combinations) + " combinations)");
  }

  TinyPlant p;
  p.n = n;
  const ThermalCoeffs tc = thermal_coeffs(building, scenario, {state.time_index, H});
  for (int i = 0; i < n; ++i) {
    const auto& z = building.zones[static_cast<std::size_t>(i)];
    p.a_self[static_cast<std::size_t>(i)] = tc.a_self(i);
    p.c_flow[static_cast<std::size_t>(i)] = tc.c_flow(i);
    p.air_mass[static_cast<std::size_t>(i)] = z.air_mass;
    p.flow_min[static_cast<std::size_t>(i)] = z.flow_min;
    p.flow_max[static_cast<std::size_t>(i)] = z.flow_max;
    for (const auto& [j, a] : tc.a_neighbor[static_cast<std::size_t>(i)]) p.a_nb[static_cast<std::size_t>(i)][j] = a;
  }
  p.tc = building.ahu.supply_temp;
  p.kc = building.ahu.specific_heat * building.ahu.cop_inverse;
  p.kf = building.ahu.fan_coeff;
  p.dt = building.horizon.step_seconds;
  p.dt_h = building.horizon.step_hours();
  p.cap = building.ahu.total_flow_max;
  for (int k = 0; k < H; ++k) {
    const auto t = static_cast<std::size_t>(state.time_index + k);
    std::array<double, 2> d{}, s{};
    for (int i = 0; i < n; ++i) {
      const auto ii = static_cast<std::size_t>(i);
      d[ii] = tc.d_drive(i, k);
      s[ii] = scenario.occupancy[ii][t] * scenario.co2_gen_rate * p.dt_h * co2_ppm_per_gram(p.air_mass[ii]);
    }
    p.drive.push_back(d);
    p.source.push_back(s);
    p.t_out.push_back(scenario.outdoor_temp[t]);
    p.c_out.push_back(scenario.outdoor_co2[t]);
    p.price.push_back(scenario.price[t]);
  }

  // Per-step grid choices: flow level per zone and ventilation level.
  struct Choice {
    std::array<double, 2> m{};
    double d = 0.0;
  };
  std::vector<Choice> grid;
  const int F = options.flow_levels;
  const int D = options.dr_levels;
  auto level = [](double lo, double hi, int idx, int count) {
    return count == 1 ? hi : lo + (hi - lo) * idx / (count - 1);
  };
  for (int a = 0; a < F; ++a) {
    for (int b = 0; b < (n == 2 ? F : 1); ++b) {
      for (int e = 0; e < D; ++e) {
        Choice c;
        c.m[0] = level(p.flow_min[0], p.flow_max[0], a, F);
        if (n == 2) c.m[1] = level(p.flow_min[1], p.flow_max[1], b, F);
        c.d = level(building.ahu.dr_min, building.ahu.dr_max, e, D);
        if (c.m[0] + c.m[1] <= p.cap + 1e-12) grid.push_back(c);
      }
    }
  }

  const double tol = options.temp_tolerance;
  // One exact step; false when the successor state breaks a bound.
  auto step = [&](const Node& s, const Choice& ch, int k, Node& out, double& cost) {
    const double total = ch.m[0] + ch.m[1];
    double cm;
    if (total > 0.0) {
      cm = (ch.m[0] * s.c[0] + ch.m[1] * s.c[1]) / total;
    } else {
      cm = n == 2 ? 0.5 * (s.c[0] + s.c[1]) : s.c[0];
    }
    const auto kk = static_cast<std::size_t>(k);
    const double cz = (1.0 - ch.d) * p.c_out[kk] + ch.d * cm;
    double recirc = 0.0;
    for (int i = 0; i < n; ++i) {
      const auto ii = static_cast<std::size_t>(i);
      if (p.air_mass[ii] < ch.m[ii] * p.dt) return false;
      double v = p.a_self[ii] * s.t[ii];
      for (int j = 0; j < n; ++j) v += p.a_nb[ii][static_cast<std::size_t>(j)] * s.t[static_cast<std::size_t>(j)];
      v += p.c_flow[ii] * ch.m[ii] * (s.t[ii] - p.tc) + p.drive[kk][ii];
      out.t[ii] = v;
      out.c[ii] = s.c[ii] + p.source[kk][ii] + ch.m[ii] * (cz - s.c[ii]) * p.dt / p.air_mass[ii];
      recirc += ch.m[ii] * (s.t[ii] - p.tc);
      const auto& z = building.zones[ii];
      if (out.t[ii] < z.temp_min - tol || out.t[ii] > z.temp_max + tol || out.c[ii] > z.co2_max) return false;
    }
    const double pc = std::max(0.0, p.kc * (1.0 - ch.d) * total * (p.t_out[kk] - p.tc) + p.kc * ch.d * recirc);
    cost = p.price[kk] * (pc + p.kf * total * total) * p.dt_h;
    return true;
  };

  Node root;
  for (int i = 0; i < n; ++i) {
    root.t[static_cast<std::size_t>(i)] = state.temps(i);
    root.c[static_cast<std::size_t>(i)] = state.co2(i);
  }

  // Branch on the first step in parallel; each branch keeps its own incumbent.
  struct Branch {
    double best = std::numeric_limits<double>::infinity();
    std::vector<int> path;
    long long nodes = 0;
  };
  std::vector<Branch> branches(grid.size());
  ThreadPool::shared().parallel_for(grid.size(), [&](std::size_t g0) {
    Branch& br = branches[g0];
    std::vector<int> path(static_cast<std::size_t>(H), -1);
    path[0] = static_cast<int>(g0);
    Node first;
    double c0 = 0.0;
    ++br.nodes;
    if (!step(root, grid[g0], 0, first, c0)) return;
    auto dfs = [&](auto&& self, const Node& s, int k, double acc) -> void {
      if (k == H) {
        if (acc < br.best) {
          br.best = acc;
          br.path = path;
        }
        return;
      }
      for (std::size_t g = 0; g < grid.size(); ++g) {
        Node nx;
        double c = 0.0;
        ++br.nodes;
        if (!step(s, grid[g], k, nx, c)) continue;
        if (acc + c >= br.best) continue;
        path[static_cast<std::size_t>(k)] = static_cast<int>(g);
        self(self, nx, k + 1, acc + c);
      }
    };
    dfs(dfs, first, 1, c0);
  });

  std::size_t arg = branches.size();
  for (std::size_t g = 0; g < branches.size(); ++g) {
    res.evaluated += branches[g].nodes;
    if (branches[g].path.empty()) continue;
    if (arg == branches.size() || branches[g].best < branches[arg].best) arg = g;
  }
  if (arg == branches.size()) return res;
  res.feasible = true;
  res.plan.flows.resize(n, H);
  res.plan.vent_fraction.resize(H);
  for (int k = 0; k < H; ++k) {
    const Choice& ch = grid[static_cast<std::size_t>(branches[arg].path[static_cast<std::size_t>(k)])];
    for (int i = 0; i < n; ++i) res.plan.flows(i, k) = ch.m[static_cast<std::size_t>(i)];
    res.plan.vent_fraction(k) = ch.d;
  }
  // Report the cost from the shared rollout so every method is scored the same way.
  res.cost = rollout(building, scenario, state, res.plan).total_cost;
  return res;
}

}  // namespace hvac
