#include "hvac/ulc.hpp"

#include "hvac/parallel.hpp"

#include <algorithm>
#include <cmath>

namespace hvac {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct ZoneLayout {
  int H = 0;
  int deg = 0;
  int t(int k) const { return k - 1; }  // k = 1..H
  int m(int k) const { return H + k; }  // k = 0..H-1
  int w(int k) const { return 2 * H + k; }
  int y(int p, int k) const { return 3 * H + p * (H - 1) + (k - 1); }  // k = 1..H-1
  int size() const { return 3 * H + deg * (H - 1); }
};

double max_flow_scale(const Building& b) {
  double s = 0.0;
  for (const auto& z : b.zones) s = std::max(s, z.flow_max);
  return s;
}

Matrix thermal_rollout(const ThermalCoeffs& c, const Vector& t0, const Vector& flows, int steps) {
  Matrix out(t0.size(), steps + 1);
  out.col(0) = t0;
  for (int k = 0; k < steps; ++k) out.col(k + 1) = thermal_step(out.col(k), flows, c, k);
  return out;
}

}  // namespace

AdalConfig UlcOptions::default_adal() {
  AdalConfig c;
  c.rho = 1.0;
  c.tau = 0.5;
  c.eps_in = 1e-3;
  c.max_inner = 500;
  return c;
}

UlcBounds ulc_bounds(const Building& building, const Scenario& scenario, const PlantState& state,
                     StepRange window, const UlcOptions& options) {
  const auto n = static_cast<Eigen::Index>(building.zone_count());
  const int H = window.length;
  const ThermalCoeffs c = thermal_coeffs(building, scenario, window);
  double sum_max = 0.0;
  for (const auto& z : building.zones) sum_max += z.flow_max;
  const double cap = building.ahu.total_flow_max - options.capacity_backoff;
  const double share = std::min(1.0, cap / sum_max);
  Vector fast(n), slow(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& z = building.zones[static_cast<std::size_t>(i)];
    fast(i) = std::max(z.flow_min, z.flow_max * share);
    slow(i) = z.flow_min;
  }
  UlcBounds b;
  b.fastest = thermal_rollout(c, state.temps, fast, H);
  const Matrix slowest = thermal_rollout(c, state.temps, slow, H);
  b.temp_lo.resize(n, H);
  b.temp_hi.resize(n, H);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& z = building.zones[static_cast<std::size_t>(i)];
    for (int k = 1; k <= H; ++k) {
      b.temp_hi(i, k - 1) = std::max(z.temp_max, b.fastest(i, k) + options.transient_margin);
      b.temp_lo(i, k - 1) = std::min(z.temp_min, slowest(i, k) - options.transient_margin);
    }
  }
  return b;
}

UlcProblem build_ulc(const Building& building, const Scenario& scenario, const PlantState& state,
                     const Vector& dr, const UlcOptions& options) {
  const int H = building.horizon.horizon_steps;
  UlcProblem p;
  p.window = {state.time_index, H};
  if (dr.size() != H) throw InputError("ventilation profile length must equal the horizon");
  for (Eigen::Index k = 0; k < H; ++k) {
    if (dr(k) < building.ahu.dr_min - 1e-12 || dr(k) > building.ahu.dr_max + 1e-12) {
      throw InputError("ventilation fraction outside [dr_min, dr_max]");
    }
  }
  p.dr = dr;
  p.init = state;
  p.coeffs = thermal_coeffs(building, scenario, p.window);
  p.bounds = ulc_bounds(building, scenario, state, p.window, options);
  for (int k = 0; k < H; ++k) {
    const auto t = static_cast<std::size_t>(p.window.begin + k);
    p.price.push_back(scenario.price[t]);
    p.outdoor_temp.push_back(scenario.outdoor_temp[t]);
  }
  p.flow_scale = max_flow_scale(building);
  p.capacity = building.ahu.total_flow_max - options.capacity_backoff;
  return p;
}

Vector ulc_zone_linear(const Building& building, const UlcProblem& p, std::size_t zone, const UlcOptions& options) {
  const int H = p.steps();
  ZoneLayout L{H, static_cast<int>(building.topology.degree(zone))};
  Vector c = Vector::Zero(L.size());
  const auto& ahu = building.ahu;
  const double dt_h = building.horizon.step_hours();
  const double k_c = ahu.specific_heat * ahu.cop_inverse;
  for (int k = 0; k < H; ++k) {
    const double w = p.price[static_cast<std::size_t>(k)] * dt_h * k_c;
    c(L.m(k)) = w * (1.0 - p.dr(k)) * (p.outdoor_temp[static_cast<std::size_t>(k)] - ahu.supply_temp) * p.flow_scale;
    c(L.w(k)) = w * p.dr(k) * p.flow_scale * options.theta_scale;
  }
  return c;
}

AdalProblem ulc_agents(const Building& building, const UlcProblem& p, const UlcOptions& options) {
  const std::size_t n = building.zone_count();
  const int H = p.steps();
  const double sf = p.flow_scale;
  const double st = options.theta_scale;
  const double tc = building.ahu.supply_temp;
  const auto& topo = building.topology;

  // Coupling rows: one copy row per (step, zone), then one row per (zone, neighbour slot, k >= 1).
  // Every row touches exactly two agents.
  const int copy_rows = H * static_cast<int>(n);
  std::vector<int> consensus_base(n, 0);
  int rows = copy_rows;
  for (std::size_t i = 0; i < n; ++i) {
    consensus_base[i] = rows;
    rows += static_cast<int>(topo.degree(i)) * (H - 1);
  }

  AdalProblem ap;
  ap.rhs = Vector::Zero(rows);
  ap.agents.resize(n + static_cast<std::size_t>(H));

  for (std::size_t i = 0; i < n; ++i) {
    const auto& z = building.zones[i];
    const auto ii = static_cast<Eigen::Index>(i);
    const auto& nb = topo.neighbors(i);
    const auto& an = p.coeffs.a_neighbor[i];
    ZoneLayout L{H, static_cast<int>(nb.size())};
    const int N = L.size();
    QpProblem q = QpProblem::unconstrained(N);
    const double mlo = z.flow_min / sf;
    const double mhi = z.flow_max / sf;
    const double a = p.coeffs.a_self(ii);
    const double cw = p.coeffs.c_flow(ii) * sf * st;

    // Dynamics rows k = 0..H-1 plus the exact product at k = 0.
    q.eq_a = Matrix::Zero(H + 1, N);
    q.eq_b = Vector::Zero(H + 1);
    for (int k = 0; k < H; ++k) {
      q.eq_a(k, L.t(k + 1)) = 1.0;
      q.eq_a(k, L.w(k)) = -cw;
      double rhs = p.coeffs.d_drive(ii, k);
      if (k == 0) {
        rhs += a * p.init.temps(ii);
        for (const auto& [j, aij] : an) rhs += aij * p.init.temps(static_cast<Eigen::Index>(j));
      } else {
        q.eq_a(k, L.t(k)) = -a;
        for (std::size_t s = 0; s < an.size(); ++s) q.eq_a(k, L.y(static_cast<int>(s), k)) = -an[s].second;
      }
      q.eq_b(k) = rhs;
    }
    const double theta0 = (p.init.temps(ii) - tc) / st;
    q.eq_a(H, L.w(0)) = 1.0;
    q.eq_a(H, L.m(0)) = -theta0;

    // Envelope of W(k) = m(k) * theta(k) for k >= 1.
    q.ineq_a = Matrix::Zero(4 * (H - 1), N);
    q.ineq_b = Vector::Zero(4 * (H - 1));
    for (int k = 1; k < H; ++k) {
      McCormickBox box{mlo, mhi, (p.bounds.temp_lo(ii, k - 1) - tc) / st, (p.bounds.temp_hi(ii, k - 1) - tc) / st};
      const auto cuts = mccormick_constraints(box);
      for (int r = 0; r < 4; ++r) {
        const int row = 4 * (k - 1) + r;
        q.ineq_a(row, L.m(k)) = cuts[static_cast<std::size_t>(r)].cx;
        q.ineq_a(row, L.t(k)) = cuts[static_cast<std::size_t>(r)].cy / st;
        q.ineq_a(row, L.w(k)) = cuts[static_cast<std::size_t>(r)].cz;
        q.ineq_b(row) = cuts[static_cast<std::size_t>(r)].rhs + cuts[static_cast<std::size_t>(r)].cy * tc / st;
      }
      q.lower(L.w(k)) = mlo * box.y_lo;
      q.upper(L.w(k)) = mhi * box.y_hi;
    }
    q.lower(L.w(0)) = std::min(mlo * theta0, mhi * theta0);
    q.upper(L.w(0)) = std::max(mlo * theta0, mhi * theta0);
    for (int k = 1; k <= H; ++k) {
      q.lower(L.t(k)) = p.bounds.temp_lo(ii, k - 1);
      q.upper(L.t(k)) = p.bounds.temp_hi(ii, k - 1);
    }
    for (int k = 0; k < H; ++k) {
      q.lower(L.m(k)) = mlo;
      q.upper(L.m(k)) = mhi;
      q.quadratic(L.m(k), L.m(k)) = 2.0 * options.tie_break * sf * sf;
    }
    for (std::size_t s = 0; s < nb.size(); ++s) {
      const auto jj = static_cast<Eigen::Index>(nb[s].first);
      for (int k = 1; k < H; ++k) {
        q.lower(L.y(static_cast<int>(s), k)) = p.bounds.temp_lo(jj, k - 1);
        q.upper(L.y(static_cast<int>(s), k)) = p.bounds.temp_hi(jj, k - 1);
      }
    }
    q.linear = ulc_zone_linear(building, p, i, options);

    // Coupling columns: capacity, own copies, and copies of this zone held by neighbours.
    AdalAgent& ag = ap.agents[i];
    std::vector<std::pair<int, std::pair<int, double>>> entries;  // row, (col, coef)
    for (int k = 0; k < H; ++k) entries.push_back({k * static_cast<int>(n) + static_cast<int>(i), {L.m(k), 1.0}});
    for (std::size_t s = 0; s < nb.size(); ++s) {
      for (int k = 1; k < H; ++k) {
        entries.push_back({consensus_base[i] + static_cast<int>(s) * (H - 1) + (k - 1), {L.y(static_cast<int>(s), k), 1.0}});
      }
      const std::size_t j = nb[s].first;
      const auto& nbj = topo.neighbors(j);
      const auto slot = static_cast<int>(std::find_if(nbj.begin(), nbj.end(), [&](const auto& e) { return e.first == i; }) - nbj.begin());
      for (int k = 1; k < H; ++k) {
        entries.push_back({consensus_base[j] + slot * (H - 1) + (k - 1), {L.t(k), -1.0}});
      }
    }
    std::sort(entries.begin(), entries.end());
    for (const auto& e : entries) {
      if (ag.rows.empty() || ag.rows.back() != e.first) ag.rows.push_back(e.first);
    }
    ag.coupling = Matrix::Zero(static_cast<Eigen::Index>(ag.rows.size()), N);
    for (const auto& e : entries) {
      const auto r = std::lower_bound(ag.rows.begin(), ag.rows.end(), e.first) - ag.rows.begin();
      ag.coupling(r, e.second.first) += e.second.second;
    }
    ag.local = std::move(q);
  }

  // One capacity agent per step: holds copies of all zone flows, enforces the AHU limit
  // and carries the fan cost.
  const double kf = building.ahu.fan_coeff;
  const double dt_h = building.horizon.step_hours();
  for (int k = 0; k < H; ++k) {
    QpProblem q = QpProblem::unconstrained(static_cast<int>(n));
    const double w = p.price[static_cast<std::size_t>(k)] * dt_h * kf;
    q.quadratic.setConstant(2.0 * w * sf * sf);
    q.ineq_a = Matrix::Ones(1, static_cast<Eigen::Index>(n));
    q.ineq_b = Vector::Constant(1, p.capacity / sf);
    for (std::size_t i = 0; i < n; ++i) {
      q.lower(static_cast<Eigen::Index>(i)) = building.zones[i].flow_min / sf;
      q.upper(static_cast<Eigen::Index>(i)) = building.zones[i].flow_max / sf;
    }
    AdalAgent& ag = ap.agents[n + static_cast<std::size_t>(k)];
    for (std::size_t i = 0; i < n; ++i) ag.rows.push_back(k * static_cast<int>(n) + static_cast<int>(i));
    ag.coupling = -Matrix::Identity(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    ag.local = std::move(q);
  }
  return ap;
}

namespace {

struct Extracted {
  Matrix flows;
  Matrix temps;
  double relaxed_cost = 0.0;
};

Extracted extract(const Building& building, const UlcProblem& p, const std::vector<Vector>& x,
                  const UlcOptions& options) {
  const std::size_t n = building.zone_count();
  const int H = p.steps();
  Extracted e;
  e.flows.resize(static_cast<Eigen::Index>(n), H);
  e.temps.resize(static_cast<Eigen::Index>(n), H + 1);
  const auto& ahu = building.ahu;
  const double dt_h = building.horizon.step_hours();
  const double k_c = ahu.specific_heat * ahu.cop_inverse;
  Matrix w(static_cast<Eigen::Index>(n), H);
  for (std::size_t i = 0; i < n; ++i) {
    const auto ii = static_cast<Eigen::Index>(i);
    ZoneLayout L{H, static_cast<int>(building.topology.degree(i))};
    e.temps(ii, 0) = p.init.temps(ii);
    for (int k = 0; k < H; ++k) {
      e.flows(ii, k) = x[i](L.m(k)) * p.flow_scale;
      w(ii, k) = x[i](L.w(k)) * p.flow_scale * options.theta_scale;
      e.temps(ii, k + 1) = x[i](L.t(k + 1));
    }
  }
  for (int k = 0; k < H; ++k) {
    const double total = e.flows.col(k).sum();
    const double pc = k_c * (1.0 - p.dr(k)) * total * (p.outdoor_temp[static_cast<std::size_t>(k)] - ahu.supply_temp) +
                      k_c * p.dr(k) * w.col(k).sum();
    e.relaxed_cost += p.price[static_cast<std::size_t>(k)] * dt_h * (pc + ahu.fan_coeff * total * total);
  }
  return e;
}

void enforce_capacity(const Building& building, Matrix& flows) {
  for (Eigen::Index i = 0; i < flows.rows(); ++i) {
    const auto& z = building.zones[static_cast<std::size_t>(i)];
    flows.row(i) = flows.row(i).cwiseMax(z.flow_min).cwiseMin(z.flow_max);
  }
  const double cap = building.ahu.total_flow_max;
  for (Eigen::Index k = 0; k < flows.cols(); ++k) {
    const double total = flows.col(k).sum();
    if (total > cap) flows.col(k) *= cap / total;
  }
}

double band_violation(const UlcProblem& p, const Matrix& temps) {
  double v = 0.0;
  for (Eigen::Index i = 0; i < temps.rows(); ++i) {
    for (int k = 1; k <= p.steps(); ++k) {
      v = std::max({v, temps(i, k) - p.bounds.temp_hi(i, k - 1), p.bounds.temp_lo(i, k - 1) - temps(i, k)});
    }
  }
  return v;
}

// Per-zone flow correction against the exact rollout, product linearised at (m_hat, T_hat).
Vector repair_zone(const Building& building, const UlcProblem& p, std::size_t i, const Matrix& m_hat,
                   const Matrix& t_hat, const UlcOptions& options) {
  const int H = p.steps();
  const auto ii = static_cast<Eigen::Index>(i);
  const auto& z = building.zones[i];
  const double sf = p.flow_scale;
  const double tc = building.ahu.supply_temp;
  const double a = p.coeffs.a_self(ii);
  const double c = p.coeffs.c_flow(ii);
  const auto& an = p.coeffs.a_neighbor[i];
  // Variables: m~(0..H-1) then T(1..H).
  auto build = [&](double margin) {
    QpProblem q = QpProblem::unconstrained(2 * H);
    q.eq_a = Matrix::Zero(H, 2 * H);
    q.eq_b = Vector::Zero(H);
    for (int k = 0; k < H; ++k) {
      double rhs = p.coeffs.d_drive(ii, k);
      for (const auto& [j, aij] : an) rhs += aij * t_hat(static_cast<Eigen::Index>(j), k);
      q.eq_a(k, H + k) = 1.0;
      if (k == 0) {
        rhs += a * t_hat(ii, 0);
        q.eq_a(k, 0) = -c * (t_hat(ii, 0) - tc) * sf;
      } else {
        const double mh = m_hat(ii, k);
        q.eq_a(k, H + k - 1) = -(a + c * mh);
        q.eq_a(k, k) = -c * (t_hat(ii, k) - tc) * sf;
        rhs -= c * mh * t_hat(ii, k);
      }
      q.eq_b(k) = rhs;
    }
    for (int k = 0; k < H; ++k) {
      q.lower(k) = z.flow_min / sf;
      q.upper(k) = z.flow_max / sf;
      q.quadratic(k, k) = 2.0;
      q.linear(k) = -2.0 * m_hat(ii, k) / sf;
      double lo = p.bounds.temp_lo(ii, k) + margin;
      double hi = p.bounds.temp_hi(ii, k) - margin;
      if (lo > hi) {
        lo = p.bounds.temp_lo(ii, k);
        hi = p.bounds.temp_hi(ii, k);
      }
      q.lower(H + k) = lo;
      q.upper(H + k) = hi;
    }
    return q;
  };
  for (double margin : {options.repair_margin, 0.0}) {
    const QpSolution s = solve_qp(build(margin));
    if (s.ok()) return s.x.head(H) * sf;
  }
  return m_hat.row(ii).transpose();
}

}  // namespace

UlcSolver::UlcSolver(const Building& building, const Scenario& scenario, const PlantState& state, StepRange window,
                     UlcOptions options)
    : building_(building), scenario_(scenario), options_(options) {
  const int H = window.length;
  if (H != building.horizon.horizon_steps) throw InputError("ULC window must span the horizon");
  PlantState s = state;
  s.time_index = window.begin;
  problem_ = build_ulc(building, scenario, s, Vector::Constant(H, building.ahu.dr_max), options_);
  adal_ = std::make_unique<AdalSolver>(ulc_agents(building, problem_, options_), options_.adal);
}

UlcResult UlcSolver::solve(const Vector& dr) {
  const std::size_t n = building_.zone_count();
  const int H = problem_.steps();
  if (dr.size() != H) throw InputError("ventilation profile length must equal the horizon");
  problem_.dr = dr;
  for (std::size_t i = 0; i < n; ++i) adal_->set_local_linear(i, ulc_zone_linear(building_, problem_, i, options_));

  const bool warm = options_.warm_start && last_x_.size() == n + static_cast<std::size_t>(H);
  const AdalResult ar = adal_->run(warm ? &last_x_ : nullptr, warm ? &last_alpha_ : nullptr);
  UlcResult r;
  r.iterations = ar.iterations;
  r.residual = ar.residual_norm;
  r.converged = ar.converged();
  if (ar.status == AdalStatus::infeasible) {
    throw InputError("ULC local problem infeasible for zone " + std::to_string(ar.infeasible_agent));
  }
  last_x_ = ar.x;
  last_alpha_ = ar.multipliers;

  Extracted e = extract(building_, problem_, ar.x, options_);
  r.objective = e.relaxed_cost;
  r.predicted_temps = e.temps;
  Matrix flows = e.flows;
  enforce_capacity(building_, flows);

  auto exact = [&](const Matrix& f) {
    ControlPlan plan{f, dr};
    return rollout(building_, scenario_, problem_.init, plan);
  };
  Rollout ro = exact(flows);
  double viol = band_violation(problem_, ro.temps);
  if (options_.repair && viol > options_.repair_tolerance) {
    Matrix repaired = flows;
    ThreadPool::shared().parallel_for(n, [&](std::size_t i) {
      repaired.row(static_cast<Eigen::Index>(i)) = repair_zone(building_, problem_, i, flows, ro.temps, options_).transpose();
    });
    enforce_capacity(building_, repaired);
    Rollout ro2 = exact(repaired);
    const double viol2 = band_violation(problem_, ro2.temps);
    if (viol2 < viol) {
      flows = repaired;
      ro = std::move(ro2);
      viol = viol2;
      r.repaired = true;
    }
  }
  r.flows = flows;
  r.recovered_temps = ro.temps;
  r.exact_cost = ro.total_cost;
  r.temp_violation = std::max(0.0, viol);
  return r;
}

UlcResult solve_ulc(const Building& building, const Scenario& scenario, const PlantState& state, const Vector& dr,
                    const UlcOptions& options) {
  UlcSolver solver(building, scenario, state, {state.time_index, building.horizon.horizon_steps}, options);
  return solver.solve(dr);
}

}  // namespace hvac
