#include "hvac/llc.hpp"

#include <algorithm>
#include <cmath>

namespace hvac {

namespace {

struct ZoneLayout {
  int H = 0;
  bool soft = false;
  int c(int k) const { return 3 * (k - 1); }  // C(k), k = 1..H
  int m(int k) const { return 3 * k + 1; }    // m(k), k = 0..H-1
  int z(int k) const { return 3 * k + 2; }    // Z(k) = m(k) C(k)
  int s(int k) const { return 3 * H + k; }    // cap slack, soft mode only
  int size() const { return 3 * H + (soft ? H : 0); }
};

double flow_scale(const Building& b) {
  double s = 0.0;
  for (const auto& z : b.zones) s = std::max(s, z.flow_max);
  return s;
}

double cap_margin(const Building& b, std::size_t i, double eps_out) {
  // A supply-estimate error of eps_out moves C(k+1) by at most eps_out * m * dt / m_i.
  const auto& z = b.zones[i];
  return eps_out * z.flow_max * b.horizon.step_seconds / z.air_mass;
}

}  // namespace

AdalConfig LlcOptions::default_adal() {
  AdalConfig c;
  c.rho = 1.0;
  c.tau = 0.5;
  c.eps_in = 1e-3;
  c.eps_out = 1.0;
  c.max_inner = 500;
  c.max_outer = 20;
  return c;
}

double co2_floor(const Scenario& scenario, const PlantState& state, std::size_t zone, StepRange window,
                 double margin) {
  double lo = state.co2(static_cast<Eigen::Index>(zone));
  for (int k = 0; k < window.length; ++k) {
    lo = std::min(lo, scenario.outdoor_co2[static_cast<std::size_t>(window.begin + k)]);
  }
  return std::max(0.0, lo - margin);
}

LlcTrigger needs_llc(const Building& building, const Scenario& scenario, const PlantState& state,
                     const Matrix& flows_u, const Vector& dr, double guard) {
  LlcTrigger t;
  const Rollout ro = rollout(building, scenario, state, ControlPlan{flows_u, dr});
  t.predicted_co2 = ro.co2;
  for (Eigen::Index i = 0; i < ro.co2.rows(); ++i) {
    const double cap = building.zones[static_cast<std::size_t>(i)].co2_max - guard;
    if ((ro.co2.row(i).array() > cap).any()) t.needed = true;
  }
  return t;
}

Co2Coeffs co2_coeffs(const Building& building, const Scenario& scenario, StepRange window,
                     const SupplyCo2Estimate& estimate) {
  const auto n = static_cast<Eigen::Index>(building.zone_count());
  const int H = window.length;
  if (estimate.c_z.size() != H || !estimate.c_z.allFinite()) throw InputError("supply CO2 estimate invalid");
  const double dt = building.horizon.step_seconds;
  Co2Coeffs c;
  c.e_supply.resize(n, H);
  c.f_self.resize(n);
  c.g_occ.resize(n, H);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& z = building.zones[static_cast<std::size_t>(i)];
    c.f_self(i) = -dt / z.air_mass;
    for (int k = 0; k < H; ++k) {
      const auto t = static_cast<std::size_t>(window.begin + k);
      c.e_supply(i, k) = estimate.c_z(k) * dt / z.air_mass;
      c.g_occ(i, k) = scenario.occupancy[static_cast<std::size_t>(i)][t] * scenario.co2_gen_rate *
                      building.horizon.step_hours() * co2_ppm_per_gram(z.air_mass);
    }
  }
  return c;
}

SupplyCo2Estimate update_supply_estimate(const Matrix& flows, const Matrix& co2, const Vector& dr,
                                         const std::vector<double>& outdoor, int iteration) {
  SupplyCo2Estimate e;
  e.iteration = iteration;
  e.c_z.resize(flows.cols());
  for (Eigen::Index k = 0; k < flows.cols(); ++k) {
    e.c_z(k) = supply_co2(co2.col(k), flows.col(k), dr(k), outdoor[static_cast<std::size_t>(k)]).value;
  }
  return e;
}

AdalProblem llc_agents(const Building& building, const Scenario& scenario, const PlantState& state,
                       const Matrix& flows_u, const Co2Coeffs& cc, const LlcOptions& options) {
  const std::size_t n = building.zone_count();
  const int H = static_cast<int>(flows_u.cols());
  const double sf = flow_scale(building);
  const double sc = options.co2_scale;
  const StepRange window{state.time_index, H};
  AdalProblem ap;
  const double capacity = building.ahu.total_flow_max - options.capacity_backoff;
  ap.rhs = Vector::Zero(static_cast<Eigen::Index>(n) * H);
  ap.agents.resize(n + static_cast<std::size_t>(H));

  for (std::size_t i = 0; i < n; ++i) {
    const auto ii = static_cast<Eigen::Index>(i);
    const auto& zp = building.zones[i];
    ZoneLayout L{H, options.soft_cap};
    const int N = L.size();
    QpProblem q = QpProblem::unconstrained(N);
    const double c0 = state.co2(ii) / sc;
    const double cmin = co2_floor(scenario, state, i, window, options.co2_floor_margin) / sc;
    const double cap = (zp.co2_max - cap_margin(building, i, options.adal.eps_out)) / sc;
    double chi = cap;
    if (options.soft_cap) {
      // Upper envelope bound: CO2 cannot exceed the no-removal accumulation over the window.
      double acc = std::max(state.co2(ii), zp.co2_max);
      for (int k = 0; k < H; ++k) acc += cc.g_occ(ii, k);
      chi = acc / sc;
    }

    q.eq_a = Matrix::Zero(H + 1, N);
    q.eq_b = Vector::Zero(H + 1);
    const double fz = cc.f_self(ii) * sf;  // per scaled Z, in scaled CO2
    for (int k = 0; k < H; ++k) {
      const double em = cc.e_supply(ii, k) * sf / sc;
      q.eq_a(k, L.c(k + 1)) = 1.0;
      q.eq_a(k, L.m(k)) = -em;
      q.eq_a(k, L.z(k)) = -fz;
      double rhs = cc.g_occ(ii, k) / sc;
      if (k == 0) {
        rhs += c0;
      } else {
        q.eq_a(k, L.c(k)) = -1.0;
      }
      q.eq_b(k) = rhs;
    }
    q.eq_a(H, L.z(0)) = 1.0;
    q.eq_a(H, L.m(0)) = -c0;

    const int cuts_rows = 4 * (H - 1) + (options.soft_cap ? H : 0);
    q.ineq_a = Matrix::Zero(cuts_rows, N);
    q.ineq_b = Vector::Zero(cuts_rows);
    for (int k = 0; k < H; ++k) {
      const double mu = flows_u(ii, k) / sf;
      const double mmax = zp.flow_max / sf;
      if (mu > mmax + 1e-12) throw InputError("ULC flow exceeds zone maximum in LLC input");
      q.lower(L.m(k)) = std::min(mu, mmax);
      q.upper(L.m(k)) = mmax;
      q.quadratic(L.m(k), L.m(k)) = 2.0;
      q.linear(L.m(k)) = -2.0 * mu;
      q.lower(L.c(k + 1)) = cmin;
      q.upper(L.c(k + 1)) = chi;
      if (k >= 1) {
        McCormickBox box{q.lower(L.m(k)), mmax, cmin, chi};
        const auto cuts = mccormick_constraints(box);
        for (int r = 0; r < 4; ++r) {
          const int row = 4 * (k - 1) + r;
          const auto& cut = cuts[static_cast<std::size_t>(r)];
          q.ineq_a(row, L.m(k)) = cut.cx;
          q.ineq_a(row, L.c(k)) = cut.cy;
          q.ineq_a(row, L.z(k)) = cut.cz;
          q.ineq_b(row) = cut.rhs;
        }
        q.lower(L.z(k)) = box.x_lo * box.y_lo;
        q.upper(L.z(k)) = box.x_hi * box.y_hi;
      }
      if (options.soft_cap) {
        const int row = 4 * (H - 1) + k;
        q.ineq_a(row, L.c(k + 1)) = 1.0;
        q.ineq_a(row, L.s(k)) = -1.0;
        q.ineq_b(row) = cap;
        q.lower(L.s(k)) = 0.0;
        q.linear(L.s(k)) = options.soft_penalty;
        q.quadratic(L.s(k), L.s(k)) = options.soft_penalty;
      }
    }
    q.lower(L.z(0)) = q.lower(L.m(0)) * c0;
    q.upper(L.z(0)) = q.upper(L.m(0)) * c0;

    AdalAgent& ag = ap.agents[i];
    ag.rows.resize(static_cast<std::size_t>(H));
    ag.coupling = Matrix::Zero(H, N);
    for (int k = 0; k < H; ++k) {
      ag.rows[static_cast<std::size_t>(k)] = k * static_cast<int>(n) + static_cast<int>(i);
      ag.coupling(k, L.m(k)) = 1.0;
    }
    ag.local = std::move(q);
  }

  // Per-step capacity agents hold copies of the zone flows so that every coupling row
  // touches two agents.
  for (int k = 0; k < H; ++k) {
    QpProblem q = QpProblem::unconstrained(static_cast<int>(n));
    q.ineq_a = Matrix::Ones(1, static_cast<Eigen::Index>(n));
    q.ineq_b = Vector::Constant(1, capacity / sf);
    for (std::size_t i = 0; i < n; ++i) {
      const auto ii = static_cast<Eigen::Index>(i);
      q.lower(ii) = flows_u(ii, k) / sf;
      q.upper(ii) = building.zones[i].flow_max / sf;
    }
    AdalAgent& ag = ap.agents[n + static_cast<std::size_t>(k)];
    for (std::size_t i = 0; i < n; ++i) ag.rows.push_back(k * static_cast<int>(n) + static_cast<int>(i));
    ag.coupling = -Matrix::Identity(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    ag.start = q.lower;
    ag.local = std::move(q);
  }
  return ap;
}

LlcResult recover_feasibility(const Building& building, const Scenario& scenario, const PlantState& state,
                              const Matrix& flows, const Vector& dr, LlcResult result) {
  const Rollout ro = rollout(building, scenario, state, ControlPlan{flows, dr});
  result.flows = flows;
  result.co2 = ro.co2;
  result.temps = ro.temps;
  result.products = flows.cwiseProduct(ro.co2.leftCols(flows.cols()));
  return result;
}

LlcResult solve_llc(const Building& building, const Scenario& scenario, const PlantState& state,
                    const Matrix& flows_u, const Vector& dr, const LlcOptions& options) {
  const std::size_t n = building.zone_count();
  const int H = static_cast<int>(flows_u.cols());
  const StepRange window{state.time_index, H};
  const double sf = flow_scale(building);
  const double sc = options.co2_scale;
  std::vector<double> outdoor;
  for (int k = 0; k < H; ++k) outdoor.push_back(scenario.outdoor_co2[static_cast<std::size_t>(window.begin + k)]);

  LlcResult res;
  SupplyCo2Estimate est;
  est.c_z = Eigen::Map<const Vector>(outdoor.data(), H);
  std::vector<Vector> x_prev;
  Vector alpha_prev;
  Matrix flows = flows_u;
  bool all_inner = true;

  for (int p = 0; p < options.adal.max_outer; ++p) {
    const Co2Coeffs cc = co2_coeffs(building, scenario, window, est);
    AdalSolver solver(llc_agents(building, scenario, state, flows_u, cc, options), options.adal);
    const bool warm = x_prev.size() == n + static_cast<std::size_t>(H);
    const AdalResult ar = solver.run(warm ? &x_prev : nullptr, warm ? &alpha_prev : nullptr);
    res.outer_iterations = p + 1;
    res.inner_iterations += ar.iterations;
    res.max_inner_iterations = std::max(res.max_inner_iterations, ar.iterations);
    res.residual = ar.residual_norm;
    res.residual_history.push_back(ar.residual_norm);
    if (ar.status == AdalStatus::infeasible) {
      res.infeasible = true;
      res.infeasible_zone = ar.infeasible_agent;
      res.converged = false;
      res.supply = est;
      return recover_feasibility(building, scenario, state, flows_u, dr, std::move(res));
    }
    all_inner = all_inner && ar.converged();
    ++res.adal_runs;
    if (!ar.converged()) ++res.adal_unconverged;
    x_prev = ar.x;
    alpha_prev = ar.multipliers;

    ZoneLayout L{H, options.soft_cap};
    Matrix co2(static_cast<Eigen::Index>(n), H + 1);
    res.objective = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const auto ii = static_cast<Eigen::Index>(i);
      co2(ii, 0) = state.co2(ii);
      for (int k = 0; k < H; ++k) {
        flows(ii, k) = std::clamp(ar.x[i](L.m(k)) * sf, flows_u(ii, k), building.zones[i].flow_max);
        co2(ii, k + 1) = ar.x[i](L.c(k + 1)) * sc;
        res.objective += std::pow(flows(ii, k) - flows_u(ii, k), 2);
      }
    }
    res.relaxed_co2 = co2;
    SupplyCo2Estimate next = update_supply_estimate(flows, co2, dr, outdoor, p + 1);
    res.supply_delta = (next.c_z - est.c_z).cwiseAbs().maxCoeff();
    est = next;
    if (res.supply_delta <= options.adal.eps_out) break;
  }
  res.supply = est;
  res.supply_settled = res.supply_delta <= options.adal.eps_out;
  res.converged = all_inner && res.supply_settled;

  // Unused capacity is never negative here: flows only rise where the coupling allowed it.
  for (Eigen::Index k = 0; k < H; ++k) {
    const double total = flows.col(k).sum();
    if (total > building.ahu.total_flow_max) {
      // Residual overshoot within eps_in: trim the zones furthest above their ULC flows.
      double excess = total - building.ahu.total_flow_max;
      for (Eigen::Index i = 0; i < flows.rows() && excess > 0.0; ++i) {
        const double room = flows(i, k) - flows_u(i, k);
        const double cut = std::min(room, excess);
        flows(i, k) -= cut;
        excess -= cut;
      }
    }
  }
  return recover_feasibility(building, scenario, state, flows, dr, std::move(res));
}

}  // namespace hvac
