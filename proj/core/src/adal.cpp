#include "hvac/adal.hpp"

#include "hvac/parallel.hpp"

#include <algorithm>
#include <cmath>

namespace hvac {

void AdalConfig::validate() const {
  if (!(rho > 0.0)) throw InputError("adal: rho must be > 0");
  if (!(eps_in > 0.0) || !(eps_out > 0.0)) throw InputError("adal: tolerances must be > 0");
  if (max_inner < 1 || max_outer < 1) throw InputError("adal: iteration caps must be >= 1");
  if (!(tau > 0.0 && tau <= 1.0)) throw InputError("adal: tau must lie in (0, 1]");
}

double residual_norm(const Vector& r) { return r.size() ? r.cwiseAbs().maxCoeff() : 0.0; }

AdalSolver::AdalSolver(AdalProblem problem, AdalConfig config)
    : problem_(std::move(problem)), config_(config), rho_(config.rho) {
  config_.validate();
  const auto m = problem_.rhs.size();
  for (std::size_t i = 0; i < problem_.agents.size(); ++i) {
    const auto& a = problem_.agents[i];
    if (a.coupling.rows() != static_cast<Eigen::Index>(a.rows.size()) ||
        a.coupling.cols() != a.local.dimension()) {
      throw InputError("adal: coupling block shape mismatch for agent " + std::to_string(i));
    }
    for (int r : a.rows) {
      if (r < 0 || r >= m) throw InputError("adal: coupling row out of range");
    }
  }
  build_solvers();
}

void AdalSolver::build_solvers() {
  const std::size_t n = problem_.agents.size();
  solvers_.clear();
  solvers_.resize(n);
  ThreadPool::shared().parallel_for(n, [&](std::size_t i) {
    const auto& a = problem_.agents[i];
    QpProblem p = a.local;
    p.quadratic += rho_ * a.coupling.transpose() * a.coupling;
    solvers_[i] = std::make_unique<QpSolver>(std::move(p));
  });
}

void AdalSolver::set_local_linear(std::size_t agent, const Vector& linear) {
  auto& a = problem_.agents.at(agent);
  if (linear.size() != a.local.dimension()) throw InputError("adal: linear term length mismatch");
  a.local.linear = linear;
}

Vector AdalSolver::coupling_residual(const std::vector<Vector>& x) const {
  Vector r = -problem_.rhs;
  for (std::size_t i = 0; i < problem_.agents.size(); ++i) {
    const auto& a = problem_.agents[i];
    const Vector ax = a.coupling * x[i];
    for (std::size_t k = 0; k < a.rows.size(); ++k) r(a.rows[k]) += ax(static_cast<Eigen::Index>(k));
  }
  return r;
}

AdalResult AdalSolver::run(const std::vector<Vector>* x0, const Vector* alpha0) {
  const std::size_t n = problem_.agents.size();
  const auto m = problem_.rhs.size();
  auto& pool = ThreadPool::shared();
  AdalResult res;
  res.multipliers = alpha0 && alpha0->size() == m ? *alpha0 : Vector::Zero(m);

  std::vector<Vector> x(n);
  std::vector<QpStatus> status(n, QpStatus::optimal);
  if (x0 && x0->size() == n) {
    x = *x0;
  } else {
    pool.parallel_for(n, [&](std::size_t i) {
      const auto& a = problem_.agents[i];
      if (a.start.size() == a.local.dimension()) {
        x[i] = a.start;
        return;
      }
      const QpSolution s = solve_qp(a.local);
      status[i] = s.status;
      x[i] = s.x;
    });
    for (std::size_t i = 0; i < n; ++i) {
      if (status[i] == QpStatus::infeasible) {
        res.status = AdalStatus::infeasible;
        res.infeasible_agent = static_cast<int>(i);
        res.x = x;
        return res;
      }
    }
  }

  Vector r = coupling_residual(x);
  std::vector<Vector> xhat(n);
  std::vector<Vector> best;
  double best_norm = std::numeric_limits<double>::infinity();
  Vector best_alpha = res.multipliers;
  const double rho0 = rho_;

  for (int q = 1; q <= config_.max_inner; ++q) {
    const Vector alpha = res.multipliers;
    pool.parallel_for(n, [&](std::size_t i) {
      const auto& a = problem_.agents[i];
      Vector rows_r(static_cast<Eigen::Index>(a.rows.size()));
      Vector rows_a(rows_r.size());
      const Vector own = a.coupling * x[i];
      for (std::size_t k = 0; k < a.rows.size(); ++k) {
        const auto kk = static_cast<Eigen::Index>(k);
        rows_r(kk) = r(a.rows[k]) - own(kk);
        rows_a(kk) = alpha(a.rows[k]);
      }
      const Vector lin = a.local.linear + a.coupling.transpose() * (rows_a + rho_ * rows_r);
      const QpSolution s = solvers_[i]->solve(lin);
      status[i] = s.status;
      xhat[i] = s.x;
    });
    for (std::size_t i = 0; i < n; ++i) {
      if (status[i] == QpStatus::infeasible || status[i] == QpStatus::unbounded) {
        res.status = AdalStatus::infeasible;
        res.infeasible_agent = static_cast<int>(i);
        res.x = xhat;
        res.iterations = q;
        return res;
      }
    }

    const Vector rhat = coupling_residual(xhat);
    const double rhat_norm = residual_norm(rhat);
    if (config_.record_history) res.history.push_back(rhat_norm);
    if (rhat_norm < best_norm) {
      best_norm = rhat_norm;
      best = xhat;
      best_alpha = res.multipliers;
    }
    res.iterations = q;
    double moved = 0.0;
    if (config_.eps_step > 0.0 && rhat_norm <= config_.eps_in) {
      for (std::size_t i = 0; i < n; ++i) {
        moved = std::max(moved, residual_norm(problem_.agents[i].coupling * (xhat[i] - x[i])));
      }
    }
    if (rhat_norm <= config_.eps_in && (config_.eps_step <= 0.0 || moved <= config_.eps_step)) {
      res.x = xhat;
      res.residual = rhat;
      res.residual_norm = rhat_norm;
      res.status = AdalStatus::converged;
      res.multipliers = alpha;
      if (rho_ != rho0) {
        rho_ = rho0;
        build_solvers();
      }
      return res;
    }

    std::vector<Vector> prev = x;
    for (std::size_t i = 0; i < n; ++i) x[i] += config_.tau * (xhat[i] - x[i]);
    r = coupling_residual(x);
    const double step = config_.step == MultiplierStep::rho ? rho_ : rho_ * config_.tau;
    res.multipliers += step * r;

    if (config_.residual_balancing && q % 10 == 0) {
      double dual = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        dual = std::max(dual, residual_norm(problem_.agents[i].coupling * (x[i] - prev[i])));
      }
      dual *= rho_;
      const double primal = residual_norm(r);
      if (primal > 10.0 * dual) {
        rho_ *= 2.0;
        build_solvers();
      } else if (dual > 10.0 * primal) {
        rho_ *= 0.5;
        build_solvers();
      }
    }
  }

  if (rho_ != rho0) {
    rho_ = rho0;
    build_solvers();
  }
  res.x = best;
  res.multipliers = best_alpha;
  res.residual = coupling_residual(best);
  res.residual_norm = best_norm;
  res.status = AdalStatus::max_iter;
  return res;
}

}  // namespace hvac
