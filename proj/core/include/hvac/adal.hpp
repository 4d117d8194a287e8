#pragma once

// Distributed augmented Lagrangian coordination over agents that share linear
// coupling constraints   sum_i A_i x_i = b.
//
// Each agent owns a local convex QP (objective f_i, constraint set X_i). One
// iteration solves every agent's augmented subproblem against the others'
// current iterate, damps the primal step with weight tau and moves the
// multipliers along the coupling residual.

#include "hvac/model.hpp"
#include "hvac/qp.hpp"

#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace hvac {

enum class MultiplierStep {
  rho,     // alpha += rho * r
  rho_tau, // alpha += rho * tau * r
};

struct AdalConfig {
  double rho = 1.0;
  double eps_in = 1e-3;
  // Also require the local solutions to have stopped moving (coupling space,
  // max-norm). A warm start already in consensus otherwise passes the residual
  // test before the new linear terms have been priced in. <= 0 disables.
  double eps_step = 5e-3;
  double eps_out = 1.0;
  int max_inner = 500;
  int max_outer = 20;
  double tau = 0.5;
  MultiplierStep step = MultiplierStep::rho_tau;
  bool residual_balancing = false;
  bool record_history = false;

  void validate() const;
};

/// One agent: local problem plus its columns of the coupling matrix, stored
/// densely over the coupling rows the agent touches.
struct AdalAgent {
  QpProblem local;
  std::vector<int> rows;
  Matrix coupling;  // rows.size() x local.dimension()
  Vector start;     // initial iterate; empty means "solve once without coupling terms"
};

struct AdalProblem {
  std::vector<AdalAgent> agents;
  Vector rhs;
};

enum class AdalStatus { converged, max_iter, infeasible };

struct AdalResult {
  std::vector<Vector> x;  // last local minimizers (each inside its X_i)
  Vector multipliers;
  Vector residual;
  double residual_norm = 0.0;
  int iterations = 0;
  AdalStatus status = AdalStatus::max_iter;
  int infeasible_agent = -1;
  std::vector<double> history;

  bool converged() const { return status == AdalStatus::converged; }
};

double residual_norm(const Vector& r);

/// Holds one QP solver per agent so repeated runs reuse factorizations and a
/// changed local linear term does not rebuild anything.
class AdalSolver {
 public:
  AdalSolver(AdalProblem problem, AdalConfig config);

  const AdalProblem& problem() const { return problem_; }
  const AdalConfig& config() const { return config_; }
  void set_local_linear(std::size_t agent, const Vector& linear);
  /// Warm start from x and multipliers when given (sizes must match).
  AdalResult run(const std::vector<Vector>* x0 = nullptr, const Vector* alpha0 = nullptr);
  Vector coupling_residual(const std::vector<Vector>& x) const;

 private:
  void build_solvers();

  AdalProblem problem_;
  AdalConfig config_;
  double rho_ = 1.0;
  std::vector<std::unique_ptr<QpSolver>> solvers_;
};

}  // namespace hvac
