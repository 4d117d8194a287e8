#pragma once

// Dense convex QP:   min 1/2 x'Hx + c'x   s.t.  Ae x = be,  An x <= bn,  lower <= x <= upper.
//
// Cold solves run a Mehrotra interior point method and then polish with a
// primal active-set method. Later solves on the same constraint set reuse the
// previous solution and working set, which is what makes repeated solves with
// a changing linear term cheap.

#include "hvac/model.hpp"

#include <cstddef>
#include <limits>
#include <list>
#include <vector>

namespace hvac {

struct QpProblem {
  Matrix quadratic;
  Vector linear;
  Matrix eq_a;
  Vector eq_b;
  Matrix ineq_a;
  Vector ineq_b;
  Vector lower;
  Vector upper;

  /// Empty problem of dimension n with infinite bounds and no constraints.
  static QpProblem unconstrained(Eigen::Index n);
  Eigen::Index dimension() const { return linear.size(); }
  double objective(const Vector& x) const { return 0.5 * x.dot(quadratic * x) + linear.dot(x); }
  /// Throws InputError on shape errors, NaN/Inf data or lower > upper.
  void validate() const;
  /// Largest constraint violation of x.
  double violation(const Vector& x) const;
};

enum class QpStatus { optimal, infeasible, max_iter, unbounded };

const char* to_string(QpStatus s);

struct QpSolution {
  Vector x;
  double objective = 0.0;
  QpStatus status = QpStatus::max_iter;
  // Max of scaled stationarity, multiplier-sign and primal violations.
  double kkt_residual = std::numeric_limits<double>::infinity();
  int iterations = 0;

  bool ok() const { return status == QpStatus::optimal; }
};

struct QpOptions {
  double tol = 1e-8;
  int max_iter = 5000;
  int ipm_max_iter = 120;
};

Vector project_box(const Vector& x, const Vector& lower, const Vector& upper);

/// Solver bound to one Hessian and constraint set. Not thread-safe; use one per agent.
class QpSolver {
 public:
  explicit QpSolver(QpProblem problem, QpOptions options = {});

  const QpProblem& problem() const { return problem_; }
  QpSolution solve();
  QpSolution solve(const Vector& linear);
  /// Forget the warm start; the next solve is a cold start.
  void reset();
  int cold_starts() const { return cold_starts_; }

 private:
  struct Factor {
    std::vector<int> key;
    Matrix step;       // Z M^+ Z'
    Matrix flat;       // Z V0, zero-curvature directions
    Matrix multiplier; // pinv(A_W')
  };

  QpSolution cold_solve();
  QpSolution active_set(Vector x, std::vector<int> working, int used_iterations);
  const Factor& factor(const std::vector<int>& working);
  Matrix working_rows(const std::vector<int>& working) const;
  QpSolution finish(const Vector& x, QpStatus status, int iterations, double residual) const;
  double kkt_residual(const Vector& x) const;
  double feasibility_gap(const Vector& x) const;

  QpProblem problem_;
  QpOptions options_;
  Matrix ineq_;
  Vector rhs_;
  Eigen::Index n_eq_ = 0;
  std::list<Factor> cache_;
  bool warm_ = false;
  Vector last_x_;
  std::vector<int> last_working_;
  int cold_starts_ = 0;
};

QpSolution solve_qp(const QpProblem& problem, const QpOptions& options = {});

}  // namespace hvac
