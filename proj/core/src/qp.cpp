#include "hvac/qp.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace hvac {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr std::size_t kCacheSize = 16;

bool all_finite(const Matrix& m) { return m.size() == 0 || m.allFinite(); }

double inf_norm(const Vector& v) { return v.size() ? v.cwiseAbs().maxCoeff() : 0.0; }

struct IpmResult {
  Vector x, y, z, s;
  bool converged = false;
  int iterations = 0;
  double primal_residual = kInf;
};

// Mehrotra predictor-corrector on  min 1/2 x'Hx + c'x,  Ax = b,  Gx + s = h,  s >= 0.
IpmResult interior_point(const Matrix& H, const Vector& c, const Matrix& A, const Vector& b, const Matrix& G,
                         const Vector& h, double tol, int max_iter) {
  const Eigen::Index n = c.size();
  const Eigen::Index me = b.size();
  const Eigen::Index mi = h.size();
  const double reg = 1e-10 * (1.0 + (H.size() ? H.cwiseAbs().maxCoeff() : 0.0));
  IpmResult r;

  auto kkt = [&](const Vector& w) {
    Matrix K = Matrix::Zero(n + me, n + me);
    K.topLeftCorner(n, n) = H;
    if (mi > 0) K.topLeftCorner(n, n).noalias() += G.transpose() * w.asDiagonal() * G;
    K.topLeftCorner(n, n).diagonal().array() += reg;
    if (me > 0) {
      K.topRightCorner(n, me) = A.transpose();
      K.bottomLeftCorner(me, n) = A;
      K.bottomRightCorner(me, me).diagonal().array() = -reg;
    }
    return Eigen::PartialPivLU<Matrix>(K);
  };

  {
    Vector w = Vector::Ones(mi);
    auto lu = kkt(w);
    Vector rhs(n + me);
    rhs.head(n) = -c;
    if (mi > 0) rhs.head(n) += G.transpose() * h;
    rhs.tail(me) = b;
    Vector sol = lu.solve(rhs);
    r.x = sol.head(n);
    r.y = sol.tail(me);
  }
  r.s = mi > 0 ? Vector(h - G * r.x) : Vector(0);
  if (mi > 0) {
    const double smin = r.s.minCoeff();
    if (smin < 1.0) r.s.array() += 1.0 - smin;
  }
  r.z = Vector::Ones(mi);

  const double bscale = 1.0 + std::max(inf_norm(b), inf_norm(h));
  const double cscale = 1.0 + inf_norm(c);

  for (int it = 0; it < max_iter; ++it) {
    r.iterations = it;
    Vector rd = H * r.x + c;
    if (me > 0) rd.noalias() += A.transpose() * r.y;
    if (mi > 0) rd.noalias() += G.transpose() * r.z;
    const Vector rp = me > 0 ? Vector(A * r.x - b) : Vector(0);
    const Vector rg = mi > 0 ? Vector(G * r.x + r.s - h) : Vector(0);
    const double mu = mi > 0 ? r.s.dot(r.z) / static_cast<double>(mi) : 0.0;
    r.primal_residual = std::max(inf_norm(rp), inf_norm(rg));
    if (r.primal_residual <= tol * bscale && inf_norm(rd) <= tol * cscale && mu <= tol * 1e-2) {
      r.converged = true;
      return r;
    }
    if (mi == 0 && it > 0) {
      r.converged = r.primal_residual <= 1e-6 * bscale;
      return r;
    }

    const Vector w = mi > 0 ? Vector(r.z.cwiseQuotient(r.s)) : Vector(0);
    auto lu = kkt(w);

    auto direction = [&](const Vector& rsz, Vector& dx, Vector& dy, Vector& dz, Vector& ds) {
      Vector rhs(n + me);
      const Vector t = mi > 0 ? Vector((r.z.cwiseProduct(rg) - rsz).cwiseQuotient(r.s)) : Vector(0);
      rhs.head(n) = -rd;
      if (mi > 0) rhs.head(n).noalias() -= G.transpose() * t;
      rhs.tail(me) = -rp;
      Vector sol = lu.solve(rhs);
      for (int refine = 0; refine < 2; ++refine) {
        Vector res = rhs;
        res.head(n).noalias() -= H * sol.head(n);
        if (mi > 0) res.head(n).noalias() -= G.transpose() * (w.asDiagonal() * (G * sol.head(n)));
        if (me > 0) {
          res.head(n).noalias() -= A.transpose() * sol.tail(me);
          res.tail(me).noalias() -= A * sol.head(n);
        }
        sol += lu.solve(res);
      }
      dx = sol.head(n);
      dy = sol.tail(me);
      if (mi > 0) {
        const Vector gdx = G * dx;
        dz = w.cwiseProduct(gdx) + t;
        ds = -rg - gdx;
      } else {
        dz.resize(0);
        ds.resize(0);
      }
    };
    auto max_step = [&](const Vector& v, const Vector& dv) {
      double a = 1.0;
      for (Eigen::Index i = 0; i < v.size(); ++i) {
        if (dv(i) < 0.0) a = std::min(a, -v(i) / dv(i));
      }
      return a;
    };

    Vector dx, dy, dz, ds;
    const Vector rsz_aff = r.s.cwiseProduct(r.z);
    direction(rsz_aff, dx, dy, dz, ds);
    if (mi == 0) {
      r.x += dx;
      r.y += dy;
      continue;
    }
    const double a_aff = std::min(max_step(r.s, ds), max_step(r.z, dz));
    const double mu_aff = (r.s + a_aff * ds).dot(r.z + a_aff * dz) / static_cast<double>(mi);
    const double sigma = std::pow(std::max(0.0, mu_aff) / mu, 3.0);
    const Vector rsz = rsz_aff + ds.cwiseProduct(dz) - Vector::Constant(mi, sigma * mu);
    direction(rsz, dx, dy, dz, ds);
    const double a = std::min(1.0, 0.99 * std::min(max_step(r.s, ds), max_step(r.z, dz)));
    const Vector nx = r.x + a * dx;
    if (!nx.allFinite() || !dz.allFinite() || !ds.allFinite()) break;
    r.x = nx;
    r.y += a * dy;
    r.z += a * dz;
    r.s += a * ds;
  }
  return r;
}

// Smallest uniform relaxation t with |Ax - b| <= t, Gx <= h + t; strictly positive means the set is empty.
double phase_one_violation(const Matrix& A, const Vector& b, const Matrix& G, const Vector& h, double tol) {
  const Eigen::Index n = A.cols() > 0 ? A.cols() : G.cols();
  const Eigen::Index me = b.size();
  const Eigen::Index mi = h.size();
  const Eigen::Index nv = n + 1;
  Matrix H = Matrix::Zero(nv, nv);
  H.diagonal().array() = 1e-8;
  Vector c = Vector::Zero(nv);
  c(n) = 1.0;
  Matrix Gi = Matrix::Zero(mi + 2 * me + 1, nv);
  Vector hi = Vector::Zero(mi + 2 * me + 1);
  if (mi > 0) {
    Gi.topLeftCorner(mi, n) = G;
    Gi.block(0, n, mi, 1).setConstant(-1.0);
    hi.head(mi) = h;
  }
  if (me > 0) {
    Gi.block(mi, 0, me, n) = A;
    Gi.block(mi + me, 0, me, n) = -A;
    Gi.block(mi, n, 2 * me, 1).setConstant(-1.0);
    hi.segment(mi, me) = b;
    hi.segment(mi + me, me) = -b;
  }
  Gi(mi + 2 * me, n) = -1.0;
  const IpmResult r = interior_point(H, c, Matrix(0, nv), Vector(0), Gi, hi, tol, 200);
  if (!r.x.allFinite()) return kInf;
  return r.x(n);
}

}  // namespace

const char* to_string(QpStatus s) {
  switch (s) {
    case QpStatus::optimal: return "optimal";
    case QpStatus::infeasible: return "infeasible";
    case QpStatus::max_iter: return "max_iter";
    case QpStatus::unbounded: return "unbounded";
  }
  return "unknown";
}

QpProblem QpProblem::unconstrained(Eigen::Index n) {
  QpProblem p;
  p.quadratic = Matrix::Zero(n, n);
  p.linear = Vector::Zero(n);
  p.eq_a.resize(0, n);
  p.eq_b.resize(0);
  p.ineq_a.resize(0, n);
  p.ineq_b.resize(0);
  p.lower = Vector::Constant(n, -kInf);
  p.upper = Vector::Constant(n, kInf);
  return p;
}

void QpProblem::validate() const {
  const Eigen::Index n = linear.size();
  if (quadratic.rows() != n || quadratic.cols() != n) throw InputError("qp: quadratic must be n x n");
  if (eq_a.rows() != eq_b.size() || (eq_a.rows() > 0 && eq_a.cols() != n)) {
    throw InputError("qp: equality constraint shape mismatch");
  }
  if (ineq_a.rows() != ineq_b.size() || (ineq_a.rows() > 0 && ineq_a.cols() != n)) {
    throw InputError("qp: inequality constraint shape mismatch");
  }
  if (lower.size() != n || upper.size() != n) throw InputError("qp: bound vectors must have length n");
  if (!all_finite(quadratic) || !all_finite(linear) || !all_finite(eq_a) || !all_finite(eq_b) ||
      !all_finite(ineq_a) || !all_finite(ineq_b)) {
    throw InputError("qp: NaN or Inf in problem data");
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    if (std::isnan(lower(i)) || std::isnan(upper(i)) || lower(i) == kInf || upper(i) == -kInf) {
      throw InputError("qp: invalid bound");
    }
    if (lower(i) > upper(i)) throw InputError("qp: lower bound exceeds upper bound");
  }
}

double QpProblem::violation(const Vector& x) const {
  double v = 0.0;
  if (eq_b.size()) v = std::max(v, inf_norm(eq_a * x - eq_b));
  if (ineq_b.size()) v = std::max(v, (ineq_a * x - ineq_b).maxCoeff());
  for (Eigen::Index i = 0; i < x.size(); ++i) v = std::max({v, lower(i) - x(i), x(i) - upper(i)});
  return v;
}

Vector project_box(const Vector& x, const Vector& lower, const Vector& upper) {
  return x.cwiseMax(lower).cwiseMin(upper);
}

QpSolver::QpSolver(QpProblem problem, QpOptions options) : problem_(std::move(problem)), options_(options) {
  problem_.validate();
  problem_.quadratic = 0.5 * (problem_.quadratic + problem_.quadratic.transpose()).eval();
  const Eigen::Index n = problem_.dimension();

  // Fixed variables become equalities, finite bounds become unit inequality rows.
  std::vector<Eigen::Index> fixed, up, lo;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (problem_.lower(i) == problem_.upper(i)) {
      fixed.push_back(i);
      continue;
    }
    if (std::isfinite(problem_.upper(i))) up.push_back(i);
    if (std::isfinite(problem_.lower(i))) lo.push_back(i);
  }
  const Eigen::Index me0 = problem_.eq_b.size();
  n_eq_ = me0 + static_cast<Eigen::Index>(fixed.size());
  const Eigen::Index mi0 = problem_.ineq_b.size();
  const auto mi = mi0 + static_cast<Eigen::Index>(up.size() + lo.size());
  ineq_.setZero(n_eq_ + mi, n);
  rhs_.setZero(n_eq_ + mi);
  if (me0 > 0) {
    ineq_.topRows(me0) = problem_.eq_a;
    rhs_.head(me0) = problem_.eq_b;
  }
  Eigen::Index row = me0;
  for (auto i : fixed) {
    ineq_(row, i) = 1.0;
    rhs_(row++) = problem_.lower(i);
  }
  if (mi0 > 0) {
    ineq_.middleRows(row, mi0) = problem_.ineq_a;
    rhs_.segment(row, mi0) = problem_.ineq_b;
    row += mi0;
  }
  for (auto i : up) {
    ineq_(row, i) = 1.0;
    rhs_(row++) = problem_.upper(i);
  }
  for (auto i : lo) {
    ineq_(row, i) = -1.0;
    rhs_(row++) = -problem_.lower(i);
  }
}

void QpSolver::reset() {
  warm_ = false;
  last_working_.clear();
}

Matrix QpSolver::working_rows(const std::vector<int>& working) const {
  const Eigen::Index n = problem_.dimension();
  Matrix B(n_eq_ + static_cast<Eigen::Index>(working.size()), n);
  if (n_eq_ > 0) B.topRows(n_eq_) = ineq_.topRows(n_eq_);
  for (std::size_t k = 0; k < working.size(); ++k) {
    B.row(n_eq_ + static_cast<Eigen::Index>(k)) = ineq_.row(working[k]);
  }
  return B;
}

const QpSolver::Factor& QpSolver::factor(const std::vector<int>& working) {
  for (auto it = cache_.begin(); it != cache_.end(); ++it) {
    if (it->key == working) {
      cache_.splice(cache_.begin(), cache_, it);
      return cache_.front();
    }
  }
  const Eigen::Index n = problem_.dimension();
  Factor f;
  f.key = working;
  Matrix Z;
  const Matrix B = working_rows(working);
  if (B.rows() == 0) {
    Z = Matrix::Identity(n, n);
    f.multiplier.resize(0, n);
  } else {
    Eigen::ColPivHouseholderQR<Matrix> qr(B.transpose());
    qr.setThreshold(1e-11);
    const Eigen::Index rank = qr.rank();
    const Matrix Q = qr.householderQ();
    Z = Q.rightCols(n - rank);
    f.multiplier = qr.solve(Matrix::Identity(n, n));
  }
  if (Z.cols() == 0) {
    f.step = Matrix::Zero(n, n);
    f.flat.resize(n, 0);
  } else {
    const Matrix M = Z.transpose() * problem_.quadratic * Z;
    Eigen::SelfAdjointEigenSolver<Matrix> es(M);
    const Vector& ev = es.eigenvalues();
    const double cut = 1e-11 * std::max(1.0, ev.cwiseAbs().maxCoeff());
    std::vector<Eigen::Index> pos, zero;
    for (Eigen::Index k = 0; k < ev.size(); ++k) (ev(k) > cut ? pos : zero).push_back(k);
    Matrix Vp(Z.cols(), static_cast<Eigen::Index>(pos.size()));
    Vector inv(static_cast<Eigen::Index>(pos.size()));
    for (std::size_t k = 0; k < pos.size(); ++k) {
      Vp.col(static_cast<Eigen::Index>(k)) = es.eigenvectors().col(pos[k]);
      inv(static_cast<Eigen::Index>(k)) = 1.0 / ev(pos[k]);
    }
    const Matrix ZV = Z * Vp;
    f.step = ZV * inv.asDiagonal() * ZV.transpose();
    f.flat.resize(n, static_cast<Eigen::Index>(zero.size()));
    for (std::size_t k = 0; k < zero.size(); ++k) {
      f.flat.col(static_cast<Eigen::Index>(k)) = Z * es.eigenvectors().col(zero[k]);
    }
  }
  cache_.push_front(std::move(f));
  if (cache_.size() > kCacheSize) cache_.pop_back();
  return cache_.front();
}

QpSolution QpSolver::solve() { return solve(problem_.linear); }

QpSolution QpSolver::solve(const Vector& linear) {
  if (linear.size() != problem_.dimension()) throw InputError("qp: linear term has wrong length");
  if (!linear.allFinite()) throw InputError("qp: NaN or Inf in linear term");
  problem_.linear = linear;
  if (!warm_) return cold_solve();
  QpSolution s = active_set(last_x_, last_working_, 0);
  if (s.status == QpStatus::max_iter) {
    reset();
    return cold_solve();
  }
  return s;
}

QpSolution QpSolver::cold_solve() {
  ++cold_starts_;
  const Eigen::Index n = problem_.dimension();
  const Matrix A = ineq_.topRows(n_eq_);
  const Vector b = rhs_.head(n_eq_);
  const Eigen::Index mi = rhs_.size() - n_eq_;
  const Matrix G = ineq_.bottomRows(mi);
  const Vector h = rhs_.tail(mi);

  const double ipm_tol = std::min(1e-9, options_.tol * 1e-1);
  IpmResult ipm = interior_point(problem_.quadratic, problem_.linear, A, b, G, h, ipm_tol, options_.ipm_max_iter);
  const double bscale = 1.0 + std::max(inf_norm(b), inf_norm(h));
  // The interior iterate keeps s > 0, so a small primal residual already certifies feasibility.
  if (!ipm.converged && !(ipm.x.allFinite() && ipm.primal_residual <= 1e-9 * bscale)) {
    const double v = phase_one_violation(A, b, G, h, 1e-9);
    if (v > 1e-6 * bscale) return finish(ipm.x, QpStatus::infeasible, ipm.iterations, kInf);
    if (!ipm.x.allFinite()) return finish(Vector::Zero(n), QpStatus::unbounded, ipm.iterations, kInf);
  }

  // Crossover: pick an independent working set from the strongly active rows.
  std::vector<int> cand;
  for (Eigen::Index i = 0; i < mi; ++i) {
    if (ipm.z(i) > ipm.s(i)) cand.push_back(static_cast<int>(n_eq_ + i));
  }
  std::sort(cand.begin(), cand.end(),
            [&](int a, int b2) { return ipm.z(a - n_eq_) > ipm.z(b2 - n_eq_); });
  std::vector<int> working;
  Eigen::Index rank = 0;
  if (n_eq_ > 0) {
    Eigen::ColPivHouseholderQR<Matrix> qr(A.transpose());
    qr.setThreshold(1e-11);
    rank = qr.rank();
  }
  auto try_add = [&](int idx) {
    std::vector<int> trial = working;
    trial.push_back(idx);
    const Matrix B = working_rows(trial);
    Eigen::ColPivHouseholderQR<Matrix> qr(B.transpose());
    qr.setThreshold(1e-9);
    if (qr.rank() > rank) {
      working = std::move(trial);
      rank = qr.rank();
      return true;
    }
    return false;
  };
  for (int idx : cand) {
    if (rank >= n) break;
    try_add(idx);
  }

  const double feas_tol = 1e-9 * (1.0 + inf_norm(rhs_));
  Vector x = ipm.x;
  for (int attempt = 0; attempt <= 2 * static_cast<int>(n); ++attempt) {
    std::sort(working.begin(), working.end());
    const Factor& f = factor(working);
    Vector d(n_eq_ + static_cast<Eigen::Index>(working.size()));
    d.head(n_eq_) = b;
    for (std::size_t k = 0; k < working.size(); ++k) d(n_eq_ + static_cast<Eigen::Index>(k)) = rhs_(working[k]);
    const Matrix B = working_rows(working);
    x = ipm.x - f.multiplier.transpose() * (B * ipm.x - d);
    int worst = -1;
    double worst_v = feas_tol;
    for (Eigen::Index i = n_eq_; i < rhs_.size(); ++i) {
      const double v = ineq_.row(i).dot(x) - rhs_(i);
      if (v > worst_v && !std::binary_search(working.begin(), working.end(), static_cast<int>(i))) {
        worst_v = v;
        worst = static_cast<int>(i);
      }
    }
    if (worst < 0) {
      return active_set(x, working, ipm.iterations);
    }
    if (!try_add(worst)) break;
  }
  // Crossover failed to find a vertex-consistent point; report the interior solution.
  const double kkt = kkt_residual(ipm.x);
  return finish(ipm.x, kkt <= options_.tol ? QpStatus::optimal : QpStatus::max_iter, ipm.iterations, kkt);
}

QpSolution QpSolver::active_set(Vector x, std::vector<int> working, int used_iterations) {
  const Matrix& H = problem_.quadratic;
  const Vector& c = problem_.linear;
  int zero_steps = 0;

  {
    // Remove drift from the working constraints before iterating.
    const Factor& f = factor(working);
    if (f.multiplier.rows() > 0) {
      const Matrix B = working_rows(working);
      Vector d(B.rows());
      d.head(n_eq_) = rhs_.head(n_eq_);
      for (std::size_t k = 0; k < working.size(); ++k) d(n_eq_ + static_cast<Eigen::Index>(k)) = rhs_(working[k]);
      x -= f.multiplier.transpose() * (B * x - d);
    }
  }

  std::vector<char> in_w(static_cast<std::size_t>(rhs_.size()), 0);
  for (int w : working) in_w[static_cast<std::size_t>(w)] = 1;

  for (int it = used_iterations; it < options_.max_iter; ++it) {
    const Factor& f = factor(working);
    const Vector g = H * x + c;
    const double gscale = 1.0 + inf_norm(g);
    Vector p;
    bool flat = false;
    if (f.flat.cols() > 0) {
      const Vector q = f.flat.transpose() * g;
      if (inf_norm(q) > 1e-10 * gscale) {
        p = -f.flat * q;
        flat = true;
      }
    }
    if (!flat) p = -f.step * g;

    if (!flat && inf_norm(p) <= 1e-12 * (1.0 + inf_norm(x))) {
      const Vector lam = -f.multiplier * g;
      int drop = -1;
      double most = -1e-9 * gscale;
      for (std::size_t k = 0; k < working.size(); ++k) {
        const double l = lam(n_eq_ + static_cast<Eigen::Index>(k));
        if (zero_steps > 8 ? l < -1e-9 * gscale : l < most) {
          most = l;
          drop = static_cast<int>(k);
          if (zero_steps > 8) break;  // Bland-style: first negative index
        }
      }
      if (drop < 0) {
        warm_ = true;
        last_x_ = x;
        last_working_ = working;
        double sign = 0.0;
        for (std::size_t k = 0; k < working.size(); ++k) {
          sign = std::max(sign, -lam(n_eq_ + static_cast<Eigen::Index>(k)));
        }
        const Matrix B = working_rows(working);
        const double stat = B.rows() ? inf_norm(g + B.transpose() * lam) : inf_norm(g);
        const double prim = std::max(0.0, feasibility_gap(x));
        return finish(x, QpStatus::optimal, it + 1, std::max({stat / gscale, sign / gscale, prim}));
      }
      in_w[static_cast<std::size_t>(working[static_cast<std::size_t>(drop)])] = 0;
      working.erase(working.begin() + drop);
      continue;
    }

    double alpha = flat ? kInf : 1.0;
    int block = -1;
    const double pscale = inf_norm(p);
    for (Eigen::Index i = n_eq_; i < rhs_.size(); ++i) {
      if (in_w[static_cast<std::size_t>(i)]) continue;
      const double a = ineq_.row(i).dot(p);
      if (a <= 1e-13 * pscale * (1.0 + ineq_.row(i).cwiseAbs().maxCoeff())) continue;
      const double slack = std::max(0.0, rhs_(i) - ineq_.row(i).dot(x));
      const double t = slack / a;
      if (t < alpha) {
        alpha = t;
        block = static_cast<int>(i);
      }
    }
    if (block < 0 && flat) return finish(x, QpStatus::unbounded, it + 1, kInf);
    x += alpha * p;
    zero_steps = alpha * pscale <= 1e-14 ? zero_steps + 1 : 0;
    if (block >= 0) {
      working.insert(std::upper_bound(working.begin(), working.end(), block), block);
      in_w[static_cast<std::size_t>(block)] = 1;
    }
  }
  warm_ = true;
  last_x_ = x;
  last_working_ = working;
  return finish(x, QpStatus::max_iter, options_.max_iter, kkt_residual(x));
}

double QpSolver::feasibility_gap(const Vector& x) const {
  if (rhs_.size() == 0) return 0.0;
  const Vector r = ineq_ * x - rhs_;
  double v = n_eq_ > 0 ? inf_norm(r.head(n_eq_)) : 0.0;
  if (r.size() > n_eq_) v = std::max(v, r.tail(r.size() - n_eq_).maxCoeff());
  return v;
}

double QpSolver::kkt_residual(const Vector& x) const {
  // Least-squares multipliers on the nearly active rows; stationarity, sign and feasibility.
  const Vector g = problem_.quadratic * x + problem_.linear;
  const double feas_tol = 1e-7 * (1.0 + inf_norm(rhs_));
  std::vector<int> act;
  for (Eigen::Index i = n_eq_; i < rhs_.size(); ++i) {
    if (ineq_.row(i).dot(x) - rhs_(i) >= -feas_tol) act.push_back(static_cast<int>(i));
  }
  const Matrix B = working_rows(act);
  const double gscale = 1.0 + inf_norm(g);
  double stat = inf_norm(g);
  double sign = 0.0;
  if (B.rows() > 0) {
    Eigen::ColPivHouseholderQR<Matrix> qr(B.transpose());
    const Vector lam = qr.solve(-g);
    stat = inf_norm(g + B.transpose() * lam);
    for (std::size_t k = 0; k < act.size(); ++k) sign = std::max(sign, -lam(n_eq_ + static_cast<Eigen::Index>(k)));
  }
  return std::max({stat / gscale, sign / gscale, std::max(0.0, feasibility_gap(x))});
}

QpSolution QpSolver::finish(const Vector& x, QpStatus status, int iterations, double residual) const {
  QpSolution s;
  s.x = x;
  s.status = status;
  s.iterations = iterations;
  s.objective = problem_.objective(x);
  s.kkt_residual = residual;
  return s;
}

QpSolution solve_qp(const QpProblem& problem, const QpOptions& options) {
  QpSolver solver(problem, options);
  return solver.solve();
}

}  // namespace hvac
