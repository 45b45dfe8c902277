// Primal-dual interior-point method for LP + SOCP on the homogeneous
// self-dual embedding
//
//   A'y + G'z + c tau = 0,   A x = b tau,   G x + s = h tau,
//   kappa + c'x + b'y + h'z = 0,   s, z in K,  tau, kappa >= 0,
//
// with Nesterov-Todd scaling and a Mehrotra predictor-corrector. The reduced
// KKT system is quasi-definite after static regularization, so a sparse
// LDL' without pivoting is used, followed by iterative refinement against the
// unregularized matrix.

#include <cstdio>
#include <cstdlib>
#include "optrec/conic.hpp"

#include <Eigen/OrderingMethods>
#include <Eigen/SparseCholesky>

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace optrec {
namespace detail {

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;
using SpMat = Eigen::SparseMatrix<double>;

constexpr double kStaticReg = 1e-9;
constexpr double kStepFraction = 0.99;

// Layout of the inequality block: `lp` nonnegative rows first, then the
// second-order cones back to back.
struct Cones {
  int lp = 0;
  std::vector<int> soc_dims;
  std::vector<int> soc_starts;

  int size() const {
    int m = lp;
    for (int d : soc_dims) m += d;
    return m;
  }
  int degree() const { return lp + static_cast<int>(soc_dims.size()); }
};

struct SocScaling {
  double eta = 1.0;
  VectorXd wbar;
  MatrixXd w;
  MatrixXd w_inv;
};

struct Scaling {
  VectorXd lp_w;  // diagonal of W on the LP block
  std::vector<SocScaling> soc;
};

class ConeOps {
 public:
  explicit ConeOps(const Cones& cones) : c_(cones) {}

  VectorXd identity() const {
    VectorXd e = VectorXd::Zero(c_.size());
    e.head(c_.lp).setOnes();
    for (int start : c_.soc_starts) e(start) = 1.0;
    return e;
  }

  // Smallest alpha with v + alpha e on the cone boundary (negative when v is
  // interior).
  double boundary_shift(const VectorXd& v) const {
    double alpha = -std::numeric_limits<double>::infinity();
    for (int i = 0; i < c_.lp; ++i) alpha = std::max(alpha, -v(i));
    for (std::size_t k = 0; k < c_.soc_dims.size(); ++k) {
      const int st = c_.soc_starts[k];
      const int d = c_.soc_dims[k];
      const double tail = d > 1 ? v.segment(st + 1, d - 1).norm() : 0.0;
      alpha = std::max(alpha, tail - v(st));
    }
    return alpha;
  }

  VectorXd shift_into_interior(VectorXd v) const {
    if (c_.size() == 0) return v;
    const double alpha = boundary_shift(v);
    if (alpha >= -1e-8) v += (1.0 + alpha) * identity();
    return v;
  }

  VectorXd product(const VectorXd& u, const VectorXd& v) const {
    VectorXd r(u.size());
    r.head(c_.lp) = u.head(c_.lp).cwiseProduct(v.head(c_.lp));
    for (std::size_t k = 0; k < c_.soc_dims.size(); ++k) {
      const int st = c_.soc_starts[k];
      const int d = c_.soc_dims[k];
      r(st) = u.segment(st, d).dot(v.segment(st, d));
      if (d > 1) r.segment(st + 1, d - 1) = u(st) * v.segment(st + 1, d - 1) + v(st) * u.segment(st + 1, d - 1);
    }
    return r;
  }

  // Solves lambda o u = d for u.
  VectorXd divide(const VectorXd& lambda, const VectorXd& d) const {
    VectorXd u(d.size());
    u.head(c_.lp) = d.head(c_.lp).cwiseQuotient(lambda.head(c_.lp));
    for (std::size_t k = 0; k < c_.soc_dims.size(); ++k) {
      const int st = c_.soc_starts[k];
      const int n = c_.soc_dims[k];
      const double l0 = lambda(st);
      if (n == 1) {
        u(st) = d(st) / l0;
        continue;
      }
      const auto l1 = lambda.segment(st + 1, n - 1);
      const auto d1 = d.segment(st + 1, n - 1);
      const double det = l0 * l0 - l1.squaredNorm();
      const double u0 = (l0 * d(st) - l1.dot(d1)) / det;
      u(st) = u0;
      u.segment(st + 1, n - 1) = (d1 - u0 * l1) / l0;
    }
    return u;
  }

  Scaling scaling(const VectorXd& s, const VectorXd& z) const {
    Scaling w;
    w.lp_w = s.head(c_.lp).cwiseQuotient(z.head(c_.lp)).cwiseSqrt();
    for (std::size_t k = 0; k < c_.soc_dims.size(); ++k) {
      const int st = c_.soc_starts[k];
      const int n = c_.soc_dims[k];
      SocScaling sc;
      if (n == 1) {
        sc.eta = std::sqrt(s(st) / z(st));
        sc.wbar = VectorXd::Ones(1);
        sc.w = MatrixXd::Constant(1, 1, sc.eta);
        sc.w_inv = MatrixXd::Constant(1, 1, 1.0 / sc.eta);
        w.soc.push_back(std::move(sc));
        continue;
      }
      const VectorXd sv = s.segment(st, n);
      const VectorXd zv = z.segment(st, n);
      const double sres = sv(0) * sv(0) - sv.tail(n - 1).squaredNorm();
      const double zres = zv(0) * zv(0) - zv.tail(n - 1).squaredNorm();
      const double snorm = std::sqrt(std::max(sres, 1e-300));
      const double znorm = std::sqrt(std::max(zres, 1e-300));
      const VectorXd sb = sv / snorm;
      const VectorXd zb = zv / znorm;
      const double gamma = std::sqrt(std::max((1.0 + sb.dot(zb)) / 2.0, 1e-300));
      VectorXd wbar(n);
      wbar(0) = (sb(0) + zb(0)) / (2.0 * gamma);
      wbar.tail(n - 1) = (sb.tail(n - 1) - zb.tail(n - 1)) / (2.0 * gamma);
      sc.eta = std::sqrt(snorm / znorm);
      const VectorXd w1 = wbar.tail(n - 1);
      MatrixXd core = MatrixXd::Identity(n - 1, n - 1) + w1 * w1.transpose() / (1.0 + wbar(0));
      sc.w.resize(n, n);
      sc.w(0, 0) = wbar(0);
      sc.w.block(0, 1, 1, n - 1) = w1.transpose();
      sc.w.block(1, 0, n - 1, 1) = w1;
      sc.w.block(1, 1, n - 1, n - 1) = core;
      sc.w_inv = sc.w;
      sc.w_inv.block(0, 1, 1, n - 1) *= -1.0;
      sc.w_inv.block(1, 0, n - 1, 1) *= -1.0;
      sc.w *= sc.eta;
      sc.w_inv /= sc.eta;
      sc.wbar = std::move(wbar);
      w.soc.push_back(std::move(sc));
    }
    return w;
  }

  VectorXd apply_w(const Scaling& w, const VectorXd& v) const {
    VectorXd r(v.size());
    r.head(c_.lp) = w.lp_w.cwiseProduct(v.head(c_.lp));
    for (std::size_t k = 0; k < c_.soc_dims.size(); ++k) {
      const int st = c_.soc_starts[k];
      const int n = c_.soc_dims[k];
      r.segment(st, n) = w.soc[k].w * v.segment(st, n);
    }
    return r;
  }

  VectorXd apply_w_inv(const Scaling& w, const VectorXd& v) const {
    VectorXd r(v.size());
    r.head(c_.lp) = v.head(c_.lp).cwiseQuotient(w.lp_w);
    for (std::size_t k = 0; k < c_.soc_dims.size(); ++k) {
      const int st = c_.soc_starts[k];
      const int n = c_.soc_dims[k];
      r.segment(st, n) = w.soc[k].w_inv * v.segment(st, n);
    }
    return r;
  }

  VectorXd apply_w2(const Scaling& w, const VectorXd& v) const { return apply_w(w, apply_w(w, v)); }

  // Largest alpha with v + alpha dv in the cone (capped at `cap`).
  double max_step(const VectorXd& v, const VectorXd& dv, double cap) const {
    double alpha = cap;
    for (int i = 0; i < c_.lp; ++i) {
      if (dv(i) < 0.0) alpha = std::min(alpha, -v(i) / dv(i));
    }
    for (std::size_t k = 0; k < c_.soc_dims.size(); ++k) {
      const int st = c_.soc_starts[k];
      const int n = c_.soc_dims[k];
      alpha = std::min(alpha, soc_step(v.segment(st, n), dv.segment(st, n), cap));
    }
    return alpha;
  }

 private:
  // First positive root of (x0 + a d0)^2 - ||x1 + a d1||^2 = 0, or where
  // x0 + a d0 hits zero.
  static double soc_step(const VectorXd& x, const VectorXd& d, double cap) {
    const int n = static_cast<int>(x.size());
    double alpha = cap;
    if (d(0) < 0.0) alpha = std::min(alpha, -x(0) / d(0));
    if (n == 1) return alpha;
    const auto x1 = x.tail(n - 1);
    const auto d1 = d.tail(n - 1);
    const double qa = d(0) * d(0) - d1.squaredNorm();
    const double qb = 2.0 * (x(0) * d(0) - x1.dot(d1));
    const double qc = std::max(x(0) * x(0) - x1.squaredNorm(), 0.0);
    double root = std::numeric_limits<double>::infinity();
    if (std::abs(qa) < 1e-300) {
      if (qb < 0.0) root = -qc / qb;
    } else {
      const double disc = qb * qb - 4.0 * qa * qc;
      if (disc >= 0.0) {
        const double sq = std::sqrt(disc);
        const double q = -0.5 * (qb + (qb >= 0.0 ? sq : -sq));
        const double r1 = q / qa;
        const double r2 = q != 0.0 ? qc / q : std::numeric_limits<double>::infinity();
        for (double r : {r1, r2}) {
          if (r > 0.0) root = std::min(root, r);
        }
      }
    }
    return std::min(alpha, root);
  }

  const Cones& c_;
};

// Keeps a maximal independent subset of the equality rows. Returns false when
// the dropped rows are inconsistent with the kept ones.
struct EqualityPresolve {
  std::vector<int> kept;
  bool consistent = true;
  double inconsistency = 0.0;
  VectorXd certificate;  // y with A^T y = 0, b^T y < 0 when inconsistent
};

EqualityPresolve presolve_equalities(const MatrixXd& a, const VectorXd& b) {
  EqualityPresolve out;
  if (a.rows() == 0) return out;
  Eigen::ColPivHouseholderQR<MatrixXd> qr(a.transpose());
  const double scale = std::max(1.0, a.cwiseAbs().maxCoeff());
  qr.setThreshold(1e-12 * scale);
  const int rank = static_cast<int>(qr.rank());
  for (int k = 0; k < rank; ++k) out.kept.push_back(qr.colsPermutation().indices()(k));
  std::sort(out.kept.begin(), out.kept.end());
  if (rank < a.rows()) {
    Eigen::CompleteOrthogonalDecomposition<MatrixXd> cod(a);
    cod.setThreshold(1e-12 * scale);
    const VectorXd x = cod.solve(b);
    out.inconsistency = (a * x - b).norm() / (1.0 + b.norm());
    out.consistent = out.inconsistency <= 1e-9;
    // The least-squares residual is orthogonal to range(A), and b^T r = -|r|^2.
    if (!out.consistent) out.certificate = a * x - b;
  }
  return out;
}

class Ipm {
 public:
  Ipm(const ConicProgram& program, const SolverSettings& settings)
      : prog_(program), settings_(settings), ops_(cones_) {
    setup();
  }

  Solution run();

 private:
  void setup();
  void factorize(const Scaling* w);
  void factorize_once(const Scaling* w, double reg);
  VectorXd kkt_multiply(const VectorXd& v, const Scaling* w) const;
  VectorXd kkt_solve(const VectorXd& rhs, const Scaling* w) const;
  Solution finish(SolveStatus status, const VectorXd& x, const VectorXd& y, const VectorXd& z, double tau, int iters) const;

  const ConicProgram& prog_;
  SolverSettings settings_;
  Cones cones_;
  ConeOps ops_;

  int n_ = 0;
  int p_ = 0;
  int m_ = 0;
  SpMat a_;  // kept equality rows
  SpMat g_;  // inequality rows, reordered LP first
  VectorXd b_, h_, c_;
  std::vector<int> eq_rows_;    // original row of each kept equality
  std::vector<int> ineq_rows_;  // original row of each inequality row
  bool eq_consistent_ = true;
  VectorXd eq_certificate_;

  Eigen::SimplicialLDLT<SpMat, Eigen::Lower, Eigen::AMDOrdering<int>> ldlt_;
  bool analyzed_ = false;
  bool factor_ok_ = true;
  bool trace_ = std::getenv("OPTREC_IPM_TRACE") != nullptr;
  double kkt_max_ = 1.0;  // largest |entry| of the last KKT matrix
};

void Ipm::setup() {
  n_ = prog_.num_vars;
  c_ = prog_.objective;
  const SpMat full = prog_.matrix();

  std::vector<int> zero_rows;
  std::vector<int> lp_rows;
  std::vector<std::pair<int, int>> soc_segments;  // (start, dim)
  int row = 0;
  for (const auto& cone : prog_.cones) {
    switch (cone.kind) {
      case ConeKind::Zero:
        for (int i = 0; i < cone.dim; ++i) zero_rows.push_back(row + i);
        break;
      case ConeKind::NonNeg:
        for (int i = 0; i < cone.dim; ++i) lp_rows.push_back(row + i);
        break;
      case ConeKind::SecondOrder:
        soc_segments.emplace_back(row, cone.dim);
        break;
    }
    row += cone.dim;
  }

  // Equality rows, presolved to full row rank.
  const SpMat full_rowmajor_t = full.transpose();
  MatrixXd a_eq(static_cast<int>(zero_rows.size()), n_);
  VectorXd b_eq(static_cast<int>(zero_rows.size()));
  for (std::size_t i = 0; i < zero_rows.size(); ++i) {
    a_eq.row(static_cast<int>(i)) = MatrixXd(full_rowmajor_t.col(zero_rows[i])).transpose();
    b_eq(static_cast<int>(i)) = prog_.offset(zero_rows[i]);
  }
  const EqualityPresolve pre = presolve_equalities(a_eq, b_eq);
  eq_consistent_ = pre.consistent;
  if (!pre.consistent) {
    eq_certificate_ = VectorXd::Zero(prog_.num_rows());
    for (std::size_t i = 0; i < zero_rows.size(); ++i) eq_certificate_(zero_rows[i]) = pre.certificate(static_cast<int>(i));
  }
  p_ = static_cast<int>(pre.kept.size());
  std::vector<Eigen::Triplet<double>> trips;
  b_.resize(p_);
  for (int k = 0; k < p_; ++k) {
    const int r = zero_rows[pre.kept[k]];
    eq_rows_.push_back(r);
    b_(k) = prog_.offset(r);
    for (SpMat::InnerIterator it(full_rowmajor_t, r); it; ++it) trips.emplace_back(k, it.row(), it.value());
  }
  a_.resize(p_, n_);
  a_.setFromTriplets(trips.begin(), trips.end());

  cones_.lp = static_cast<int>(lp_rows.size());
  ineq_rows_ = lp_rows;
  int start = cones_.lp;
  for (const auto& [st, dim] : soc_segments) {
    cones_.soc_dims.push_back(dim);
    cones_.soc_starts.push_back(start);
    for (int i = 0; i < dim; ++i) ineq_rows_.push_back(st + i);
    start += dim;
  }
  m_ = static_cast<int>(ineq_rows_.size());
  trips.clear();
  h_.resize(m_);
  for (int k = 0; k < m_; ++k) {
    const int r = ineq_rows_[k];
    h_(k) = prog_.offset(r);
    for (SpMat::InnerIterator it(full_rowmajor_t, r); it; ++it) trips.emplace_back(k, it.row(), it.value());
  }
  g_.resize(m_, n_);
  g_.setFromTriplets(trips.begin(), trips.end());
}

// K = [ reg I   A'      G'           ]
//     [ A      -reg I   0            ]
//     [ G       0      -(W^2 + reg I)]   (lower triangle stored)
// Retries with growing regularization until the factor, with iterative
// refinement against the unregularized system, solves a probe accurately.
void Ipm::factorize(const Scaling* w) {
  for (double reg = kStaticReg; reg <= 1e-3; reg *= 10.0) {
    factorize_once(w, reg);
    if (!factor_ok_) continue;
    // A right-hand side in the range of the (possibly singular) system.
    const VectorXd probe = kkt_multiply(VectorXd::Ones(n_ + p_ + m_), w);
    const VectorXd x = kkt_solve(probe, w);
    const VectorXd r = probe - kkt_multiply(x, w);
    // normwise backward error
    const double err = r.lpNorm<Eigen::Infinity>() / (1.0 + kkt_max_ * x.lpNorm<Eigen::Infinity>());
    if (r.allFinite() && err <= 1e-12) return;
  }
  factor_ok_ = false;
}

void Ipm::factorize_once(const Scaling* w, double reg) {
  const int dim = n_ + p_ + m_;
  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(static_cast<std::size_t>(a_.nonZeros() + g_.nonZeros() + dim) + 64);
  for (int j = 0; j < n_; ++j) trips.emplace_back(j, j, reg);
  for (int k = 0; k < a_.outerSize(); ++k) {
    for (SpMat::InnerIterator it(a_, k); it; ++it) trips.emplace_back(n_ + it.row(), it.col(), it.value());
  }
  for (int i = 0; i < p_; ++i) trips.emplace_back(n_ + i, n_ + i, -reg);
  for (int k = 0; k < g_.outerSize(); ++k) {
    for (SpMat::InnerIterator it(g_, k); it; ++it) trips.emplace_back(n_ + p_ + it.row(), it.col(), it.value());
  }
  const int z0 = n_ + p_;
  for (int i = 0; i < cones_.lp; ++i) {
    const double wi = w ? w->lp_w(i) : 1.0;
    trips.emplace_back(z0 + i, z0 + i, -(wi * wi + reg));
  }
  for (std::size_t k = 0; k < cones_.soc_dims.size(); ++k) {
    const int st = z0 + cones_.soc_starts[k];
    const int d = cones_.soc_dims[k];
    MatrixXd w2 = w ? MatrixXd(w->soc[k].w * w->soc[k].w) : MatrixXd::Identity(d, d);
    for (int c = 0; c < d; ++c) {
      for (int r = c; r < d; ++r) {
        trips.emplace_back(st + r, st + c, -(w2(r, c) + (r == c ? reg : 0.0)));
      }
    }
  }
  SpMat k(dim, dim);
  k.setFromTriplets(trips.begin(), trips.end());
  if (!analyzed_) {
    ldlt_.analyzePattern(k);
    analyzed_ = true;
  }
  kkt_max_ = 1.0;
  for (const auto& t : trips) kkt_max_ = std::max(kkt_max_, std::abs(t.value()));
  ldlt_.factorize(k);
  factor_ok_ = ldlt_.info() == Eigen::Success && ldlt_.vectorD().allFinite();
}

VectorXd Ipm::kkt_multiply(const VectorXd& v, const Scaling* w) const {
  const VectorXd x = v.head(n_);
  const VectorXd y = v.segment(n_, p_);
  const VectorXd z = v.tail(m_);
  VectorXd out(n_ + p_ + m_);
  out.head(n_) = a_.transpose() * y + g_.transpose() * z;
  out.segment(n_, p_) = a_ * x;
  out.tail(m_) = g_ * x - (w ? ops_.apply_w2(*w, z) : z);
  return out;
}

VectorXd Ipm::kkt_solve(const VectorXd& rhs, const Scaling* w) const {
  VectorXd sol = ldlt_.solve(rhs);
  const double scale = 1.0 + rhs.lpNorm<Eigen::Infinity>();
  VectorXd r = rhs - kkt_multiply(sol, w);
  double res = r.lpNorm<Eigen::Infinity>();
  for (int it = 0; it < 8 && res > 1e-14 * scale; ++it) {
    const VectorXd next = sol + ldlt_.solve(r);
    const VectorXd next_r = rhs - kkt_multiply(next, w);
    const double next_res = next_r.lpNorm<Eigen::Infinity>();
    if (!(next_res < res)) break;
    sol = next;
    r = next_r;
    res = next_res;
  }
  return sol;
}

Solution Ipm::finish(SolveStatus status, const VectorXd& x, const VectorXd& y, const VectorXd& z, double tau,
                     int iters) const {
  Solution sol;
  sol.status = status;
  sol.iterations = iters;
  sol.dual = VectorXd::Zero(prog_.num_rows());
  if (status == SolveStatus::Optimal) {
    sol.primal = x / tau;
    for (int k = 0; k < p_; ++k) sol.dual(eq_rows_[k]) = y(k) / tau;
    for (int k = 0; k < m_; ++k) sol.dual(ineq_rows_[k]) = z(k) / tau;
  } else {
    // Certificates are returned unnormalized.
    sol.primal = x;
    for (int k = 0; k < p_; ++k) sol.dual(eq_rows_[k]) = y(k);
    for (int k = 0; k < m_; ++k) sol.dual(ineq_rows_[k]) = z(k);
  }
  sol.objective = status == SolveStatus::Optimal ? c_.dot(sol.primal)
                  : status == SolveStatus::Infeasible ? std::numeric_limits<double>::infinity()
                  : status == SolveStatus::Unbounded ? -std::numeric_limits<double>::infinity()
                                                     : c_.dot(x / tau);
  sol.slack = prog_.offset - prog_.matrix() * (status == SolveStatus::Optimal ? sol.primal : VectorXd(x / tau));
  return sol;
}

Solution Ipm::run() {
  if (!eq_consistent_) {
    Solution sol;
    sol.status = SolveStatus::Infeasible;
    sol.objective = std::numeric_limits<double>::infinity();
    sol.primal = VectorXd::Zero(n_);
    sol.dual = eq_certificate_;
    sol.slack = prog_.offset;
    return sol;
  }
  const double tol = settings_.tol;
  const double bnorm = b_.norm();
  const double hnorm = h_.norm();
  const double cnorm = c_.norm();

  // Starting point from two least-squares problems with W = I.
  factorize(nullptr);
  if (!factor_ok_) {
    Solution sol;
    sol.status = SolveStatus::NumericalTrouble;
    sol.objective = std::numeric_limits<double>::quiet_NaN();
    sol.primal = VectorXd::Zero(n_);
    sol.dual = VectorXd::Zero(prog_.num_rows());
    sol.slack = prog_.offset;
    return sol;
  }
  VectorXd rhs = VectorXd::Zero(n_ + p_ + m_);
  rhs.segment(n_, p_) = b_;
  rhs.tail(m_) = h_;
  VectorXd sol = kkt_solve(rhs, nullptr);
  VectorXd x = sol.head(n_);
  VectorXd s = ops_.shift_into_interior(-sol.tail(m_));
  rhs.setZero();
  rhs.head(n_) = -c_;
  sol = kkt_solve(rhs, nullptr);
  VectorXd y = sol.segment(n_, p_);
  VectorXd z = ops_.shift_into_interior(sol.tail(m_));
  double tau = 1.0;
  double kappa = 1.0;
  const int degree = cones_.degree();
  const VectorXd e = ops_.identity();

  Residuals last{};
  int stalls = 0;
  struct Iterate {
    VectorXd x, y, z;
    double tau;
    int iter;
    Residuals res;
  };
  Iterate best{x, y, z, tau, 0, {}};
  double best_merit = std::numeric_limits<double>::infinity();
  for (int iter = 0; iter <= settings_.max_iterations; ++iter) {
    const VectorXd r1 = a_.transpose() * y + g_.transpose() * z + c_ * tau;
    const VectorXd r2 = a_ * x - b_ * tau;
    const VectorXd r3 = g_ * x + s - h_ * tau;
    const double cx = c_.dot(x);
    const double by_hz = b_.dot(y) + h_.dot(z);
    const double r4 = kappa + cx + by_hz;
    const double mu = (s.dot(z) + tau * kappa) / (degree + 1);

    const double pres = std::max(r2.norm() / (1.0 + bnorm), r3.norm() / (1.0 + hnorm)) / tau;
    const double dres = r1.norm() / (1.0 + cnorm) / tau;
    const double gap = s.dot(z) / (tau * tau);
    const double pcost = cx / tau;
    const double dcost = -by_hz / tau;
    const double relgap = gap / std::max(std::min(std::abs(pcost), std::abs(dcost)), 1e-300);
    last = {pres, dres, gap};
    if (trace_) {
      std::fprintf(stderr, "%3d pres %.2e dres %.2e gap %.2e pcost %.10g dcost %.10g tau %.2e\n", iter, pres, dres, gap,
                   pcost, dcost, tau);
    }

    const double cost_gap = std::abs(pcost - dcost) / std::max(1.0, std::abs(pcost));
    const double merit = std::max({pres, dres, std::min({gap, relgap, cost_gap})});
    if (merit < best_merit) {
      best_merit = merit;
      best = {x, y, z, tau, iter, last};
    }
    if (pres < tol && dres < tol && (gap < tol || relgap < tol || cost_gap < tol)) {
      Solution out = finish(SolveStatus::Optimal, x, y, z, tau, iter);
      out.residuals = last;
      return out;
    }
    if (by_hz < 0.0) {
      const double pinf = (a_.transpose() * y + g_.transpose() * z).norm() / -by_hz;
      if (pinf < tol) {
        Solution out = finish(SolveStatus::Infeasible, x, y, z, tau, iter);
        out.residuals = {pinf, dres, gap};
        return out;
      }
    }
    if (cx < 0.0) {
      const double dinf = std::max((a_ * x).norm(), (g_ * x + s).norm()) / -cx;
      if (dinf < tol) {
        Solution out = finish(SolveStatus::Unbounded, x, y, z, tau, iter);
        out.residuals = {pres, dinf, gap};
        return out;
      }
    }
    if (iter == settings_.max_iterations) break;

    const Scaling w = ops_.scaling(s, z);
    const VectorXd lambda = ops_.apply_w(w, z);
    factorize(&w);
    if (!factor_ok_) break;

    rhs.head(n_) = -c_;
    rhs.segment(n_, p_) = b_;
    rhs.tail(m_) = h_;
    const VectorXd sol1 = kkt_solve(rhs, &w);
    const double denom = -kappa / tau + c_.dot(sol1.head(n_)) + b_.dot(sol1.segment(n_, p_)) + h_.dot(sol1.tail(m_));

    struct Direction {
      VectorXd dx, dy, dz, ds;
      double dtau, dkappa;
    };
    auto direction = [&](double sigma, const VectorXd& ds_target, double dk_target) {
      const double keep = 1.0 - sigma;
      const VectorXd u = ops_.divide(lambda, ds_target);
      const VectorXd wu = ops_.apply_w(w, u);
      VectorXd r(n_ + p_ + m_);
      r.head(n_) = -keep * r1;
      r.segment(n_, p_) = -keep * r2;
      r.tail(m_) = -keep * r3 - wu;
      const VectorXd sol2 = kkt_solve(r, &w);
      const double num = -keep * r4 - dk_target / tau - c_.dot(sol2.head(n_)) - b_.dot(sol2.segment(n_, p_)) -
                         h_.dot(sol2.tail(m_));
      Direction d;
      d.dtau = num / denom;
      d.dx = sol2.head(n_) + d.dtau * sol1.head(n_);
      d.dy = sol2.segment(n_, p_) + d.dtau * sol1.segment(n_, p_);
      d.dz = sol2.tail(m_) + d.dtau * sol1.tail(m_);
      d.ds = wu - ops_.apply_w2(w, d.dz);
      d.dkappa = (dk_target - kappa * d.dtau) / tau;
      return d;
    };
    auto step_length = [&](const Direction& d) {
      double alpha = std::min(ops_.max_step(s, d.ds, 1e6), ops_.max_step(z, d.dz, 1e6));
      if (d.dtau < 0.0) alpha = std::min(alpha, -tau / d.dtau);
      if (d.dkappa < 0.0) alpha = std::min(alpha, -kappa / d.dkappa);
      return alpha;
    };

    const VectorXd ll = ops_.product(lambda, lambda);
    const Direction aff = direction(0.0, -ll, -tau * kappa);
    const double alpha_aff = std::min(1.0, step_length(aff));
    const double sigma = std::clamp(std::pow(1.0 - alpha_aff, 3), 0.0, 1.0);

    const VectorXd corr = ops_.product(ops_.apply_w_inv(w, aff.ds), ops_.apply_w(w, aff.dz));
    const VectorXd ds_target = -ll - corr + sigma * mu * e;
    const double dk_target = -tau * kappa - aff.dtau * aff.dkappa + sigma * mu;
    const Direction d = direction(sigma, ds_target, dk_target);
    const double alpha = std::min(1.0, kStepFraction * step_length(d));

    x += alpha * d.dx;
    y += alpha * d.dy;
    z += alpha * d.dz;
    s += alpha * d.ds;
    tau += alpha * d.dtau;
    kappa += alpha * d.dkappa;

    stalls = alpha < 1e-9 ? stalls + 1 : 0;
    if (stalls >= 3 || !x.allFinite() || !z.allFinite() || !std::isfinite(tau)) break;
  }

  // Reduced accuracy: the best iterate is accepted within 100x the tolerance.
  if (best_merit < 100.0 * tol) {
    Solution out = finish(SolveStatus::Optimal, best.x, best.y, best.z, best.tau, best.iter);
    out.residuals = best.res;
    return out;
  }
  Solution out = finish(SolveStatus::NumericalTrouble, x, y, z, tau, settings_.max_iterations);
  out.residuals = last;
  return out;
}

}  // namespace

Solution solve_ipm(const ConicProgram& program, const SolverSettings& settings) {
  Ipm ipm(program, settings);
  return ipm.run();
}

}  // namespace detail

std::vector<std::string> solver_backends() { return {"ipm"}; }

Solution solve(const ConicProgram& program, const SolverSettings& settings) {
  program.validate();
  if (settings.tol <= 0.0) throw std::invalid_argument("solver tolerance must be positive");
  if (settings.backend == "ipm") return detail::solve_ipm(program, settings);
  throw std::invalid_argument("unknown solver backend: " + settings.backend);
}

}  // namespace optrec
