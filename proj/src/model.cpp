#include "optrec/model.hpp"

#include "optrec/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace optrec {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kMemberTol = 1e-9;

// Roots of a t^2 + 2 b t + c = 0 with a > 0, c <= 0 (so real, lo <= 0 <= hi).
Chord quadratic_interval(double a, double b, double c) {
  const double disc = std::sqrt(std::max(b * b - a * c, 0.0));
  const double q = -(b + std::copysign(disc, b));  // stable: |q| is the larger magnitude
  double t1 = q / a;
  double t2 = q != 0.0 ? c / q : 0.0;
  if (t1 > t2) std::swap(t1, t2);
  return {std::min(t1, 0.0), std::max(t2, 0.0)};
}

}  // namespace

Polytope::Polytope(Matrix constraints, int dim) : a_(std::move(constraints)), dim_(dim) {
  if (dim < 1) throw InputError("polytope dimension must be positive");
  if (a_.rows() == 0) a_.resize(0, dim);
  if (a_.cols() != dim) {
    throw DimensionError("polytope constraints have length " + std::to_string(a_.cols()) + ", dimension is " +
                         std::to_string(dim));
  }
  if (!a_.allFinite()) throw InputError("polytope constraints have non-finite entries");
}

ApproxSet::ApproxSet(Matrix v_basis, Vector g, double eps, Matrix gram)
    : v_(std::move(v_basis)), g_(std::move(g)), eps_(eps), gram_(std::move(gram)) {
  const int d = static_cast<int>(g_.size());
  if (d < 1) throw InputError("approximability set needs a nonempty center");
  if (gram_.rows() != d || gram_.cols() != d) throw DimensionError("Gram matrix does not match the center length");
  if (v_.rows() == 0) v_.resize(0, d);
  if (v_.cols() != d) throw DimensionError("V basis vectors do not match the center length");
  if (!v_.allFinite() || !g_.allFinite() || !gram_.allFinite()) {
    throw InputError("approximability set has non-finite entries");
  }
  if (!(eps > 0.0) || !std::isfinite(eps)) throw InputError("eps must be positive and finite");
  const double scale = std::max(gram_.cwiseAbs().maxCoeff(), 1e-300);
  if ((gram_ - gram_.transpose()).cwiseAbs().maxCoeff() > 1e-10 * scale) throw InputError("Gram matrix is not symmetric");
  gram_ = 0.5 * (gram_ + gram_.transpose());

  Eigen::LLT<Matrix> llt(gram_);
  if (llt.info() != Eigen::Success) {
    const double jitter = 1e-12 * gram_.trace() / d;
    llt.compute(gram_ + jitter * Matrix::Identity(d, d));
    if (llt.info() != Eigen::Success || !(jitter > 0.0)) {
      throw InputError("Gram matrix is not positive semidefinite");
    }
    // A PSD matrix with a tiny negative eigenvalue from rounding is fine; a
    // genuinely indefinite one is not.
    Eigen::SelfAdjointEigenSolver<Matrix> es(gram_);
    if (es.eigenvalues().minCoeff() < -1e-10 * scale) throw InputError("Gram matrix is not positive semidefinite");
    gram_ += jitter * Matrix::Identity(d, d);
    jittered_ = true;
  }
  r_ = llt.matrixU();

  if (n() > 0) {
    const Matrix vgv = v_ * gram_ * v_.transpose();
    Eigen::SelfAdjointEigenSolver<Matrix> es(vgv);
    const double top = es.eigenvalues().maxCoeff();
    if (!(top > 0.0) || es.eigenvalues().minCoeff() <= 1e-12 * top) {
      throw InputError("V basis is not linearly independent in the Gram metric");
    }
    vgv_.compute(vgv);
  }
  const double dist = center_distance();
  if (!(dist < eps_)) {
    throw InputError("dist(g, V) = " + std::to_string(dist) + " must be strictly below eps = " + std::to_string(eps_));
  }
}

Vector ApproxSet::project_v(const Vector& f) const {
  if (n() == 0) return Vector::Zero(f.size());
  return v_.transpose() * vgv_.solve(v_ * (gram_ * f));
}

int model_dim(const ModelSet& model) {
  return std::visit([](const auto& k) { return k.dim(); }, model);
}

bool is_polytope(const ModelSet& model) { return std::holds_alternative<Polytope>(model); }

Vector action(const ModelSet& model, const Vector& f) {
  if (const auto* k = std::get_if<ApproxSet>(&model)) return k->gram() * f;
  return f;
}

Matrix action(const ModelSet& model, const Matrix& columns) {
  if (const auto* k = std::get_if<ApproxSet>(&model)) return k->gram() * columns;
  return columns;
}

double apply(const ModelSet& model, const Vector& h, const Vector& f) { return h.dot(action(model, f)); }

NoiseModel::Norm NoiseModel::parse_norm(const std::string& text) {
  if (text == "1") return Norm::One;
  if (text == "2") return Norm::Two;
  if (text == "inf") return Norm::Inf;
  throw InputError("noise p must be \"1\", \"2\" or \"inf\", got \"" + text + "\"");
}

const char* NoiseModel::norm_name(Norm p) {
  switch (p) {
    case Norm::One:
      return "1";
    case Norm::Two:
      return "2";
    case Norm::Inf:
      return "inf";
  }
  return "?";
}

void NoiseModel::validate() const {
  if (!(radius >= 0.0) || !std::isfinite(radius)) throw InputError("noise radius must be finite and nonnegative");
}

double dual_norm(const Vector& c, NoiseModel::Norm p) {
  if (c.size() == 0) return 0.0;
  switch (p) {
    case NoiseModel::Norm::Inf:
      return c.lpNorm<1>();
    case NoiseModel::Norm::Two:
      return c.norm();
    case NoiseModel::Norm::One:
      return c.lpNorm<Eigen::Infinity>();
  }
  return 0.0;
}

double primal_norm(const Vector& e, NoiseModel::Norm p) {
  if (e.size() == 0) return 0.0;
  switch (p) {
    case NoiseModel::Norm::One:
      return e.lpNorm<1>();
    case NoiseModel::Norm::Two:
      return e.norm();
    case NoiseModel::Norm::Inf:
      return e.lpNorm<Eigen::Infinity>();
  }
  return 0.0;
}

double augment_noise(const Vector& c, const NoiseModel& noise) {
  noise.validate();
  return noise.radius == 0.0 ? 0.0 : noise.radius * dual_norm(c, noise.p);
}

namespace {

// min sum s  s.t.  sum_l s_l a_l = g, s >= 0
ConicProgram support_program(const Polytope& k, const Vector& g) {
  ProgramBuilder b;
  const VarBlock s = b.add_vars("s", k.num_constraints());
  LinExpr total;
  for (int l = 0; l < s.size; ++l) {
    total.add(s[l], 1.0);
    b.add_nonneg(s[l]);
  }
  for (int j = 0; j < k.dim(); ++j) {
    LinExpr row(g(j));
    for (int l = 0; l < s.size; ++l) row.add(s[l], -k.constraints()(l, j));
    b.add_zero(row);
  }
  b.minimize(total);
  return b.build();
}

}  // namespace

double support_polytope(const Polytope& k, const Vector& g, const SolverSettings& settings) {
  if (g.size() != k.dim()) throw DimensionError("functional length does not match the polytope dimension");
  if (g.isZero(0.0)) return 0.0;
  if (k.num_constraints() == 0) return kInf;
  const ConicProgram p = support_program(k, g);
  const Solution sol = solve(p, settings);
  switch (sol.status) {
    case SolveStatus::Optimal:
      return std::max(sol.objective, 0.0);
    case SolveStatus::Infeasible:
      return kInf;
    default:
      throw ProgramFailure(sol.status, std::string("support function LP ended with status ") + status_name(sol.status),
                           "", program_to_string(p));
  }
}

std::optional<Vector> unbounded_direction(const Polytope& k, const Vector& g, const SolverSettings& settings) {
  if (g.size() != k.dim()) throw DimensionError("functional length does not match the polytope dimension");
  if (k.num_constraints() == 0) {
    if (g.isZero(0.0)) return std::nullopt;
    return Vector(g / g.norm());
  }
  const ConicProgram p = support_program(k, g);
  const Solution sol = solve(p, settings);
  if (sol.status != SolveStatus::Infeasible) return std::nullopt;
  // The zero rows come first; their multipliers y give d = -y.
  Vector d = -sol.dual.head(k.dim());
  if (!(d.norm() > 0.0)) return std::nullopt;
  d /= d.norm();
  const double tol = 1e-7;
  if (g.dot(d) <= 0.0 || (k.constraints() * d).maxCoeff() > tol * k.constraints().cwiseAbs().maxCoeff()) {
    return std::nullopt;
  }
  return d;
}

double support_approx(const ApproxSet& k, const Vector& h) {
  if (h.size() != k.dim()) throw DimensionError("functional length does not match the approximability set");
  const double hn = k.norm(h);
  if (k.n() > 0 && k.norm(k.project_v(h)) > 1e-9 * hn) return kInf;
  return k.inner(h, k.center()) + k.eps() * hn;
}

double support(const ModelSet& model, const Vector& h, const SolverSettings& settings) {
  if (const auto* p = std::get_if<Polytope>(&model)) return support_polytope(*p, h, settings);
  return support_approx(std::get<ApproxSet>(model), h);
}

bool contains(const ModelSet& model, const Vector& f) {
  if (f.size() != model_dim(model)) throw DimensionError("element dimension does not match the model set");
  if (const auto* p = std::get_if<Polytope>(&model)) {
    return p->num_constraints() == 0 || (p->constraints() * f).maxCoeff() <= 1.0 + kMemberTol;
  }
  const auto& k = std::get<ApproxSet>(model);
  return k.norm(k.project_perp(f - k.center())) <= k.eps() + kMemberTol;
}

bool noise_contains(const NoiseModel& noise, const Vector& e) {
  return primal_norm(e, noise.p) <= noise.radius + kMemberTol;
}

Chord chord(const ModelSet& model, const Vector& f, const Vector& d) {
  if (f.size() != model_dim(model) || d.size() != f.size()) throw DimensionError("chord dimensions do not match");
  Chord c{-kInf, kInf};
  if (const auto* p = std::get_if<Polytope>(&model)) {
    for (int l = 0; l < p->num_constraints(); ++l) {
      const double ad = p->constraints().row(l).dot(d);
      const double slack = std::max(1.0 - p->constraints().row(l).dot(f), 0.0);
      if (ad > 0.0) {
        c.hi = std::min(c.hi, slack / ad);
      } else if (ad < 0.0) {
        c.lo = std::max(c.lo, slack / ad);
      }
    }
    return c;
  }
  const auto& k = std::get<ApproxSet>(model);
  const Vector pd = k.project_perp(d);
  const Vector pf = k.project_perp(f - k.center());
  const double a = k.inner(pd, pd);
  if (!(a > 1e-24 * std::max(k.inner(d, d), 1e-300))) return c;  // d in V: the whole line stays in K
  const double b = k.inner(pf, pd);
  const double cc = std::min(k.inner(pf, pf) - k.eps() * k.eps(), 0.0);
  return quadratic_interval(a, b, cc);
}

Chord noise_chord(const NoiseModel& noise, const Vector& e, const Vector& d) {
  if (e.size() != d.size()) throw DimensionError("noise chord dimensions do not match");
  if (d.isZero(0.0)) return {-kInf, kInf};
  const double r = noise.radius;
  switch (noise.p) {
    case NoiseModel::Norm::Inf: {
      Chord c{-kInf, kInf};
      for (int k = 0; k < e.size(); ++k) {
        if (d(k) == 0.0) continue;
        const double up = std::max(r - e(k), 0.0) / d(k);
        const double down = std::min(-r - e(k), 0.0) / d(k);
        c.hi = std::min(c.hi, std::max(up, down));
        c.lo = std::max(c.lo, std::min(up, down));
      }
      return c;
    }
    case NoiseModel::Norm::Two:
      return quadratic_interval(d.squaredNorm(), e.dot(d), std::min(e.squaredNorm() - r * r, 0.0));
    case NoiseModel::Norm::One: {
      // ||e + t d||_1 is convex in t; bisect each side against r.
      auto inside = [&](double t) { return (e + t * d).lpNorm<1>() <= r; };
      const double reach = (std::abs(r) + e.lpNorm<1>()) / d.lpNorm<1>() * 2.0 + 1.0;
      auto edge = [&](double sign) {
        double lo = 0.0;
        double hi = reach;
        for (int it = 0; it < 60; ++it) {
          const double mid = 0.5 * (lo + hi);
          (inside(sign * mid) ? lo : hi) = mid;
        }
        return sign * lo;
      };
      return {edge(-1.0), edge(1.0)};
    }
  }
  return {0.0, 0.0};
}

Vector random_direction(int n, std::mt19937_64& rng) {
  std::normal_distribution<double> nd;
  Vector d(n);
  do {
    for (int i = 0; i < n; ++i) d(i) = nd(rng);
  } while (!(d.norm() > 1e-12));
  return d / d.norm();
}

namespace {

// Largest / smallest coordinate over the polytope via two LPs per axis.
std::pair<Vector, Vector> bounding_box(const Polytope& k, const SolverSettings& settings) {
  const int n = k.dim();
  Vector lo(n), hi(n);
  for (int j = 0; j < n; ++j) {
    for (int sign : {1, -1}) {
      ProgramBuilder b;
      const VarBlock f = b.add_vars("f", n);
      for (int l = 0; l < k.num_constraints(); ++l) {
        LinExpr row;
        for (int i = 0; i < n; ++i) row.add(f[i], k.constraints()(l, i));
        b.add_le(row, 1.0);
      }
      b.minimize(LinExpr(f[j]) * static_cast<double>(-sign));
      const Solution sol = solve(b.build(), settings);
      if (sol.status == SolveStatus::Unbounded) {
        throw SamplingError("polytope is unbounded along coordinate " + std::to_string(j) +
                            "; box rejection sampling needs a bounded model set");
      }
      if (sol.status != SolveStatus::Optimal) {
        throw SamplingError(std::string("bounding-box LP ended with status ") + status_name(sol.status));
      }
      (sign > 0 ? hi : lo)(j) = sign * -sol.objective;
    }
  }
  return {lo, hi};
}

}  // namespace

ModelSampler::ModelSampler(const ModelSet& model, SamplerOptions options, const SolverSettings& settings)
    : model_(model), options_(options) {
  if (const auto* p = std::get_if<Polytope>(&model)) {
    auto [lo, hi] = bounding_box(*p, settings);
    lower_ = lo;
    upper_ = hi;
  } else {
    const auto& k = std::get<ApproxSet>(model);
    r_inv_ = k.factor().triangularView<Eigen::Upper>().solve(Matrix::Identity(k.dim(), k.dim()));
  }
}

Vector ModelSampler::draw(std::mt19937_64& rng) const {
  return is_polytope(model_) ? draw_polytope(rng) : draw_approx(rng);
}

Vector ModelSampler::draw_polytope(std::mt19937_64& rng) const {
  const auto& k = std::get<Polytope>(model_);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const int n = k.dim();
  Vector f(n);
  long attempt = 0;
  while (true) {
    if (++attempt > options_.max_attempts) {
      throw SamplingError("rejection sampling found no point after " + std::to_string(options_.max_attempts) +
                          " attempts; the polytope is too thin for box sampling (use a hit-and-run sampler)");
    }
    for (int j = 0; j < n; ++j) f(j) = lower_(j) + (upper_(j) - lower_(j)) * unit(rng);
    if (k.num_constraints() == 0 || (k.constraints() * f).maxCoeff() <= 1.0) break;
  }
  if (unit(rng) < options_.boundary_fraction) {
    const Vector d = random_direction(n, rng);
    const Chord c = chord(model_, f, d);
    if (std::isfinite(c.hi)) f += c.hi * d;
  }
  return f;
}

Vector ModelSampler::draw_approx(std::mt19937_64& rng) const {
  const auto& k = std::get<ApproxSet>(model_);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const int d = k.dim();
  Vector f = k.center();
  if (k.n() > 0) {
    std::uniform_real_distribution<double> coef(-options_.coefficient_bound, options_.coefficient_bound);
    for (int l = 0; l < k.n(); ++l) f += coef(rng) * k.basis().row(l).transpose();
  }
  // A G-unit vector orthogonal to V, then a radius.
  Vector u = k.project_perp(r_inv_ * random_direction(d, rng));
  const double un = k.norm(u);
  if (!(un > 1e-12)) return f;
  u /= un;
  const int free_dim = std::max(d - k.n(), 1);
  const double radius = unit(rng) < options_.boundary_fraction ? 1.0 : std::pow(unit(rng), 1.0 / free_dim);
  return f + (k.eps() * radius) * u;
}

std::vector<Vector> sample(const ModelSet& model, std::uint64_t seed, std::size_t count, SamplerOptions options) {
  std::vector<Vector> out;
  if (count == 0) return out;
  const ModelSampler sampler(model, options);
  std::mt19937_64 rng(seed);
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) out.push_back(sampler.draw(rng));
  return out;
}

Vector draw_noise(const NoiseModel& noise, int m, std::mt19937_64& rng) {
  Vector e = Vector::Zero(m);
  if (m == 0 || noise.radius == 0.0) return e;
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const bool surface = unit(rng) < 0.5;
  switch (noise.p) {
    case NoiseModel::Norm::Inf:
      for (int k = 0; k < m; ++k) e(k) = (surface ? (unit(rng) < 0.5 ? -1.0 : 1.0) : 2.0 * unit(rng) - 1.0);
      break;
    case NoiseModel::Norm::Two:
      e = random_direction(m, rng) * (surface ? 1.0 : std::pow(unit(rng), 1.0 / m));
      break;
    case NoiseModel::Norm::One: {
      std::exponential_distribution<double> ex(1.0);
      double total = 0.0;
      for (int k = 0; k < m; ++k) {
        e(k) = ex(rng);
        total += e(k);
      }
      for (int k = 0; k < m; ++k) e(k) *= (unit(rng) < 0.5 ? -1.0 : 1.0) / total;
      if (!surface) e *= std::pow(unit(rng), 1.0 / m);
      break;
    }
  }
  return e * noise.radius;
}

}  // namespace optrec
