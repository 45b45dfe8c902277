#pragma once

// Model sets: the polytope {f : <a_l, f> <= 1} in l_inf^N and the
// approximability set {f : ||P_{V-perp}(f - g)||_G <= eps} in a Hilbert space
// with Gram matrix G, plus the l_p observation-noise ball.
//
// Elements and functionals share one coordinate system. In the polytope case a
// functional h acts by the dot product; in the Hilbert case by <h, f>_G, so h
// holds Riesz coordinates. action(model, f) returns the vector that plain dot
// products with functional coefficients need (f, resp. G f).

#include "optrec/conic.hpp"
#include "optrec/functional.hpp"

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <variant>
#include <vector>

namespace optrec {

class Polytope {
 public:
  /// `constraints` is L x N, one a_l per row. L = 0 describes all of R^N.
  Polytope(Matrix constraints, int dim);

  int dim() const { return dim_; }
  int num_constraints() const { return static_cast<int>(a_.rows()); }
  const Matrix& constraints() const { return a_; }

 private:
  Matrix a_;
  int dim_;
};

class ApproxSet {
 public:
  /// `v_basis` is n x dim (n may be zero), `gram` is dim x dim.
  ApproxSet(Matrix v_basis, Vector g, double eps, Matrix gram);

  int dim() const { return static_cast<int>(g_.size()); }
  int n() const { return static_cast<int>(v_.rows()); }
  const Matrix& basis() const { return v_; }
  const Vector& center() const { return g_; }
  double eps() const { return eps_; }
  const Matrix& gram() const { return gram_; }
  /// Upper-triangular R with R^T R = G (after jitter, if any was needed).
  const Matrix& factor() const { return r_; }
  bool jittered() const { return jittered_; }

  double inner(const Vector& a, const Vector& b) const { return a.dot(gram_ * b); }
  double norm(const Vector& a) const { return (r_ * a).norm(); }
  Vector project_v(const Vector& f) const;
  Vector project_perp(const Vector& f) const { return f - project_v(f); }
  /// ||P_{V-perp} g||_G
  double center_distance() const { return norm(project_perp(g_)); }

 private:
  Matrix v_;
  Vector g_;
  double eps_;
  Matrix gram_;
  Matrix r_;
  Eigen::LLT<Matrix> vgv_;  // of V G V^T
  bool jittered_ = false;
};

using ModelSet = std::variant<Polytope, ApproxSet>;

int model_dim(const ModelSet& model);
/// f for the polytope, G f in the Hilbert case.
Vector action(const ModelSet& model, const Vector& f);
Matrix action(const ModelSet& model, const Matrix& columns);
/// eta(f) for a functional with coefficients h.
double apply(const ModelSet& model, const Vector& h, const Vector& f);
bool is_polytope(const ModelSet& model);

struct NoiseModel {
  enum class Norm { One, Two, Inf };
  Norm p = Norm::Inf;
  double radius = 0.0;

  /// "1", "2" or "inf"
  static Norm parse_norm(const std::string& text);
  static const char* norm_name(Norm p);
  void validate() const;
};

/// ||c||_{p'} with p' conjugate to p.
double dual_norm(const Vector& c, NoiseModel::Norm p);
double primal_norm(const Vector& e, NoiseModel::Norm p);

/// r ||c||_{p'}: what the noise ball adds to a support function whose
/// observation coefficients are c.
double augment_noise(const Vector& c, const NoiseModel& noise);

/// Support function of the polytope at the functional g; +inf when the LP dual
/// is infeasible. Throws ProgramFailure on numerical trouble.
double support_polytope(const Polytope& k, const Vector& g, const SolverSettings& settings = {});

/// When the polytope support is +inf, a direction d with <a_l, d> <= 0 for all
/// l and <g, d> > 0 recovered from the solver's certificate.
std::optional<Vector> unbounded_direction(const Polytope& k, const Vector& g, const SolverSettings& settings = {});

/// <h, g>_G + eps ||h||_G when h is G-orthogonal to V, +inf otherwise.
double support_approx(const ApproxSet& k, const Vector& h);

double support(const ModelSet& model, const Vector& h, const SolverSettings& settings = {});

bool contains(const ModelSet& model, const Vector& f);
bool noise_contains(const NoiseModel& noise, const Vector& e);

/// The set {t : f + t d in K} = [lo, hi]; either end may be infinite. f must
/// lie in K (up to rounding).
struct Chord {
  double lo;
  double hi;
};
Chord chord(const ModelSet& model, const Vector& f, const Vector& d);
Chord noise_chord(const NoiseModel& noise, const Vector& e, const Vector& d);

struct SamplerOptions {
  double coefficient_bound = 10.0;  // box for the V coefficients
  long max_attempts = 1'000'000;    // rejection sampling budget per point
  double boundary_fraction = 0.5;   // share of points pushed onto the boundary
};

/// Draws points of a model set. Construction may solve LPs (polytope bounding
/// box); draws are deterministic functions of the generator state.
class ModelSampler {
 public:
  explicit ModelSampler(const ModelSet& model, SamplerOptions options = {}, const SolverSettings& settings = {});
  Vector draw(std::mt19937_64& rng) const;

 private:
  Vector draw_polytope(std::mt19937_64& rng) const;
  Vector draw_approx(std::mt19937_64& rng) const;

  ModelSet model_;
  SamplerOptions options_;
  Vector lower_, upper_;  // polytope bounding box
  Matrix r_inv_;          // approximability set
};

std::vector<Vector> sample(const ModelSet& model, std::uint64_t seed, std::size_t count, SamplerOptions options = {});

Vector draw_noise(const NoiseModel& noise, int m, std::mt19937_64& rng);

/// Random unit direction (Euclidean) in R^n.
Vector random_direction(int n, std::mt19937_64& rng);

}  // namespace optrec
