#pragma once

// Linear, sup-linear and sup-inf-linear functionals, and the sup-affine /
// sup-inf-affine estimators built from them.
//
// A linear functional is stored by its coefficient vector h. How h acts on an
// element depends on the model set: plain dot product in l_inf^N, Gram inner
// product in a Hilbert space. Everything here works on "action vectors" (the
// element already mapped through the Gram matrix), so this header knows
// nothing about geometry.

#include <Eigen/Dense>

#include <cstddef>
#include <variant>
#include <vector>

namespace optrec {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Family of index subsets; every subset is sorted and the family is listed
/// in lexicographic order.
using IndexFamily = std::vector<std::vector<int>>;

constexpr std::size_t kDefaultFamilyCap = 1'000'000;

/// The observation functionals u_1..u_m, one per row.
class ObservationMap {
 public:
  ObservationMap() = default;
  /// `rows` is m x dim; m may be zero.
  ObservationMap(Matrix rows, int dim);

  int m() const { return static_cast<int>(rows_.rows()); }
  int dim() const { return dim_; }
  const Matrix& rows() const { return rows_; }

  /// y = (u_k . action)_k
  Vector observe(const Vector& action) const;

 private:
  Matrix rows_;
  int dim_ = 0;
};

class TargetFunctional {
 public:
  enum class Kind { Sup, SupInf };

  /// gamma(f) = max_i <w_i, f>, one piece per row.
  static TargetFunctional sup(Matrix pieces);

  /// gamma(f) = sup_{a} inf_{i in I_a} <w_i, f> = inf_{b} sup_{j in J_b} <w_j, f>.
  /// The identity between both forms is checked on random points.
  static TargetFunctional sup_inf(Matrix pieces, IndexFamily sup_families, IndexFamily inf_families);

  Kind kind() const { return kind_; }
  const Matrix& pieces() const { return pieces_; }
  int num_pieces() const { return static_cast<int>(pieces_.rows()); }
  int dim() const { return static_cast<int>(pieces_.cols()); }

  /// A (the sets I_a) and B (the sets J_b); empty for Sup.
  const IndexFamily& sup_families() const { return sup_families_; }
  const IndexFamily& inf_families() const { return inf_families_; }

  /// Sup-inf view valid for both kinds: for Sup the families are the
  /// singletons and the full index set.
  IndexFamily effective_sup_families() const;
  IndexFamily effective_inf_families() const;

  Vector piece_values(const Vector& action) const { return pieces_ * action; }

  /// Evaluates the target from its piece values.
  double evaluate_values(const Vector& values) const;
  /// Same value through the inf-sup form.
  double evaluate_inf_sup_values(const Vector& values) const;

  double evaluate(const Vector& action) const { return evaluate_values(piece_values(action)); }

 private:
  Kind kind_ = Kind::Sup;
  Matrix pieces_;
  IndexFamily sup_families_;
  IndexFamily inf_families_;
};

/// delta(y) = max_i (offsets_i + <gains.row(i), y>)
struct SupAffineEstimator {
  Vector offsets;
  Matrix gains;  // |I| x m

  int num_pieces() const { return static_cast<int>(offsets.size()); }
  int m() const { return static_cast<int>(gains.cols()); }
  void validate() const;
  double evaluate(const Vector& y) const;
};

/// delta(y) = max_a min_b (offsets_(a,b) + <gains.row(a,b), y>), pieces in
/// row-major (a, b) order.
struct SupInfAffineEstimator {
  int num_sup = 0;  // |A|
  int num_inf = 0;  // |B|
  Vector offsets;
  Matrix gains;  // |A||B| x m
  IndexFamily sup_families;
  IndexFamily inf_families;

  int index(int a, int b) const { return a * num_inf + b; }
  int m() const { return static_cast<int>(gains.cols()); }
  void validate() const;
  double evaluate(const Vector& y) const;
};

using Estimator = std::variant<SupAffineEstimator, SupInfAffineEstimator>;

/// max_i <w_i, f>; the target must be of Sup kind.
double eval_sup_linear(const TargetFunctional& target, const Vector& action);

double eval_estimator(const Estimator& estimator, const Vector& y);

int estimator_m(const Estimator& estimator);

/// All subsets of {0..n-1} with `size` elements, lexicographic.
IndexFamily combinations(int n, int size);

/// ell-th largest of the pieces: A = all ell-subsets, B = all (d+1-ell)-subsets.
TargetFunctional lth_largest_target(const Matrix& pieces, int ell, std::size_t cap = kDefaultFamilyCap);

/// sup_i mu_i - sup_j nu_j with pieces mu_i - nu_j stored at i*|nu| + j.
TargetFunctional difference_of_sups_target(const Matrix& mu, const Matrix& nu);

}  // namespace optrec
