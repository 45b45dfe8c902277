#include "optrec/functional.hpp"

#include "optrec/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <string>

namespace optrec {

namespace {

void require_finite(const Matrix& m, const char* what) {
  if (!m.allFinite()) throw InputError(std::string(what) + " has non-finite entries");
}

void check_family(const IndexFamily& family, int num_pieces, const char* what) {
  if (family.empty()) throw InputError(std::string(what) + " family is empty");
  for (const auto& set : family) {
    if (set.empty()) throw InputError(std::string(what) + " family contains an empty set");
    for (std::size_t k = 0; k < set.size(); ++k) {
      if (set[k] < 0 || set[k] >= num_pieces) {
        throw InputError(std::string(what) + " family references piece " + std::to_string(set[k]) +
                         " outside [0, " + std::to_string(num_pieces) + ")");
      }
      if (k > 0 && set[k - 1] >= set[k]) throw InputError(std::string(what) + " family sets must be sorted and unique");
    }
  }
}

}  // namespace

ObservationMap::ObservationMap(Matrix rows, int dim) : rows_(std::move(rows)), dim_(dim) {
  if (rows_.rows() > 0 && rows_.cols() != dim) {
    throw DimensionError("observation functionals have length " + std::to_string(rows_.cols()) +
                         ", ambient dimension is " + std::to_string(dim));
  }
  if (rows_.rows() == 0) rows_.resize(0, dim);
  require_finite(rows_, "observation map");
}

Vector ObservationMap::observe(const Vector& action) const {
  if (action.size() != dim_) throw DimensionError("element dimension does not match the observation map");
  return rows_ * action;
}

TargetFunctional TargetFunctional::sup(Matrix pieces) {
  if (pieces.rows() == 0) throw InputError("sup target needs at least one piece");
  require_finite(pieces, "target");
  TargetFunctional t;
  t.kind_ = Kind::Sup;
  t.pieces_ = std::move(pieces);
  return t;
}

TargetFunctional TargetFunctional::sup_inf(Matrix pieces, IndexFamily sup_families, IndexFamily inf_families) {
  if (pieces.rows() == 0) throw InputError("sup-inf target needs at least one piece");
  require_finite(pieces, "target");
  const int d = static_cast<int>(pieces.rows());
  check_family(sup_families, d, "sup");
  check_family(inf_families, d, "inf");
  TargetFunctional t;
  t.kind_ = Kind::SupInf;
  t.pieces_ = std::move(pieces);
  t.sup_families_ = std::move(sup_families);
  t.inf_families_ = std::move(inf_families);

  // Both representations must agree pointwise; check on random elements.
  std::mt19937_64 rng(0x5eed);
  std::normal_distribution<double> nd;
  for (int trial = 0; trial < 64; ++trial) {
    Vector f(t.dim());
    for (int j = 0; j < f.size(); ++j) f(j) = nd(rng);
    const Vector v = t.piece_values(f);
    const double lhs = t.evaluate_values(v);
    const double rhs = t.evaluate_inf_sup_values(v);
    if (std::abs(lhs - rhs) > 1e-9 * (1.0 + v.cwiseAbs().maxCoeff())) {
      throw InputError("sup-inf and inf-sup representations disagree (" + std::to_string(lhs) + " vs " +
                       std::to_string(rhs) + ")");
    }
  }
  return t;
}

IndexFamily TargetFunctional::effective_sup_families() const {
  if (kind_ == Kind::SupInf) return sup_families_;
  IndexFamily out;
  for (int i = 0; i < num_pieces(); ++i) out.push_back({i});
  return out;
}

IndexFamily TargetFunctional::effective_inf_families() const {
  if (kind_ == Kind::SupInf) return inf_families_;
  std::vector<int> all(num_pieces());
  for (int i = 0; i < num_pieces(); ++i) all[i] = i;
  return {all};
}

double TargetFunctional::evaluate_values(const Vector& values) const {
  if (values.size() != num_pieces()) throw DimensionError("piece value count mismatch");
  if (kind_ == Kind::Sup) return values.maxCoeff();
  double best = -std::numeric_limits<double>::infinity();
  for (const auto& set : sup_families_) {
    double lo = std::numeric_limits<double>::infinity();
    for (int i : set) lo = std::min(lo, values(i));
    best = std::max(best, lo);
  }
  return best;
}

double TargetFunctional::evaluate_inf_sup_values(const Vector& values) const {
  if (values.size() != num_pieces()) throw DimensionError("piece value count mismatch");
  if (kind_ == Kind::Sup) return values.maxCoeff();
  double best = std::numeric_limits<double>::infinity();
  for (const auto& set : inf_families_) {
    double hi = -std::numeric_limits<double>::infinity();
    for (int j : set) hi = std::max(hi, values(j));
    best = std::min(best, hi);
  }
  return best;
}

void SupAffineEstimator::validate() const {
  if (offsets.size() == 0) throw InputError("sup-affine estimator has no pieces");
  if (gains.rows() != offsets.size()) throw DimensionError("sup-affine estimator: one gain row per offset required");
  if (!offsets.allFinite() || !gains.allFinite()) throw InputError("sup-affine estimator has non-finite entries");
}

double SupAffineEstimator::evaluate(const Vector& y) const {
  if (y.size() != m()) {
    throw DimensionError("estimator expects " + std::to_string(m()) + " observations, got " + std::to_string(y.size()));
  }
  return (offsets + gains * y).maxCoeff();
}

void SupInfAffineEstimator::validate() const {
  if (num_sup <= 0 || num_inf <= 0) throw InputError("sup-inf estimator needs nonempty families");
  const Eigen::Index pieces = static_cast<Eigen::Index>(num_sup) * num_inf;
  if (offsets.size() != pieces || gains.rows() != pieces) {
    throw DimensionError("sup-inf estimator: one affine piece per (a, b) pair required");
  }
  if (!offsets.allFinite() || !gains.allFinite()) throw InputError("sup-inf estimator has non-finite entries");
}

double SupInfAffineEstimator::evaluate(const Vector& y) const {
  if (y.size() != m()) {
    throw DimensionError("estimator expects " + std::to_string(m()) + " observations, got " + std::to_string(y.size()));
  }
  const Vector v = offsets + gains * y;
  double best = -std::numeric_limits<double>::infinity();
  for (int a = 0; a < num_sup; ++a) {
    double lo = std::numeric_limits<double>::infinity();
    for (int b = 0; b < num_inf; ++b) lo = std::min(lo, v(index(a, b)));
    best = std::max(best, lo);
  }
  return best;
}

double eval_sup_linear(const TargetFunctional& target, const Vector& action) {
  if (target.kind() != TargetFunctional::Kind::Sup) throw InputError("eval_sup_linear needs a sup target");
  if (action.size() != target.dim()) throw DimensionError("element dimension does not match the target");
  return target.evaluate(action);
}

double eval_estimator(const Estimator& estimator, const Vector& y) {
  return std::visit([&](const auto& est) { return est.evaluate(y); }, estimator);
}

int estimator_m(const Estimator& estimator) {
  return std::visit([](const auto& est) { return est.m(); }, estimator);
}

IndexFamily combinations(int n, int size) {
  IndexFamily out;
  if (size < 0 || size > n) return out;
  std::vector<int> cur(size);
  for (int i = 0; i < size; ++i) cur[i] = i;
  while (true) {
    out.push_back(cur);
    int k = size - 1;
    while (k >= 0 && cur[k] == n - size + k) --k;
    if (k < 0) break;
    ++cur[k];
    for (int j = k + 1; j < size; ++j) cur[j] = cur[j - 1] + 1;
  }
  return out;
}

namespace {

double binomial(int n, int k) {
  if (k < 0 || k > n) return 0.0;
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return std::round(r);
}

}  // namespace

TargetFunctional lth_largest_target(const Matrix& pieces, int ell, std::size_t cap) {
  const int d = static_cast<int>(pieces.rows());
  if (d == 0) throw InputError("lth_largest needs at least one piece");
  if (ell < 1 || ell > d) {
    throw InputError("lth_largest: l = " + std::to_string(ell) + " outside [1, " + std::to_string(d) + "]");
  }
  const double product = binomial(d, ell) * binomial(d, ell - 1);
  if (product > static_cast<double>(cap)) {
    throw LimitError("lth_largest: |A|*|B| = " + std::to_string(static_cast<long long>(product)) +
                     " exceeds the cap of " + std::to_string(cap));
  }
  return TargetFunctional::sup_inf(pieces, combinations(d, ell), combinations(d, d + 1 - ell));
}

TargetFunctional difference_of_sups_target(const Matrix& mu, const Matrix& nu) {
  if (mu.rows() == 0 || nu.rows() == 0) throw InputError("difference of sups needs nonempty mu and nu");
  if (mu.cols() != nu.cols()) throw DimensionError("mu and nu have different lengths");
  const int p = static_cast<int>(mu.rows());
  const int q = static_cast<int>(nu.rows());
  Matrix pieces(p * q, mu.cols());
  IndexFamily sup_fam(p);
  IndexFamily inf_fam(q);
  for (int i = 0; i < p; ++i) {
    for (int j = 0; j < q; ++j) {
      pieces.row(i * q + j) = mu.row(i) - nu.row(j);
      sup_fam[i].push_back(i * q + j);
      inf_fam[j].push_back(i * q + j);
    }
  }
  return TargetFunctional::sup_inf(std::move(pieces), std::move(sup_fam), std::move(inf_fam));
}

}  // namespace optrec
