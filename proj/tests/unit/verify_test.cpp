#include <doctest.h>

#include "optrec/error.hpp"
#include "optrec/synthesis.hpp"
#include "optrec/verify.hpp"

using namespace optrec;

namespace {

Polytope unit_box(int n) {
  Matrix a(2 * n, n);
  a << Matrix::Identity(n, n), -Matrix::Identity(n, n);
  return Polytope(a, n);
}

Matrix row(std::initializer_list<double> v) {
  Matrix m(1, static_cast<int>(v.size()));
  int j = 0;
  for (double x : v) m(0, j++) = x;
  return m;
}

Problem e1_problem() {
  return Problem{unit_box(2), ObservationMap(row({1, 0}), 2), TargetFunctional::sup(Matrix::Identity(2, 2)), {}};
}

Problem hilbert_problem() {
  return Problem{ApproxSet(row({1, 0}), Vector::Zero(2), 0.5, Matrix::Identity(2, 2)), ObservationMap(row({1, 0}), 2),
                 TargetFunctional::sup(row({0, 1})), {}};
}

}  // namespace

TEST_CASE("sampled error") {
  const Problem p = e1_problem();
  const SynthesisResult r = synthesize(p);
  const double s = sampled_error(p, r.estimator, 100000, 7);
  CHECK(s > 1.0 - 0.02);
  CHECK(s <= 1.0 + 1e-9);
  CHECK(sampled_error(p, r.estimator, 0, 7) == 0.0);

  SUBCASE("monotone in the sample count and independent of threads") {
    double last = 0.0;
    for (std::size_t n : {1, 10, 1000, 5000, 9000}) {
      const double v = sampled_error(p, r.estimator, n, 3);
      CHECK(v >= last);
      last = v;
    }
    OracleOptions one;
    one.threads = 1;
    CHECK(sampled_error(p, r.estimator, 20000, 5, one) == sampled_error(p, r.estimator, 20000, 5));
  }
  SUBCASE("exact recovery samples zero") {
    const Problem full{unit_box(2), ObservationMap(Matrix::Identity(2, 2), 2), TargetFunctional::sup(Matrix::Identity(2, 2)),
                       {}};
    const SupAffineEstimator plug = plugin_estimator(recovery_map(full), full.target, full.model);
    CHECK(sampled_error(full, plug, 1000, 1) < 1e-7);
  }
}

TEST_CASE("e-flat lower bound") {
  const EflatBound e1 = eflat_lower_bound(e1_problem(), 100000, 7);
  CHECK(e1.value > 1.0 - 0.02);
  CHECK(e1.value <= 1.0 + 1e-9);

  const Problem full{unit_box(2), ObservationMap(Matrix::Identity(2, 2), 2), TargetFunctional::sup(Matrix::Identity(2, 2)),
                     {}};
  const EflatBound zero = eflat_lower_bound(full, 1000, 1);
  CHECK(zero.value == 0.0);
  CHECK(!zero.note.empty());

  const EflatBound h = eflat_lower_bound(hilbert_problem(), 20000, 2);
  CHECK(h.value > 0.5 - 0.02);
  CHECK(h.value <= 0.5 + 1e-9);

  SUBCASE("with noise the bound stays below the optimum") {
    Problem noisy = e1_problem();
    noisy.noise = NoiseModel{NoiseModel::Norm::Two, 0.3};
    const double e_hat = synthesize(noisy).e_hat;
    const double lb = eflat_lower_bound(noisy, 50000, 4).value;
    CHECK(lb <= e_hat + 1e-7);
    CHECK(lb > e_hat - 0.05);
  }
}

TEST_CASE("Hahn-Banach extension checker") {
  SUBCASE("absolute value") {
    const Matrix mu = row({1, 0});
    Matrix rho(2, 2);
    rho << 1, 0, -1, 0;
    const Matrix eta = row({0, 1});
    const HbResult r = hb_extension_check(mu, rho, eta);
    REQUIRE(r.certified);
    CHECK(std::abs(r.c(0)) <= 1e-9);
    CHECK(hb_certificate_violation(mu, rho, eta, r, 10000, 1) <= 1e-9);
  }
  SUBCASE("no constraints") {
    Matrix mu(1, 2);
    mu << 0.5, 0;
    Matrix rho(2, 2);
    rho << 1, 0, -1, 0;
    const HbResult r = hb_extension_check(mu, rho, Matrix(0, 2));
    CHECK(r.certified);
    CHECK(r.c.size() == 0);
    Matrix big(1, 2);
    big << 2, 0;
    CHECK_THROWS_AS(hb_extension_check(big, rho, Matrix(0, 2)), InputError);
  }
  SUBCASE("no single witness") {
    Matrix mu(2, 2);
    mu << 1, 0, -1, 0;
    const Matrix rho = Matrix::Zero(1, 2);
    const HbResult r = hb_extension_check(mu, rho, row({0, 1}));
    CHECK(!r.certified);
    CHECK(r.message == "no single-witness certificate");
  }
  SUBCASE("violated hypothesis") {
    CHECK_THROWS_AS(hb_extension_check(row({1, 0}), Matrix::Zero(1, 2), row({0, 1})), InputError);
  }
  SUBCASE("random certificates hold") {
    std::mt19937_64 rng(9);
    std::normal_distribution<double> normal;
    int certified = 0;
    for (int t = 0; t < 20; ++t) {
      const int n = 3;
      const Matrix rho = Matrix::NullaryExpr(4, n, [&] { return normal(rng); });
      const Matrix eta = Matrix::NullaryExpr(1, n, [&] { return normal(rng); });
      // mu inside conv(rho) shifted along eta satisfies the hypothesis.
      Vector lam = Vector::NullaryExpr(4, [&] { return std::abs(normal(rng)); });
      lam /= lam.sum();
      const Matrix mu = (rho.transpose() * lam + 0.7 * eta.row(0).transpose()).transpose();
      const HbResult r = hb_extension_check(mu, rho, eta);
      REQUIRE(r.certified);
      ++certified;
      CHECK(hb_certificate_violation(mu, rho, eta, r, 10000, t) <= 1e-9);
    }
    CHECK(certified == 20);
  }
}

TEST_CASE("consistency report") {
  const Problem p = e1_problem();
  const SynthesisResult r = synthesize(p);
  EstimatorFile f{r.estimator, {r.e_hat, 1e-8, "h", kToolVersion, 7}};
  ReportOptions opt;
  opt.samples = 20000;
  opt.seed = 7;
  const Json report = consistency_report(p, f, "h", opt);
  CHECK(report["passed"].get<bool>());
  CHECK(report["values"]["e_hat"].get<double>() == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(canonical_json(report) == canonical_json(consistency_report(p, f, "h", opt)));

  auto& est = std::get<SupAffineEstimator>(f.estimator);
  est.offsets.array() += 1.0;
  const Json bad = consistency_report(p, f, "h", opt);
  CHECK(!bad["passed"].get<bool>());
  bool named = false;
  for (const auto& c : bad["checks"]) {
    if (c["name"] == "fixed_eval_le_ehat") named = !c["passed"].get<bool>();
  }
  CHECK(named);

  const Problem h = hilbert_problem();
  const SynthesisResult rh = synthesize(h);
  const Json hr = consistency_report(h, {rh.estimator, {rh.e_hat, 1e-8, "x", kToolVersion, 0}}, "x", opt);
  CHECK(hr["passed"].get<bool>());
  CHECK(hr["flags"]["plugin_optimal"].get<bool>());
}
