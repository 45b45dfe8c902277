// Acceptance suite: one pass/FAIL line per criterion, exit status 1 when any
// criterion fails. Tolerances are fixed below.

#include "optrec/error.hpp"
#include "optrec/format.hpp"
#include "optrec/io.hpp"
#include "optrec/synthesis.hpp"
#include "optrec/verify.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

using namespace optrec;

namespace {

constexpr int kFixturesPerFamily = 20;
constexpr double kSelfConsistencyTol = 1e-6;    // absolute or relative
constexpr double kSolveSeconds = 2.0;
constexpr std::size_t kSandwichSamples = 100000;
constexpr double kSandwichSlack = 1e-6;
constexpr double kHandFixtureReach = 0.02;      // relative
constexpr double kPluginGapMin = 1e-3;
constexpr double kPluginLowerSlack = 1e-6;
constexpr double kPluginEqualityTol = 1e-5;     // times max(e_hat, 1)
constexpr double kLthOneTol = 1e-6;
constexpr double kMedianGridTol = 2e-2;
constexpr double kMedianSeconds = 30.0;
constexpr int kMedianGrid = 41;
constexpr int kRepresentationVectors = 1000;
constexpr std::size_t kNoiseBallSamples = 100000;
constexpr double kNoiseSamplingSlack = 0.05;    // relative, lower side
constexpr double kNoiseMonotoneTol = 1e-8;
constexpr double kVertexTol = 1e-7;
constexpr int kSublinearPairs = 10000;
constexpr double kSublinearTol = 1e-7;
constexpr double kHbCoefficientTol = 1e-9;
constexpr std::size_t kHbPoints = 10000;
constexpr double kHbViolationTol = 1e-9;

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Outcome {
  bool passed = true;
  std::ostringstream detail;

  void fail(const std::string& what) {
    if (passed) detail << what;
    passed = false;
  }
};

Matrix normal_matrix(int rows, int cols, std::mt19937_64& rng) {
  std::normal_distribution<double> n;
  return Matrix::NullaryExpr(rows, cols, [&] { return n(rng); });
}

int uniform_int(int lo, int hi, std::mt19937_64& rng) {
  return std::uniform_int_distribution<int>(lo, hi)(rng);
}

double uniform_real(double lo, double hi, std::mt19937_64& rng) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

// Scaled box in R^N plus a few mild cuts, L <= 20.
Polytope random_polytope(int n, int max_rows, std::mt19937_64& rng) {
  const int cuts = std::min(max_rows - 2 * n, uniform_int(0, 3, rng));
  Matrix a(2 * n + cuts, n);
  a.setZero();
  for (int i = 0; i < n; ++i) {
    const double s = uniform_real(0.5, 2.0, rng);
    a(i, i) = 1.0 / s;
    a(n + i, i) = -1.0 / s;
  }
  if (cuts > 0) a.bottomRows(cuts) = normal_matrix(cuts, n, rng) * (0.5 / std::sqrt(double(n)));
  return Polytope(a, n);
}

std::vector<Problem> polytope_fixtures(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<Problem> out;
  for (int t = 0; t < kFixturesPerFamily; ++t) {
    const int n = uniform_int(2, 10, rng);
    const int m = uniform_int(0, std::min(4, n), rng);
    const int pieces = uniform_int(1, 5, rng);
    Problem p{random_polytope(n, 20, rng), ObservationMap(normal_matrix(m, n, rng), n),
              TargetFunctional::sup(normal_matrix(pieces, n, rng)), {}};
    if (t % 3 == 2) p.noise = NoiseModel{static_cast<NoiseModel::Norm>(t % 9 / 3), 0.1};
    out.push_back(std::move(p));
  }
  return out;
}

ApproxSet random_approx_set(int dim, int n, std::mt19937_64& rng) {
  const Matrix b = normal_matrix(dim, dim, rng);
  const Matrix gram = b * b.transpose() / dim + 0.5 * Matrix::Identity(dim, dim);
  const Matrix v = normal_matrix(n, dim, rng);
  const double eps = uniform_real(0.5, 2.0, rng);
  const ApproxSet base(v, Vector::Zero(dim), eps, gram);
  Vector perp = base.project_perp(normal_matrix(dim, 1, rng).col(0));
  perp *= 0.5 * eps / base.norm(perp);
  Vector g = perp;
  if (n > 0) g += v.transpose() * normal_matrix(n, 1, rng).col(0);
  return ApproxSet(v, g, eps, gram);
}

std::vector<Problem> hilbert_fixtures(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<Problem> out;
  for (int t = 0; t < kFixturesPerFamily; ++t) {
    const int dim = uniform_int(3, 12, rng);
    const int n = uniform_int(0, 3, rng);
    const int m = uniform_int(std::max(n, 1), 4, rng);
    const int pieces = uniform_int(1, 5, rng);
    out.push_back(Problem{random_approx_set(dim, n, rng), ObservationMap(normal_matrix(m, dim, rng), dim),
                          TargetFunctional::sup(normal_matrix(pieces, dim, rng)), {}});
  }
  return out;
}

Problem fixture(const std::string& name) { return load_problem(std::string(OPTREC_FIXTURE_DIR) + "/" + name).problem; }

std::string describe(const Problem& p) {
  std::ostringstream s;
  s << (is_polytope(p.model) ? "polytope" : "approx") << " dim=" << p.dim() << " m=" << p.m()
    << " pieces=" << p.target.num_pieces();
  if (p.noise) s << " noise=" << NoiseModel::norm_name(p.noise->p) << "/" << format_real(p.noise->radius);
  return s.str();
}

struct Solved {
  Problem problem;
  SynthesisResult result;
  double seconds = 0.0;
};

std::vector<Solved> solve_all(const std::vector<Problem>& problems) {
  std::vector<Solved> out;
  for (const Problem& p : problems) {
    const auto t0 = Clock::now();
    SynthesisResult r = synthesize(p);
    out.push_back({p, std::move(r), seconds_since(t0)});
  }
  return out;
}

// 1. eval_error_fixed(delta_opt) = e_hat.
void self_consistency(const std::vector<Solved>& all, Outcome& o) {
  double worst = 0.0, slowest = 0.0;
  for (const Solved& s : all) {
    const auto t0 = Clock::now();
    const double e = eval_error_fixed(s.problem, s.result.estimator);
    const double secs = std::max(s.seconds, seconds_since(t0));
    slowest = std::max(slowest, secs);
    const double diff = std::abs(e - s.result.e_hat);
    worst = std::max(worst, diff / std::max(1.0, std::abs(s.result.e_hat)));
    if (diff > kSelfConsistencyTol * std::max(1.0, std::abs(s.result.e_hat))) {
      o.fail("mismatch on " + describe(s.problem) + ": " + format_real(e) + " vs " + format_real(s.result.e_hat) + "; ");
    }
    if (secs > kSolveSeconds) o.fail("slow solve on " + describe(s.problem) + "; ");
  }
  o.detail << all.size() << " fixtures, worst relative gap " << format_real(worst) << ", slowest solve "
           << format_real(slowest) << " s";
}

// 2. Sampled lower bounds never exceed e_hat; on the hand fixtures they reach it.
void sandwich(const std::vector<Solved>& all, Outcome& o) {
  double worst_excess = -1e300;
  for (std::size_t i = 0; i < all.size(); ++i) {
    const Solved& s = all[i];
    const double se = sampled_error(s.problem, s.result.estimator, kSandwichSamples, 1000 + i);
    const double ef = eflat_lower_bound(s.problem, kSandwichSamples, 2000 + i).value;
    worst_excess = std::max({worst_excess, se - s.result.e_hat, ef - s.result.e_hat});
    if (se > s.result.e_hat + kSandwichSlack || ef > s.result.e_hat + kSandwichSlack) {
      o.fail("bound above e_hat on " + describe(s.problem) + ": sampled " + format_real(se) + ", eflat " +
             format_real(ef) + ", e_hat " + format_real(s.result.e_hat) + "; ");
    }
  }
  for (const auto& [name, expected] : {std::pair<std::string, double>{"e1_box.json", 1.0}, {"hilbert_line.json", 0.5}}) {
    const Problem p = fixture(name);
    const SynthesisResult r = synthesize(p);
    const double se = sampled_error(p, r.estimator, kSandwichSamples, 7);
    const double ef = eflat_lower_bound(p, kSandwichSamples, 7).value;
    if (std::abs(r.e_hat - expected) > kSelfConsistencyTol) o.fail(name + " e_hat " + format_real(r.e_hat) + "; ");
    if (se < (1 - kHandFixtureReach) * r.e_hat || ef < (1 - kHandFixtureReach) * r.e_hat) {
      o.fail(name + " bounds do not reach e_hat: " + format_real(se) + ", " + format_real(ef) + "; ");
    }
    if (se > r.e_hat + kSandwichSlack || ef > r.e_hat + kSandwichSlack) o.fail(name + " bound above e_hat; ");
    o.detail << name << ": sampled " << format_real(se) << ", eflat " << format_real(ef) << "; ";
  }
  o.detail << all.size() << " random fixtures, max(bound - e_hat) " << format_real(worst_excess);
}

double plugin_error(const Problem& p) {
  return eval_error_fixed(p, plugin_estimator(recovery_map(p), p.target, p.model));
}

// 3. The l_inf plug-in estimator can be strictly suboptimal, never better.
void plugin_gap(const std::vector<Solved>& polytopes, Outcome& o) {
  const Problem p = fixture("linf_plugin_gap.json");
  const double e_hat = synthesize(p).e_hat;
  const double gap = plugin_error(p) - e_hat;
  if (!(gap > kPluginGapMin)) o.fail("shipped fixture gap " + format_real(gap) + "; ");
  double worst = 1e300;
  for (const Solved& s : polytopes) {
    const double d = plugin_error(s.problem) - s.result.e_hat;
    worst = std::min(worst, d);
    if (d < -kPluginLowerSlack) o.fail("plug-in beats e_hat on " + describe(s.problem) + "; ");
  }
  o.detail << "shipped gap " << format_real(gap) << ", min random gap " << format_real(worst);
}

// 4. In the Hilbert setting the plug-in estimator matches e_hat; deviations
// are flagged, not failed.
void plugin_equality(const std::vector<Solved>& hilbert, Outcome& o) {
  int flagged = 0;
  double worst = 0.0;
  for (const Solved& s : hilbert) {
    const double e_plug = plugin_error(s.problem);
    const double dev = std::abs(e_plug - s.result.e_hat) / std::max(s.result.e_hat, 1.0);
    worst = std::max(worst, dev);
    if (dev > kPluginEqualityTol) {
      // A sampled lower bound on the plug-in error above e_hat shows the gap
      // is real rather than a solver artefact.
      const SupAffineEstimator plug = plugin_estimator(recovery_map(s.problem), s.problem.target, s.problem.model);
      const double sampled = sampled_error(s.problem, plug, kSandwichSamples, 4000 + flagged);
      const double sampled_opt = sampled_error(s.problem, s.result.estimator, kSandwichSamples, 5000 + flagged);
      const std::string dump = "plugin_flag_" + std::to_string(flagged++) + ".txt";
      write_file(dump, program_to_string(synthesis_program(s.problem)));
      std::cerr << "flagged plug-in deviation " << format_real(dev) << " on " << describe(s.problem) << ": e_plug "
                << format_real(e_plug) << ", sampled plug-in error " << format_real(sampled) << ", sampled optimal error "
                << format_real(sampled_opt) << ", e_hat "
                << format_real(s.result.e_hat) << "; program in " << dump << "\n";
    }
  }
  o.detail << hilbert.size() << " fixtures, worst relative deviation " << format_real(worst) << ", flagged "
           << flagged;
}

// 5. l = 1 through the sup-inf program equals the sup program; the median
// on the box matches a fiber grid.
void supinf(const std::vector<Solved>& all, Outcome& o) {
  double worst = 0.0;
  for (const Solved& s : all) {
    Problem q = s.problem;
    q.target = lth_largest_target(s.problem.target.pieces(), 1);
    const double e = synthesize_supinf(q).e_hat;
    const double diff = std::abs(e - s.result.e_hat);
    worst = std::max(worst, diff);
    if (diff > kLthOneTol) o.fail("l=1 mismatch on " + describe(s.problem) + "; ");
  }
  const auto t0 = Clock::now();
  const double e_median = synthesize(fixture("median_box.json")).e_hat;
  const double secs = seconds_since(t0);
  // Half the spread of the median over each fiber {f1 = y} of the box.
  double oracle = 0.0;
  auto at = [](int k) { return -1.0 + 2.0 * k / (kMedianGrid - 1); };
  for (int i = 0; i < kMedianGrid; ++i) {
    double hi = -1e300, lo = 1e300;
    for (int j = 0; j < kMedianGrid; ++j) {
      for (int k = 0; k < kMedianGrid; ++k) {
        double v[3] = {at(i), at(j), at(k)};
        std::sort(v, v + 3);
        hi = std::max(hi, v[1]);
        lo = std::min(lo, v[1]);
      }
    }
    oracle = std::max(oracle, 0.5 * (hi - lo));
  }
  if (std::abs(e_median - oracle) > kMedianGridTol) o.fail("median " + format_real(e_median) + " vs grid; ");
  if (secs > kMedianSeconds) o.fail("median solve took " + format_real(secs) + " s; ");
  o.detail << "l=1 worst gap " << format_real(worst) << "; median " << format_real(e_median) << " vs grid "
           << format_real(oracle) << " in " << format_real(secs) << " s";
}

// 6. Sup-inf form = inf-sup form = sorted l-th value, exactly.
void representation(Outcome& o) {
  std::mt19937_64 rng(6);
  std::normal_distribution<double> n;
  long checked = 0;
  for (int d = 1; d <= 6; ++d) {
    for (int l = 1; l <= d; ++l) {
      const TargetFunctional t = lth_largest_target(Matrix::Identity(d, d), l);
      for (int r = 0; r < kRepresentationVectors; ++r) {
        Vector v(d);
        for (int k = 0; k < d; ++k) v(k) = n(rng);
        // Ties too.
        if (r % 10 == 0 && d > 1) v(1) = v(0);
        std::vector<double> sorted(v.data(), v.data() + d);
        std::sort(sorted.begin(), sorted.end(), std::greater<>());
        const double a = t.evaluate_values(v), b = t.evaluate_inf_sup_values(v);
        if (a != sorted[l - 1] || b != sorted[l - 1]) {
          o.fail("d=" + std::to_string(d) + " l=" + std::to_string(l) + "; ");
        }
        ++checked;
      }
    }
  }
  o.detail << checked << " vectors";
}

// 7. r ||c||_{p'} against brute maximization over the noise ball, and e_hat
// nondecreasing in the radius.
void noise(const std::vector<Problem>& polytopes, const std::vector<Problem>& hilbert, Outcome& o) {
  std::mt19937_64 rng(7);
  double worst_ratio = 1.0;
  for (NoiseModel::Norm p : {NoiseModel::Norm::One, NoiseModel::Norm::Two, NoiseModel::Norm::Inf}) {
    for (int m = 1; m <= 4; ++m) {
      const Vector c = normal_matrix(m, 1, rng).col(0);
      const NoiseModel nm{p, 0.3};
      const double exact = augment_noise(c, nm);
      double brute = 0.0;
      for (std::size_t s = 0; s < kNoiseBallSamples; ++s) {
        const Vector e = draw_noise(nm, m, rng);
        if (!noise_contains(nm, e)) o.fail("sample outside the noise ball; ");
        brute = std::max(brute, c.dot(e));
      }
      worst_ratio = std::min(worst_ratio, brute / exact);
      if (brute > exact * (1 + 1e-12) || brute < (1 - kNoiseSamplingSlack) * exact) {
        o.fail(std::string("p=") + NoiseModel::norm_name(p) + " m=" + std::to_string(m) + ": brute " +
               format_real(brute) + " vs " + format_real(exact) + "; ");
      }
    }
  }
  int checked = 0;
  std::vector<Problem> problems;
  for (std::size_t i = 0; i < 6; ++i) {
    problems.push_back(polytopes[i]);
    problems.push_back(hilbert[i]);
  }
  for (const Problem& base : problems) {
    if (base.m() == 0) continue;
    for (NoiseModel::Norm p : {NoiseModel::Norm::One, NoiseModel::Norm::Two, NoiseModel::Norm::Inf}) {
      double last = -1e300;
      for (double r : {0.0, 0.1, 0.5}) {
        Problem q = base;
        q.noise = NoiseModel{p, r};
        const double e = synthesize(q).e_hat;
        if (e < last - kNoiseMonotoneTol) o.fail("decrease on " + describe(q) + "; ");
        last = e;
      }
      ++checked;
    }
  }
  o.detail << "min brute/exact " << format_real(worst_ratio) << "; " << checked << " radius sweeps";
}

double vertex_support(const Polytope& k, const Vector& g) {
  const int n = k.dim(), l = k.num_constraints();
  const Matrix& a = k.constraints();
  double best = -1e300;
  for (const auto& rows : combinations(l, n)) {
    Matrix sub(n, n);
    for (int i = 0; i < n; ++i) sub.row(i) = a.row(rows[i]);
    Eigen::FullPivLU<Matrix> lu(sub);
    if (!lu.isInvertible()) continue;
    const Vector v = lu.solve(Vector::Ones(n));
    if ((a * v).maxCoeff() <= 1.0 + 1e-9) best = std::max(best, g.dot(v));
  }
  return best;
}

// 8. Polytope support against vertex enumeration; sublinearity of both
// support functions.
void support_oracles(Outcome& o) {
  std::mt19937_64 rng(8);
  double worst = 0.0;
  int vertex_cases = 0;
  for (int n = 1; n <= 3; ++n) {
    for (int t = 0; t < 30; ++t) {
      const Polytope k = random_polytope(n, 8, rng);
      const Vector g = normal_matrix(n, 1, rng).col(0);
      const double diff = std::abs(support_polytope(k, g) - vertex_support(k, g));
      worst = std::max(worst, diff);
      if (diff > kVertexTol) o.fail("vertex mismatch n=" + std::to_string(n) + "; ");
      ++vertex_cases;
    }
  }
  const Polytope box = random_polytope(3, 8, rng);
  const ApproxSet approx = random_approx_set(5, 2, rng);
  double worst_violation = -1e300;
  std::uniform_real_distribution<double> scale(0.0, 3.0);
  for (int t = 0; t < kSublinearPairs; ++t) {
    const bool poly = t % 2 == 0;
    const ModelSet model = poly ? ModelSet(box) : ModelSet(approx);
    const int dim = model_dim(model);
    Vector h1 = normal_matrix(dim, 1, rng).col(0), h2 = normal_matrix(dim, 1, rng).col(0);
    if (!poly) {
      h1 = approx.project_perp(h1);
      h2 = approx.project_perp(h2);
    }
    const double s = scale(rng);
    const double s1 = support(model, h1), s2 = support(model, h2), s12 = support(model, h1 + h2);
    const double scaled = support(model, Vector(s * h1));
    const double tol = kSublinearTol * std::max(1.0, std::abs(s1) + std::abs(s2));
    const double violation = std::max(s12 - s1 - s2, std::abs(scaled - s * s1) - s * tol);
    worst_violation = std::max(worst_violation, s12 - s1 - s2);
    if (violation > tol) o.fail(std::string(poly ? "polytope" : "approx") + " sublinearity; ");
  }
  o.detail << vertex_cases << " vertex cases, worst gap " << format_real(worst) << "; " << kSublinearPairs
           << " pairs, max subadditivity excess " << format_real(worst_violation);
}

// 9. Hahn-Banach checker.
void hahn_banach(Outcome& o) {
  Matrix mu(1, 2), rho(2, 2), eta(1, 2);
  mu << 1, 0;
  rho << 1, 0, -1, 0;
  eta << 0, 1;
  const HbResult hand = hb_extension_check(mu, rho, eta);
  if (!hand.certified || std::abs(hand.c(0)) > kHbCoefficientTol) o.fail("hand example not c = 0; ");
  double worst = hb_certificate_violation(mu, rho, eta, hand, kHbPoints, 0);
  std::mt19937_64 rng(9);
  int certified = 0, attempted = 0;
  for (int t = 0; t < 30; ++t) {
    const int n = uniform_int(2, 4, rng);
    const int pieces = uniform_int(2, 5, rng);
    const int m = uniform_int(1, n - 1, rng);
    const Matrix r = normal_matrix(pieces, n, rng);
    const Matrix e = normal_matrix(m, n, rng);
    Vector lam = normal_matrix(pieces, 1, rng).col(0).cwiseAbs();
    lam /= lam.sum();
    Matrix mus(2, n);
    mus.row(0) = (r.transpose() * lam).transpose() + (e.transpose() * normal_matrix(m, 1, rng).col(0)).transpose();
    mus.row(1) = normal_matrix(1, n, rng);
    ++attempted;
    HbResult res;
    try {
      res = hb_extension_check(mus, r, e);
    } catch (const InputError&) {
      continue;
    }
    if (!res.certified) continue;
    ++certified;
    const double v = hb_certificate_violation(mus, r, e, res, kHbPoints, t);
    worst = std::max(worst, v);
    if (v > kHbViolationTol) o.fail("certificate violated by " + format_real(v) + "; ");
  }
  if (certified == 0) o.fail("no random certificates; ");
  o.detail << "hand c = " << format_real(hand.c(0)) << "; " << certified << "/" << attempted
           << " random certificates, max violation " << format_real(worst);
}

// 10. Byte-identical estimator files and reports across runs.
void determinism(Outcome& o) {
  int compared = 0;
  for (const char* name : {"e1_box.json", "hilbert_plugin.json", "median_box.json", "e1_box_noisy.json"}) {
    std::string files[2], reports[2];
    for (int run = 0; run < 2; ++run) {
      const LoadedProblem lp = load_problem(std::string(OPTREC_FIXTURE_DIR) + "/" + name);
      const SynthesisResult r = synthesize(lp.problem);
      const EstimatorFile f{r.estimator, {r.e_hat, SolverSettings{}.tol, lp.hash, kToolVersion, 7}};
      files[run] = canonical_json(estimator_to_json(f));
      ReportOptions ro;
      ro.samples = 20000;
      ro.seed = 7;
      const EstimatorFile reread = estimator_from_json(parse_json(files[run]));
      reports[run] = canonical_json(consistency_report(lp.problem, reread, lp.hash, ro));
    }
    if (files[0] != files[1]) o.fail(std::string(name) + " estimator differs; ");
    if (reports[0] != reports[1]) o.fail(std::string(name) + " report differs; ");
    ++compared;
  }
  o.detail << compared << " fixtures compared";
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* name;
    std::function<void(Outcome&)> run;
  };

  const std::vector<Problem> polytopes = polytope_fixtures(101);
  const std::vector<Problem> hilbert = hilbert_fixtures(202);
  std::vector<Solved> solved_poly, solved_hilbert, solved_all;
  std::string setup_error;
  try {
    solved_poly = solve_all(polytopes);
    solved_hilbert = solve_all(hilbert);
  } catch (const std::exception& e) {
    setup_error = e.what();
  }
  solved_all = solved_poly;
  solved_all.insert(solved_all.end(), solved_hilbert.begin(), solved_hilbert.end());

  const std::vector<Criterion> criteria = {
      {1, "self-consistency", [&](Outcome& o) { self_consistency(solved_all, o); }},
      {2, "optimality sandwich", [&](Outcome& o) { sandwich(solved_all, o); }},
      {3, "plug-in gap (l_inf)", [&](Outcome& o) { plugin_gap(solved_poly, o); }},
      {4, "plug-in equality (Hilbert)", [&](Outcome& o) { plugin_equality(solved_hilbert, o); }},
      {5, "sup-inf correctness", [&](Outcome& o) { supinf(solved_all, o); }},
      {6, "representation identity", [&](Outcome& o) { representation(o); }},
      {7, "noise identity", [&](Outcome& o) { noise(polytopes, hilbert, o); }},
      {8, "support-function oracles", [&](Outcome& o) { support_oracles(o); }},
      {9, "Hahn-Banach checker", [&](Outcome& o) { hahn_banach(o); }},
      {10, "determinism", [&](Outcome& o) { determinism(o); }},
  };

  bool all = true;
  for (const Criterion& c : criteria) {
    Outcome o;
    const auto t0 = Clock::now();
    if (!setup_error.empty() && c.id <= 5) {
      o.fail("random fixture synthesis failed: " + setup_error);
    } else {
      try {
        c.run(o);
      } catch (const std::exception& e) {
        o.fail(std::string("exception: ") + e.what());
      }
    }
    all = all && o.passed;
    std::printf("criterion %2d %-28s %s  [%.1f s] %s\n", c.id, c.name, o.passed ? "pass" : "FAIL", seconds_since(t0),
                o.detail.str().c_str());
    std::fflush(stdout);
  }
  return all ? 0 : 1;
}
