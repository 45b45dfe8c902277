#include "optrec/verify.hpp"

#include "optrec/error.hpp"
#include "optrec/format.hpp"
#include "optrec/synthesis.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <random>
#include <thread>

namespace optrec {

namespace {

constexpr std::size_t kChunk = 4096;
constexpr double kUnboundedChord = 10.0;
constexpr int kChordPoints = 9;

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t chunk_seed(std::uint64_t seed, std::size_t chunk) {
  return splitmix64(splitmix64(seed) ^ (0xd1b54a32d192ed03ULL * (chunk + 1)));
}

// max over n draws, chunked; `draw(rng)` returns one value.
template <class Draw>
double chunked_max(std::size_t n, std::uint64_t seed, int threads, const Draw& draw) {
  if (n == 0) return 0.0;
  const std::size_t chunks = (n + kChunk - 1) / kChunk;
  std::vector<double> best(chunks, 0.0);
  std::vector<std::exception_ptr> errors(chunks);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t c = next++; c < chunks; c = next++) {
      try {
        std::mt19937_64 rng(chunk_seed(seed, c));
        const std::size_t count = std::min(kChunk, n - c * kChunk);
        double m = 0.0;
        for (std::size_t i = 0; i < count; ++i) m = std::max(m, draw(rng));
        best[c] = m;
      } catch (...) {
        errors[c] = std::current_exception();
      }
    }
  };
  int t = threads > 0 ? threads : static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  t = static_cast<int>(std::min<std::size_t>(static_cast<std::size_t>(t), chunks));
  std::vector<std::thread> pool;
  for (int i = 1; i < t; ++i) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return *std::max_element(best.begin(), best.end());
}

// Lambda acting on element coordinates: rows u_k^T G (u_k^T for the polytope).
Matrix observation_operator(const Problem& p) {
  const Matrix& u = p.observations.rows();
  if (u.rows() == 0) return Matrix(0, p.dim());
  return action(p.model, Matrix(u.transpose())).transpose();
}

double relative(double tol, double scale) { return tol * std::max(1.0, std::abs(scale)); }

Json check(const std::string& name, bool passed, double lhs, const std::string& relation, double rhs, double tol) {
  return Json{{"name", name}, {"passed", passed}, {"lhs", lhs}, {"relation", relation}, {"rhs", rhs}, {"tolerance", tol}};
}

}  // namespace

double sampled_error(const Problem& problem, const Estimator& estimator, std::size_t n_samples, std::uint64_t seed,
                     const OracleOptions& options) {
  problem.validate();
  if (estimator_m(estimator) != problem.m()) throw DimensionError("estimator does not match the observation count");
  if (n_samples == 0) return 0.0;
  const ModelSampler sampler(problem.model, options.sampler);
  const bool noisy = problem.noisy();
  return chunked_max(n_samples, seed, options.threads, [&](std::mt19937_64& rng) {
    const Vector f = sampler.draw(rng);
    const Vector a = action(problem.model, f);
    Vector y = problem.observations.observe(a);
    if (noisy) y += draw_noise(*problem.noise, problem.m(), rng);
    return std::abs(problem.target.evaluate(a) - eval_estimator(estimator, y));
  });
}

EflatBound eflat_lower_bound(const Problem& problem, std::size_t n_pairs, std::uint64_t seed,
                             const OracleOptions& options) {
  problem.validate();
  EflatBound out;
  const Matrix lam = observation_operator(problem);
  const bool noisy = problem.noisy();
  Matrix kernel;
  if (!noisy) {
    if (lam.rows() == 0) {
      kernel = Matrix::Identity(problem.dim(), problem.dim());
    } else {
      Eigen::FullPivLU<Matrix> lu(lam);
      if (lu.rank() == problem.dim()) {
        out.note = "the observation map is injective; every pair coincides";
        return out;
      }
      kernel = lu.kernel();
    }
  }
  if (n_pairs == 0) return out;
  const ModelSampler sampler(problem.model, options.sampler);
  out.value = chunked_max(n_pairs, seed, options.threads, [&](std::mt19937_64& rng) {
    const Vector f = sampler.draw(rng);
    Vector z;
    double lo = -std::numeric_limits<double>::infinity();
    double hi = std::numeric_limits<double>::infinity();
    if (noisy) {
      // (f + t z, e - t Lambda z) keeps the observation fixed.
      const Vector e = draw_noise(*problem.noise, problem.m(), rng);
      z = random_direction(problem.dim(), rng);
      const Chord nc = noise_chord(*problem.noise, e, -(lam * z));
      lo = nc.lo;
      hi = nc.hi;
    } else {
      z = kernel * random_direction(static_cast<int>(kernel.cols()), rng);
      const double zn = z.norm();
      if (!(zn > 0.0)) return 0.0;
      z /= zn;
    }
    const Chord c = chord(problem.model, f, z);
    lo = std::max({lo, c.lo, -kUnboundedChord});
    hi = std::min({hi, c.hi, kUnboundedChord});
    if (!(hi >= lo)) return 0.0;
    double vmin = std::numeric_limits<double>::infinity();
    double vmax = -vmin;
    auto visit = [&](double t) {
      const double v = problem.target.evaluate(action(problem.model, Vector(f + t * z)));
      vmin = std::min(vmin, v);
      vmax = std::max(vmax, v);
    };
    visit(0.0);
    for (int k = 0; k < kChordPoints; ++k) visit(lo + (hi - lo) * k / (kChordPoints - 1));
    return (vmax - vmin) / 2;
  });
  return out;
}

HbResult hb_extension_check(const Matrix& mu, const Matrix& rho_pieces, const Matrix& eta,
                            const SolverSettings& settings) {
  const int n = static_cast<int>(mu.cols());
  if (mu.rows() == 0 || rho_pieces.rows() == 0) throw InputError("mu and rho need at least one piece each");
  if (rho_pieces.cols() != n || (eta.rows() > 0 && eta.cols() != n)) {
    throw DimensionError("mu, rho and eta must share the dimension");
  }
  const int m = static_cast<int>(eta.rows());
  HbResult out;

  // Hypothesis: max over v in U, |v|_inf <= 1 of min_i mu_i v - max_j rho_j v.
  {
    ProgramBuilder b;
    const VarBlock v = b.add_vars("v", n);
    const Var a = b.add_var("a");
    const Var r = b.add_var("r");
    auto dot = [&](const Vector& w) {
      LinExpr e;
      for (int k = 0; k < n; ++k) e.add(v[k], w(k));
      return e;
    };
    for (int k = 0; k < m; ++k) b.add_zero(dot(eta.row(k).transpose()));
    for (int i = 0; i < mu.rows(); ++i) b.add_le(LinExpr(a), dot(mu.row(i).transpose()));
    for (int j = 0; j < rho_pieces.rows(); ++j) b.add_le(dot(rho_pieces.row(j).transpose()), LinExpr(r));
    for (int k = 0; k < n; ++k) {
      b.add_le(LinExpr(v[k]), LinExpr(1.0));
      b.add_le(LinExpr(-1.0), LinExpr(v[k]));
    }
    b.minimize(LinExpr(r) - LinExpr(a));
    const Solution sol = solve(b.build(), settings);
    if (sol.status != SolveStatus::Optimal) {
      throw ProgramFailure(sol.status, std::string("hypothesis LP ended with status ") + status_name(sol.status));
    }
    out.hypothesis_gap = -sol.objective;
    if (out.hypothesis_gap > 100.0 * settings.tol) {
      throw InputError("hypothesis violated: inf_i mu_i(v) exceeds rho(v) by " + format_real(out.hypothesis_gap) +
                       " on the unit box of U");
    }
  }

  // Single witness i: mu_i + eta^T c must lie in conv{rho_j}.
  for (int i = 0; i < mu.rows(); ++i) {
    ProgramBuilder b;
    const VarBlock lambda = b.add_vars("lambda", static_cast<int>(rho_pieces.rows()));
    const VarBlock c = b.add_vars("c", m);
    const VarBlock t = b.add_vars("t", m);
    for (int k = 0; k < n; ++k) {
      LinExpr row(-mu(i, k));
      for (int j = 0; j < rho_pieces.rows(); ++j) row.add(lambda[j], rho_pieces(j, k));
      for (int l = 0; l < m; ++l) row.add(c[l], -eta(l, k));
      b.add_zero(row);
    }
    simplex_constraint(b, lambda);
    LinExpr total;
    for (int l = 0; l < m; ++l) {
      b.add_le(LinExpr(c[l]), LinExpr(t[l]));
      b.add_le(-LinExpr(c[l]), LinExpr(t[l]));
      total.add(t[l], 1.0);
    }
    b.minimize(total);
    const Solution sol = solve(b.build(), settings);
    if (sol.status == SolveStatus::Infeasible) continue;
    if (sol.status != SolveStatus::Optimal) {
      throw ProgramFailure(sol.status, std::string("witness LP ended with status ") + status_name(sol.status));
    }
    // Polish: minimum-norm corrections of (lambda, c) onto the equality
    // system, clamping lambda to the simplex in between.
    const int r = static_cast<int>(rho_pieces.rows());
    Matrix sys = Matrix::Zero(n + 1, r + m);
    sys.topLeftCorner(n, r) = rho_pieces.transpose();
    if (m > 0) sys.topRightCorner(n, m) = -eta.transpose();
    sys.bottomLeftCorner(1, r).setOnes();
    Vector rhs(n + 1);
    rhs << mu.row(i).transpose(), 1.0;
    Vector x(r + m);
    x << lambda.values(sol.primal), c.values(sol.primal);
    // Entries of lambda that the solver left near zero are pinned there.
    const double floor = 1e-9 * x.head(r).maxCoeff();
    Matrix active = sys;
    for (int j = 0; j < r; ++j) {
      if (x(j) <= floor) {
        x(j) = 0.0;
        active.col(j).setZero();
      }
    }
    const Eigen::CompleteOrthogonalDecomposition<Matrix> cod(active);
    for (int pass = 0; pass < 3; ++pass) x += cod.solve(Vector(rhs - sys * x));
    if ((x.head(r).array() < 0.0).any()) continue;
    const double residual = (sys * x - rhs).lpNorm<Eigen::Infinity>();
    if (residual > 1e-12 * std::max(1.0, rhs.lpNorm<Eigen::Infinity>())) continue;
    Vector cv = x.tail(m);
    for (int l = 0; l < m; ++l) {
      if (std::abs(cv(l)) < 1e-12) cv(l) = 0.0;
    }
    out.certified = true;
    out.c = cv;
    out.witness = i;
    out.message = "certified with witness index " + std::to_string(i);
    return out;
  }
  out.message = "no single-witness certificate";
  return out;
}

double hb_certificate_violation(const Matrix& mu, const Matrix& rho_pieces, const Matrix& eta, const HbResult& result,
                                std::size_t n_points, std::uint64_t seed) {
  if (!result.certified) throw InputError("no certificate to check");
  const int n = static_cast<int>(mu.cols());
  const Vector lin = mu.row(result.witness).transpose() + (eta.rows() > 0 ? Vector(eta.transpose() * result.c)
                                                                          : Vector(Vector::Zero(n)));
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  double worst = -std::numeric_limits<double>::infinity();
  for (std::size_t s = 0; s < n_points; ++s) {
    const Vector v = Vector::NullaryExpr(n, [&] { return unit(rng); });
    worst = std::max(worst, lin.dot(v) - (rho_pieces * v).maxCoeff());
  }
  return worst;
}

Json consistency_report(const Problem& problem, const EstimatorFile& estimator, const std::string& problem_hash,
                        const ReportOptions& options) {
  Json report;
  report["problem_hash"] = problem_hash;
  report["estimator_problem_hash"] = estimator.metadata.problem_hash;
  report["samples"] = options.samples;
  report["seed"] = options.seed;
  report["solver_tol"] = options.solver.tol;
  report["tolerance"] = kReportTolerance;
  Json checks = Json::array();
  Json values;
  Json flags = Json::object();

  const SynthesisResult synth = synthesize(problem, options.solver);
  const double e_hat = synth.e_hat;
  const double tol = relative(kReportTolerance, e_hat);
  values["e_hat"] = e_hat;
  values["e_hat_file"] = estimator.metadata.e_hat;

  const double e_delta = eval_error_fixed(problem, estimator.estimator, options.solver);
  values["e_delta"] = e_delta;
  checks.push_back(check("fixed_eval_le_ehat", e_delta <= e_hat + tol, e_delta, "<=", e_hat, tol));
  checks.push_back(check("ehat_matches_file", std::abs(estimator.metadata.e_hat - e_hat) <= tol,
                         estimator.metadata.e_hat, "==", e_hat, tol));
  checks.push_back(check("problem_hash_matches", estimator.metadata.problem_hash == problem_hash, 0, "==", 0, 0));
  checks.back()["lhs"] = estimator.metadata.problem_hash;
  checks.back()["rhs"] = problem_hash;

  const double sampled = sampled_error(problem, estimator.estimator, options.samples, options.seed, options.oracle);
  values["sampled_error"] = sampled;
  checks.push_back(check("sampled_error_le_fixed_eval", sampled <= e_delta + tol, sampled, "<=", e_delta, tol));

  const EflatBound eflat = eflat_lower_bound(problem, options.samples, options.seed, options.oracle);
  values["eflat_lower_bound"] = eflat.value;
  if (!eflat.note.empty()) report["eflat_note"] = eflat.note;
  checks.push_back(check("eflat_le_ehat", eflat.value <= e_hat + tol, eflat.value, "<=", e_hat, tol));

  if (problem.target.kind() == TargetFunctional::Kind::Sup) {
    const SupAffineEstimator plug = plugin_estimator(recovery_map(problem, options.solver), problem.target, problem.model);
    const double e_plug = eval_error_fixed(problem, plug, options.solver);
    values["e_plug"] = e_plug;
    values["plugin_gap"] = e_plug - e_hat;
    checks.push_back(check("plugin_ge_ehat", e_plug >= e_hat - tol, e_plug, ">=", e_hat, tol));
    flags["plugin_optimal"] = std::abs(e_plug - e_hat) <= kPluginMatchTolerance * std::max(e_hat, 1.0);
  }

  bool passed = true;
  for (const auto& c : checks) passed = passed && c["passed"].get<bool>();
  report["values"] = values;
  report["checks"] = checks;
  report["flags"] = flags;
  report["passed"] = passed;
  return report;
}

}  // namespace optrec
