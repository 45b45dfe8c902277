#pragma once

// Independent checks of the synthesized programs: sampled lower bounds on a
// fixed estimator's error and on the two-point quantity e-flat, a finite-
// dimensional checker for the refined Hahn-Banach extension, and a combined
// consistency report.
//
// Sampling is split into fixed-size chunks with seeds derived from
// (seed, chunk index); the first n draws are the same whatever n is, so the
// bounds are monotone in the sample count and identical across thread counts.

#include "optrec/functional.hpp"
#include "optrec/io.hpp"
#include "optrec/model.hpp"
#include "optrec/problem.hpp"

#include <cstdint>
#include <optional>
#include <string>

namespace optrec {

struct OracleOptions {
  SamplerOptions sampler;
  int threads = 0;  // 0: hardware concurrency
};

/// max over n draws (f, e) of |gamma(f) - delta(Lambda f + e)|; 0 when n = 0.
double sampled_error(const Problem& problem, const Estimator& estimator, std::size_t n_samples, std::uint64_t seed,
                     const OracleOptions& options = {});

struct EflatBound {
  double value = 0.0;
  std::string note;  // set when the bound is trivially 0
};

/// max over n pairs f', f'' in K with equal (noisy) observations of
/// (gamma(f') - gamma(f''))/2. Pairs lie on chords through a sampled f'
/// along kernel directions (compound directions (z, -Lambda z) with noise).
EflatBound eflat_lower_bound(const Problem& problem, std::size_t n_pairs, std::uint64_t seed,
                             const OracleOptions& options = {});

struct HbResult {
  bool certified = false;
  Vector c;                  // coefficients on eta_1..eta_m
  int witness = -1;          // index i of the single witness mu_i
  double hypothesis_gap = 0; // max over U and the unit box of inf_i mu_i - rho
  std::string message;
};

/// Seeks c with mu_i(v) + sum_k c_k eta_k(v) <= rho(v) for all v, where
/// rho(v) = max_j <rho_j, v>, for some single index i. Throws InputError when
/// inf_i mu_i <= rho fails on U = ker(eta).
HbResult hb_extension_check(const Matrix& mu, const Matrix& rho_pieces, const Matrix& eta,
                            const SolverSettings& settings = {});

/// max over the sampled v of mu_i(v) + c.eta(v) - rho(v); <= 0 for a valid
/// certificate.
double hb_certificate_violation(const Matrix& mu, const Matrix& rho_pieces, const Matrix& eta, const HbResult& result,
                                std::size_t n_points, std::uint64_t seed);

struct ReportOptions {
  std::size_t samples = 100000;
  std::uint64_t seed = 0;
  SolverSettings solver;
  OracleOptions oracle;
};

/// Runs synthesis, the fixed evaluation of `estimator`, both sampling bounds
/// and (for sup targets) the plug-in comparison. Deterministic for a seed.
/// The report's "passed" member is true iff every check passed.
Json consistency_report(const Problem& problem, const EstimatorFile& estimator, const std::string& problem_hash,
                        const ReportOptions& options = {});

/// Relative tolerance for the report's value comparisons.
inline constexpr double kReportTolerance = 1e-6;
/// Relative tolerance for flagging the plug-in estimator as optimal.
inline constexpr double kPluginMatchTolerance = 1e-5;

}  // namespace optrec
