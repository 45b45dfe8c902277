#pragma once

// Assembly and solution of the estimation programs:
//
//  * optimal synthesis for sup-linear targets (per piece i*: a gain vector c,
//    slacks e', e'' with e' + e'' <= 2e and two support-function bounds), and
//    its sup-inf generalization with one block per (a, b) pair;
//  * the worst-case error of a fixed (sup-)affine estimator;
//  * the full-recovery maps (componentwise LP for polytopes, Chebyshev map
//    for approximability sets) and the plug-in estimators built from them.
//
// Support-function bounds are expanded per model set: LP duality for the
// polytope (s >= 0, sum s_l a_l = eta, sum s <= bound), and for the
// approximability set eta in V-perp plus eps ||R eta|| <= bound - <eta, g>_G.
// Observation noise adds r ||c||_{p'} to every bound.

#include "optrec/conic.hpp"
#include "optrec/functional.hpp"
#include "optrec/model.hpp"
#include "optrec/problem.hpp"

#include <cstddef>
#include <optional>
#include <string>

namespace optrec {

struct ProgramStats {
  int num_vars = 0;
  int num_rows = 0;
  int num_blocks = 0;
  int iterations = 0;
  double solve_seconds = 0.0;
};

struct SynthesisResult {
  double e_hat = 0.0;
  Estimator estimator;
  Vector e_prime;   // one per block
  Vector e_second;  // one per block
  ProgramStats stats;
};

constexpr std::size_t kDefaultEnumerationCap = 20000;

/// Optimal sup-affine estimator for a Sup target, either model kind.
SynthesisResult synthesize_sup(const Problem& problem, const SolverSettings& settings = {});
/// Same, insisting on the model kind.
SynthesisResult synthesize_sup_polytope(const Problem& problem, const SolverSettings& settings = {});
SynthesisResult synthesize_sup_approx(const Problem& problem, const SolverSettings& settings = {});

/// Optimal sup-inf-affine estimator; Sup targets are treated through their
/// trivial families (singletons, everything).
SynthesisResult synthesize_supinf(const Problem& problem, const SolverSettings& settings = {});

/// synthesize_sup for Sup targets, synthesize_supinf otherwise.
SynthesisResult synthesize(const Problem& problem, const SolverSettings& settings = {});

/// The program synthesize() would solve.
ConicProgram synthesis_program(const Problem& problem);

/// sup_{f in K (, e in noise ball)} |gamma(f) - delta(Lambda f + e)| for a fixed
/// estimator. Sup-inf estimators are handled by enumerating selections, which
/// is capped at `cap` blocks.
double eval_error_fixed(const Problem& problem, const Estimator& estimator, const SolverSettings& settings = {},
                        std::size_t cap = kDefaultEnumerationCap);

ConicProgram fixed_error_program(const Problem& problem, const Estimator& estimator,
                                 std::size_t cap = kDefaultEnumerationCap);

/// y -> intercept + gains * y, in element coordinates.
struct AffineRecoveryMap {
  Vector intercept;
  Matrix gains;                      // dim x m
  std::optional<double> error;       // optimal worst-case error when computed by LP
  std::optional<double> condition;   // condition number of C^T C (Chebyshev map)

  Vector apply(const Vector& y) const { return intercept + gains * y; }
};

/// Componentwise optimal recovery in l_inf^N over the polytope.
AffineRecoveryMap full_recovery_polytope(const Polytope& k, const ObservationMap& observations,
                                         const std::optional<NoiseModel>& noise = std::nullopt,
                                         const SolverSettings& settings = {});

/// y -> g + Delta_cheb(y - Lambda g) for the approximability set.
AffineRecoveryMap chebyshev_map(const ApproxSet& k, const ObservationMap& observations);

/// The recovery map matching the problem's model kind.
AffineRecoveryMap recovery_map(const Problem& problem, const SolverSettings& settings = {});

/// gamma composed with the recovery map: b_i = gamma_i(intercept),
/// (z_i)_k = gamma_i(gains column k).
SupAffineEstimator plugin_estimator(const AffineRecoveryMap& map, const TargetFunctional& target,
                                    const ModelSet& model);

}  // namespace optrec
