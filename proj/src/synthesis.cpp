#include "optrec/synthesis.hpp"

#include "optrec/error.hpp"
#include "optrec/format.hpp"

#include <chrono>
#include <cmath>
#include <sstream>

namespace optrec {

void Problem::validate() const {
  const int d = dim();
  if (observations.dim() != d) {
    throw DimensionError("observations have length " + std::to_string(observations.dim()) + ", model dimension is " +
                         std::to_string(d));
  }
  if (target.dim() != d) {
    throw DimensionError("target pieces have length " + std::to_string(target.dim()) + ", model dimension is " +
                         std::to_string(d));
  }
  if (noise) noise->validate();
}

namespace {

using Exprs = std::vector<LinExpr>;

std::string block_name(const char* prefix, int a, int b = -1) {
  std::string s = std::string(prefix) + "[" + std::to_string(a);
  if (b >= 0) s += "," + std::to_string(b);
  return s + "]";
}

std::string format_vector(const Vector& v) {
  std::string s = "(";
  for (int i = 0; i < v.size(); ++i) s += (i ? ", " : "") + format_real(v(i));
  return s + ")";
}

// Emits support-function bounds for one problem into a builder.
class Assembler {
 public:
  Assembler(ProgramBuilder& b, const Problem& problem) : b_(b), p_(problem) {
    if (const auto* k = std::get_if<ApproxSet>(&problem.model)) {
      gv_ = k->gram() * k->basis().transpose();
      gg_ = k->gram() * k->center();
    }
  }

  int dim() const { return p_.dim(); }
  int m() const { return p_.m(); }

  Exprs zeros(int n) const { return Exprs(n, LinExpr(0.0)); }

  // eta += weight * v
  static void axpy(Exprs& eta, const LinExpr& weight, const Vector& v) {
    for (int j = 0; j < v.size(); ++j) {
      if (v(j) != 0.0) eta[j] += weight * v(j);
    }
  }

  // Simplex weights over `size` indices; singletons become the constant 1
  // when pinned.
  Exprs simplex(const std::string& name, int size, bool pin_singletons, std::vector<VarBlock>* deferred = nullptr) {
    if (size == 1 && pin_singletons) return {LinExpr(1.0)};
    const VarBlock blk = b_.add_vars(name, size);
    if (deferred) {
      deferred->push_back(blk);
    } else {
      simplex_constraint(b_, blk);
    }
    Exprs out;
    for (int i = 0; i < size; ++i) out.emplace_back(blk[i]);
    return out;
  }

  // ||| eta |||_K + r ||noise_c||_{p'} <= bound
  void support_le(const Exprs& eta, const Exprs& noise_c, LinExpr bound, const std::string& label) {
    // Zero rows first so certificates can be read off the leading rows.
    if (const auto* poly = std::get_if<Polytope>(&p_.model)) {
      const int big_l = poly->num_constraints();
      const VarBlock s = b_.add_vars(label + ".s", big_l);
      for (int j = 0; j < dim(); ++j) {
        LinExpr row = eta[j];
        for (int l = 0; l < big_l; ++l) row.add(s[l], -poly->constraints()(l, j));
        b_.add_zero(row);
      }
      bound -= noise_term(noise_c, label);
      for (int l = 0; l < big_l; ++l) {
        bound.add(s[l], -1.0);
        b_.add_nonneg(s[l]);
      }
      b_.add_nonneg(bound);
      return;
    }
    const auto& k = std::get<ApproxSet>(p_.model);
    for (int l = 0; l < k.n(); ++l) b_.add_zero(dot(gv_.col(l), eta));
    bound -= noise_term(noise_c, label);
    Exprs cone{bound - dot(gg_, eta)};
    const Matrix& r = k.factor();
    for (int i = 0; i < dim(); ++i) cone.push_back(dot(r.row(i).transpose(), eta) * k.eps());
    b_.add_soc(cone);
  }

  ProgramBuilder& builder() { return b_; }

 private:
  static LinExpr dot(const Vector& coeffs, const Exprs& eta) {
    LinExpr out;
    for (int j = 0; j < coeffs.size(); ++j) {
      if (coeffs(j) != 0.0) out += eta[j] * coeffs(j);
    }
    return out;
  }

  LinExpr noise_term(const Exprs& c, const std::string& label) {
    if (!p_.noisy()) return LinExpr(0.0);
    const NoiseModel& noise = *p_.noise;
    bool constant = true;
    for (const auto& e : c) constant = constant && e.terms().empty();
    if (constant) {
      Vector v(m());
      for (int k = 0; k < m(); ++k) v(k) = c[k].constant();
      return LinExpr(augment_noise(v, noise));
    }
    switch (noise.p) {
      case NoiseModel::Norm::Inf: {  // l1 norm of c
        const VarBlock u = b_.add_vars(label + ".noise", m());
        LinExpr total;
        for (int k = 0; k < m(); ++k) {
          b_.add_nonneg(LinExpr(u[k]) - c[k]);
          b_.add_nonneg(LinExpr(u[k]) + c[k]);
          total.add(u[k], noise.radius);
        }
        return total;
      }
      case NoiseModel::Norm::One: {  // l_inf norm of c
        const Var v = b_.add_var(label + ".noise");
        for (int k = 0; k < m(); ++k) {
          b_.add_nonneg(LinExpr(v) - c[k]);
          b_.add_nonneg(LinExpr(v) + c[k]);
        }
        return LinExpr(v) * noise.radius;
      }
      case NoiseModel::Norm::Two: {
        const Var t = b_.add_var(label + ".noise");
        Exprs cone{LinExpr(t)};
        cone.insert(cone.end(), c.begin(), c.end());
        b_.add_soc(cone);
        return LinExpr(t) * noise.radius;
      }
    }
    return LinExpr(0.0);
  }

  ProgramBuilder& b_;
  const Problem& p_;
  Matrix gv_;  // G V^T
  Vector gg_;  // G g
};

// --- synthesis ------------------------------------------------------------

struct SynthesisLayout {
  Var e;
  std::vector<Var> e1, e2;
  std::vector<VarBlock> c;
  IndexFamily sup_families, inf_families;
  bool sup_form = true;
};

// Observation part of eta: sign * sum_k c_k u_k, and the matching noise
// coefficients sign * c.
void add_observations(Exprs& eta, Exprs& noise, const VarBlock& c, const Matrix& u, double sign) {
  for (int k = 0; k < c.size; ++k) {
    Assembler::axpy(eta, LinExpr(c[k]) * sign, u.row(k).transpose());
    noise[k] += LinExpr(c[k]) * sign;
  }
}

SynthesisLayout assemble_synthesis(ProgramBuilder& b, const Problem& p, bool sup_form) {
  Assembler as(b, p);
  SynthesisLayout out;
  out.sup_form = sup_form;
  out.sup_families = p.target.effective_sup_families();
  out.inf_families = p.target.effective_inf_families();
  const Matrix& w = p.target.pieces();
  const Matrix& u = p.observations.rows();
  out.e = b.add_var("e");

  auto block = [&](int a, int bb, const std::string& tag) {
    const Var e1 = b.add_var("e'" + tag);
    const Var e2 = b.add_var("e''" + tag);
    const VarBlock c = b.add_vars("c" + tag, p.m());
    b.add_le(LinExpr(e1) + LinExpr(e2), LinExpr(out.e) * 2.0);

    // sum_{i in I_a} sigma_i w_i - sum c_k u_k  (sigma = 1 on a singleton)
    const auto& ia = out.sup_families[a];
    Exprs eta1 = as.zeros(p.dim());
    Exprs noise1 = as.zeros(p.m());
    const Exprs sigma = as.simplex("sigma" + tag, static_cast<int>(ia.size()), sup_form);
    for (std::size_t t = 0; t < ia.size(); ++t) Assembler::axpy(eta1, sigma[t], w.row(ia[t]).transpose());
    add_observations(eta1, noise1, c, u, -1.0);
    as.support_le(eta1, noise1, LinExpr(e1), "s" + tag);

    // -sum_{j in J_b} tau_j w_j + sum c_k u_k
    const auto& jb = out.inf_families[bb];
    Exprs eta2 = as.zeros(p.dim());
    Exprs noise2 = as.zeros(p.m());
    const Exprs tau = as.simplex("tau" + tag, static_cast<int>(jb.size()), sup_form);
    for (std::size_t t = 0; t < jb.size(); ++t) Assembler::axpy(eta2, -tau[t], w.row(jb[t]).transpose());
    add_observations(eta2, noise2, c, u, 1.0);
    as.support_le(eta2, noise2, LinExpr(e2), "t" + tag);

    out.e1.push_back(e1);
    out.e2.push_back(e2);
    out.c.push_back(c);
  };

  for (int a = 0; a < static_cast<int>(out.sup_families.size()); ++a) {
    for (int bb = 0; bb < static_cast<int>(out.inf_families.size()); ++bb) {
      block(a, bb, sup_form ? block_name("", a) : block_name("", a, bb));
    }
  }
  b.minimize(out.e);
  return out;
}

// Checks one support bound of one block on its own; returns a description
// when it can never be finite.
std::string diagnose_side(const Problem& p, int a, int bb, bool first, bool sup_form) {
  ProgramBuilder b;
  Assembler as(b, p);
  const Matrix& w = p.target.pieces();
  const Var bound = b.add_var("bound");
  const VarBlock c = b.add_vars("c", p.m());
  const std::vector<int> set = first ? p.target.effective_sup_families()[a] : p.target.effective_inf_families()[bb];
  std::vector<VarBlock> deferred;
  const Exprs weights = as.simplex("weights", static_cast<int>(set.size()), sup_form, &deferred);
  Exprs eta = as.zeros(p.dim());
  Exprs noise = as.zeros(p.m());
  for (std::size_t t = 0; t < set.size(); ++t) Assembler::axpy(eta, weights[t] * (first ? 1.0 : -1.0), w.row(set[t]).transpose());
  add_observations(eta, noise, c, p.observations.rows(), first ? -1.0 : 1.0);
  as.support_le(eta, noise, LinExpr(bound), "s");
  for (const auto& blk : deferred) simplex_constraint(b, blk);
  b.minimize(bound);
  const Solution sol = solve(b.build());
  if (sol.status != SolveStatus::Infeasible) return {};

  std::ostringstream msg;
  const std::string where = sup_form ? "piece i*=" + std::to_string(a) : "block (a*=" + std::to_string(a) + ", b*=" + std::to_string(bb) + ")";
  msg << where << (first ? ", first" : ", second") << " support bound: ";
  if (const auto* poly = std::get_if<Polytope>(&p.model)) {
    msg << "the support function is +inf for every choice of observation weights";
    Vector d = -sol.dual.head(p.dim());
    if (d.norm() > 0.0) {
      d /= d.norm();
      const double scale = std::max(1.0, poly->num_constraints() ? poly->constraints().cwiseAbs().maxCoeff() : 1.0);
      if (poly->num_constraints() == 0 || (poly->constraints() * d).maxCoeff() <= 1e-7 * scale) {
        msg << "; the model set is unbounded along the direction " << format_vector(d);
      }
    }
  } else {
    msg << "no observation weights place the residual functional in V-perp (support +inf)";
  }
  return msg.str();
}

std::string diagnose(const Problem& p, bool sup_form) {
  const int na = static_cast<int>(p.target.effective_sup_families().size());
  const int nb = static_cast<int>(p.target.effective_inf_families().size());
  for (int a = 0; a < na; ++a) {
    for (int bb = 0; bb < nb; ++bb) {
      for (bool first : {true, false}) {
        std::string d = diagnose_side(p, a, bb, first, sup_form);
        if (!d.empty()) return d;
      }
    }
  }
  return "the program is infeasible but no single block could be isolated";
}

SynthesisResult run_synthesis(const Problem& p, bool sup_form, const SolverSettings& settings) {
  p.validate();
  ProgramBuilder b;
  const SynthesisLayout layout = assemble_synthesis(b, p, sup_form);
  const ConicProgram program = b.build();

  const auto t0 = std::chrono::steady_clock::now();
  const Solution sol = solve(program, settings);
  const auto t1 = std::chrono::steady_clock::now();

  if (sol.status != SolveStatus::Optimal) {
    const std::string diag = sol.status == SolveStatus::Infeasible ? diagnose(p, sup_form) : std::string{};
    throw ProgramFailure(sol.status, std::string("synthesis program ended with status ") + status_name(sol.status),
                         diag, program_to_string(program));
  }

  const Vector& x = sol.primal;
  const int blocks = static_cast<int>(layout.e1.size());
  SynthesisResult out;
  const double e = x(layout.e.index);
  out.e_hat = std::max(e, 0.0);
  out.e_prime.resize(blocks);
  out.e_second.resize(blocks);
  Vector offsets(blocks);
  Matrix gains(blocks, p.m());
  for (int k = 0; k < blocks; ++k) {
    out.e_prime(k) = x(layout.e1[k].index);
    out.e_second(k) = x(layout.e2[k].index);
    offsets(k) = e - out.e_second(k);
    if (p.m() > 0) gains.row(k) = layout.c[k].values(x).transpose();
  }
  if (sup_form) {
    out.estimator = SupAffineEstimator{offsets, gains};
  } else {
    SupInfAffineEstimator est;
    est.num_sup = static_cast<int>(layout.sup_families.size());
    est.num_inf = static_cast<int>(layout.inf_families.size());
    est.offsets = offsets;
    est.gains = gains;
    est.sup_families = layout.sup_families;
    est.inf_families = layout.inf_families;
    out.estimator = std::move(est);
  }
  out.stats.num_vars = program.num_vars;
  out.stats.num_rows = program.num_rows();
  out.stats.num_blocks = blocks;
  out.stats.iterations = sol.iterations;
  out.stats.solve_seconds = std::chrono::duration<double>(t1 - t0).count();
  return out;
}

// --- fixed-estimator error ------------------------------------------------

// Uniform view of an estimator as pieces indexed by (a', b').
struct PieceTable {
  int num_sup = 0;
  int num_inf = 0;
  Vector offsets;
  Matrix gains;

  int index(int a, int b) const { return a * num_inf + b; }
};

PieceTable piece_table(const Estimator& est) {
  PieceTable t;
  if (const auto* s = std::get_if<SupAffineEstimator>(&est)) {
    s->validate();
    t.num_sup = s->num_pieces();
    t.num_inf = 1;
    t.offsets = s->offsets;
    t.gains = s->gains;
  } else {
    const auto& si = std::get<SupInfAffineEstimator>(est);
    si.validate();
    t.num_sup = si.num_sup;
    t.num_inf = si.num_inf;
    t.offsets = si.offsets;
    t.gains = si.gains;
  }
  return t;
}

void assemble_fixed(ProgramBuilder& b, const Problem& p, const Estimator& est, std::size_t cap) {
  p.validate();
  const PieceTable t = piece_table(est);
  if (t.gains.cols() != p.m()) {
    throw DimensionError("estimator expects " + std::to_string(t.gains.cols()) + " observations, the problem has " +
                         std::to_string(p.m()));
  }
  const IndexFamily sup_fam = p.target.effective_sup_families();
  const IndexFamily inf_fam = p.target.effective_inf_families();
  const double selections = std::pow(static_cast<double>(t.num_inf), t.num_sup);
  const double blocks = static_cast<double>(sup_fam.size()) * selections + static_cast<double>(t.num_sup) * inf_fam.size();
  if (blocks > static_cast<double>(cap)) {
    throw LimitError("fixed-estimator evaluation needs " + format_real(blocks) + " constraint blocks, above the cap of " +
                     std::to_string(cap));
  }

  Assembler as(b, p);
  const Matrix& w = p.target.pieces();
  // Lambda^* z for every estimator piece.
  const Matrix lz = t.gains * p.observations.rows();  // pieces x dim
  const Var e = b.add_var("e");

  // gamma - delta <= e: one block per a in A and selection phi: A' -> B'.
  std::vector<int> phi(t.num_sup, 0);
  for (int a = 0; a < static_cast<int>(sup_fam.size()); ++a) {
    std::fill(phi.begin(), phi.end(), 0);
    int sel = 0;
    while (true) {
      const std::string tag = block_name("", a, sel);
      const Exprs sigma = as.simplex("sigma" + tag, static_cast<int>(sup_fam[a].size()), true);
      const Exprs rho = as.simplex("rho" + tag, t.num_sup, true);
      Exprs eta = as.zeros(p.dim());
      Exprs noise = as.zeros(p.m());
      LinExpr bound(e);
      for (std::size_t i = 0; i < sup_fam[a].size(); ++i) Assembler::axpy(eta, sigma[i], w.row(sup_fam[a][i]).transpose());
      for (int ap = 0; ap < t.num_sup; ++ap) {
        const int piece = t.index(ap, phi[ap]);
        Assembler::axpy(eta, -rho[ap], lz.row(piece).transpose());
        for (int k = 0; k < p.m(); ++k) noise[k] += rho[ap] * -t.gains(piece, k);
        bound += rho[ap] * t.offsets(piece);
      }
      as.support_le(eta, noise, bound, "s" + tag);

      int pos = 0;
      while (pos < t.num_sup && ++phi[pos] == t.num_inf) phi[pos++] = 0;
      if (pos == t.num_sup) break;
      ++sel;
    }
  }

  // delta - gamma <= e: one block per a' in A' and b in B.
  for (int ap = 0; ap < t.num_sup; ++ap) {
    for (int bb = 0; bb < static_cast<int>(inf_fam.size()); ++bb) {
      const std::string tag = block_name("'", ap, bb);
      const Exprs sigma = as.simplex("sigma" + tag, t.num_inf, true);
      const Exprs tau = as.simplex("tau" + tag, static_cast<int>(inf_fam[bb].size()), true);
      Exprs eta = as.zeros(p.dim());
      Exprs noise = as.zeros(p.m());
      LinExpr bound(e);
      for (int bp = 0; bp < t.num_inf; ++bp) {
        const int piece = t.index(ap, bp);
        Assembler::axpy(eta, sigma[bp], lz.row(piece).transpose());
        for (int k = 0; k < p.m(); ++k) noise[k] += sigma[bp] * t.gains(piece, k);
        bound -= sigma[bp] * t.offsets(piece);
      }
      for (std::size_t j = 0; j < inf_fam[bb].size(); ++j) Assembler::axpy(eta, -tau[j], w.row(inf_fam[bb][j]).transpose());
      as.support_le(eta, noise, bound, "t" + tag);
    }
  }
  b.minimize(e);
}

}  // namespace

SynthesisResult synthesize_sup(const Problem& problem, const SolverSettings& settings) {
  if (problem.target.kind() != TargetFunctional::Kind::Sup) throw InputError("synthesize_sup needs a sup target");
  return run_synthesis(problem, true, settings);
}

SynthesisResult synthesize_sup_polytope(const Problem& problem, const SolverSettings& settings) {
  if (!is_polytope(problem.model)) throw InputError("expected a polytope model");
  return synthesize_sup(problem, settings);
}

SynthesisResult synthesize_sup_approx(const Problem& problem, const SolverSettings& settings) {
  if (is_polytope(problem.model)) throw InputError("expected an approximability model");
  return synthesize_sup(problem, settings);
}

SynthesisResult synthesize_supinf(const Problem& problem, const SolverSettings& settings) {
  return run_synthesis(problem, false, settings);
}

SynthesisResult synthesize(const Problem& problem, const SolverSettings& settings) {
  return problem.target.kind() == TargetFunctional::Kind::Sup ? synthesize_sup(problem, settings)
                                                              : synthesize_supinf(problem, settings);
}

ConicProgram synthesis_program(const Problem& problem) {
  problem.validate();
  ProgramBuilder b;
  assemble_synthesis(b, problem, problem.target.kind() == TargetFunctional::Kind::Sup);
  return b.build();
}

ConicProgram fixed_error_program(const Problem& problem, const Estimator& estimator, std::size_t cap) {
  ProgramBuilder b;
  assemble_fixed(b, problem, estimator, cap);
  return b.build();
}

double eval_error_fixed(const Problem& problem, const Estimator& estimator, const SolverSettings& settings,
                        std::size_t cap) {
  const ConicProgram program = fixed_error_program(problem, estimator, cap);
  const Solution sol = solve(program, settings);
  if (sol.status != SolveStatus::Optimal) {
    std::string diag;
    if (sol.status == SolveStatus::Infeasible) {
      diag = "the estimator's error is unbounded over the model set (some support function is +inf)";
    }
    throw ProgramFailure(sol.status, std::string("fixed-estimator program ended with status ") + status_name(sol.status),
                         diag, program_to_string(program));
  }
  return std::max(sol.objective, 0.0);
}

// --- recovery maps --------------------------------------------------------

AffineRecoveryMap full_recovery_polytope(const Polytope& k, const ObservationMap& observations,
                                         const std::optional<NoiseModel>& noise, const SolverSettings& settings) {
  const int n = k.dim();
  const int m = observations.m();
  if (observations.dim() != n) throw DimensionError("observations do not match the polytope dimension");
  // The assembler only needs the model, the observations and the noise.
  const Problem p{k, observations, TargetFunctional::sup(Matrix::Identity(1, n)), noise};
  ProgramBuilder b;
  Assembler as(b, p);
  const Var e = b.add_var("e");
  const VarBlock c0 = b.add_vars("c0", n);
  std::vector<VarBlock> ck;  // row j of the gain matrix
  for (int j = 0; j < n; ++j) ck.push_back(b.add_vars(block_name("c", j), m));
  const Matrix& u = observations.rows();
  for (int j = 0; j < n; ++j) {
    for (double sign : {1.0, -1.0}) {
      // sign * (v_j - sum_k c_jk u_k)
      Exprs eta = as.zeros(n);
      Exprs nz = as.zeros(m);
      eta[j] += LinExpr(sign);
      add_observations(eta, nz, ck[j], u, -sign);
      as.support_le(eta, nz, LinExpr(e) + LinExpr(c0[j]) * sign, block_name(sign > 0 ? "s" : "t", j));
    }
  }
  b.minimize(e);
  const ConicProgram program = b.build();
  const Solution sol = solve(program, settings);
  if (sol.status != SolveStatus::Optimal) {
    std::string diag;
    if (sol.status == SolveStatus::Infeasible) diag = "the polytope is unbounded in a direction the observations miss";
    throw ProgramFailure(sol.status, std::string("full-recovery LP ended with status ") + status_name(sol.status), diag,
                         program_to_string(program));
  }
  AffineRecoveryMap map;
  map.intercept = c0.values(sol.primal);
  map.gains.resize(n, m);
  for (int j = 0; j < n; ++j) {
    if (m > 0) map.gains.row(j) = ck[j].values(sol.primal).transpose();
  }
  map.error = std::max(sol.objective, 0.0);
  return map;
}

AffineRecoveryMap chebyshev_map(const ApproxSet& k, const ObservationMap& observations) {
  const int n = k.dim();
  const int m = observations.m();
  if (observations.dim() != n) throw DimensionError("observations do not match the approximability set");
  const Matrix& g = k.gram();
  AffineRecoveryMap map;
  if (m == 0) {
    map.intercept = k.center();
    map.gains.resize(n, 0);
    return map;
  }
  const Matrix& u = observations.rows();
  // Orthonormalize the u_k in the G-metric: U~ = L^{-1} U with U G U^T = L L^T.
  const Matrix ugu = u * g * u.transpose();
  Eigen::LLT<Matrix> llt(ugu);
  Eigen::SelfAdjointEigenSolver<Matrix> ues(ugu);
  if (llt.info() != Eigen::Success || ues.eigenvalues().minCoeff() <= 1e-12 * ues.eigenvalues().maxCoeff()) {
    throw InputError("observation functionals are linearly dependent in the Gram metric");
  }
  const Matrix l_inv = llt.matrixL().solve(Matrix::Identity(m, m));
  const Matrix ut = l_inv * u;  // m x dim, rows G-orthonormal
  Matrix d_tilde;               // dim x m, acting on orthonormalized data
  if (k.n() == 0) {
    d_tilde = ut.transpose();
  } else {
    const Matrix c = ut * g * k.basis().transpose();  // cross-Gramian, m x n
    const Matrix ctc = c.transpose() * c;
    Eigen::SelfAdjointEigenSolver<Matrix> es(ctc);
    const double top = es.eigenvalues().maxCoeff();
    const double bottom = es.eigenvalues().minCoeff();
    const double cond = bottom > 0.0 ? top / bottom : std::numeric_limits<double>::infinity();
    if (!(top > 0.0) || !(bottom > 1e-12 * top)) {
      throw InputError("C^T C is rank deficient (condition estimate " + format_real(cond) +
                       "); the observations do not determine the V component");
    }
    map.condition = cond;
    const Matrix pc = ctc.ldlt().solve(c.transpose());  // (C^T C)^{-1} C^T, n x m
    const Matrix a_part = Matrix::Identity(m, m) - c * pc;
    d_tilde = ut.transpose() * a_part + k.basis().transpose() * pc;
  }
  map.gains = d_tilde * l_inv;
  map.intercept = k.center() - map.gains * (u * (g * k.center()));
  return map;
}

AffineRecoveryMap recovery_map(const Problem& problem, const SolverSettings& settings) {
  problem.validate();
  if (const auto* poly = std::get_if<Polytope>(&problem.model)) {
    return full_recovery_polytope(*poly, problem.observations, problem.noise, settings);
  }
  return chebyshev_map(std::get<ApproxSet>(problem.model), problem.observations);
}

SupAffineEstimator plugin_estimator(const AffineRecoveryMap& map, const TargetFunctional& target,
                                    const ModelSet& model) {
  if (target.kind() != TargetFunctional::Kind::Sup) throw InputError("plug-in estimators need a sup target");
  if (map.intercept.size() != target.dim() || map.gains.rows() != target.dim()) {
    throw DimensionError("recovery map does not match the target dimension");
  }
  const Matrix& w = target.pieces();
  SupAffineEstimator est;
  est.offsets = w * action(model, map.intercept);
  est.gains = w * action(model, map.gains);
  return est;
}

}  // namespace optrec
