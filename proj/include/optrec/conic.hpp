#pragma once

// Conic programs in the standard form
//
//     minimize  <c, x>   subject to   b - A x  in  K_1 x K_2 x ... x K_p
//
// where every K_j is a zero cone, a nonnegative orthant or a second-order
// cone {(t, u) : ||u||_2 <= t}. Every estimation program in the library is
// assembled through ProgramBuilder into this form and handed to solve().

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

namespace optrec {

enum class ConeKind { Zero, NonNeg, SecondOrder };

const char* cone_tag(ConeKind kind);

struct ConeSegment {
  ConeKind kind;
  int dim;

  bool operator==(const ConeSegment&) const = default;
};

struct Entry {
  int row;
  int col;
  double value;

  bool operator==(const Entry&) const = default;
};

class ConicProgram {
 public:
  int num_vars = 0;
  Eigen::VectorXd objective;
  std::vector<Entry> entries;  // sorted by (row, col), no duplicates
  Eigen::VectorXd offset;      // b
  std::vector<ConeSegment> cones;
  std::vector<std::string> var_names;

  int num_rows() const { return static_cast<int>(offset.size()); }

  /// Throws std::invalid_argument when the cone partition, the dimensions or
  /// the entries are inconsistent.
  void validate() const;

  Eigen::SparseMatrix<double> matrix() const;
};

enum class SolveStatus { Optimal, Infeasible, Unbounded, NumericalTrouble };

const char* status_name(SolveStatus status);

struct Residuals {
  double primal = 0.0;  // relative primal infeasibility
  double dual = 0.0;    // relative dual infeasibility
  double gap = 0.0;     // absolute complementarity gap s'z
};

struct Solution {
  SolveStatus status = SolveStatus::NumericalTrouble;
  double objective = 0.0;
  Eigen::VectorXd primal;
  Eigen::VectorXd dual;   // one multiplier per row of A
  Eigen::VectorXd slack;  // b - A x
  Residuals residuals;
  int iterations = 0;
};

struct SolverSettings {
  double tol = 1e-8;
  int max_iterations = 150;
  std::string backend = "ipm";

  /// Settings with the backend taken from the OPTREC_SOLVER environment
  /// variable when it is set.
  static SolverSettings from_environment(double tol = 1e-8);
};

/// Solves the program with the configured backend. Infeasible and unbounded
/// programs are reported through the status, never thrown.
Solution solve(const ConicProgram& program, const SolverSettings& settings = {});

/// Names of the compiled-in backends.
std::vector<std::string> solver_backends();

// --- Assembly -------------------------------------------------------------

struct Var {
  int index = -1;
};

/// Affine expression in the program variables.
class LinExpr {
 public:
  LinExpr() = default;
  LinExpr(double constant) : constant_(constant) {}  // NOLINT(google-explicit-constructor)
  LinExpr(Var v) { terms_.emplace_back(v.index, 1.0); }  // NOLINT(google-explicit-constructor)

  LinExpr& add(Var v, double coeff) {
    if (coeff != 0.0) terms_.emplace_back(v.index, coeff);
    return *this;
  }
  LinExpr& add(double c) {
    constant_ += c;
    return *this;
  }

  LinExpr& operator+=(const LinExpr& other);
  LinExpr& operator-=(const LinExpr& other);
  LinExpr& operator*=(double s);

  double constant() const { return constant_; }
  const std::vector<std::pair<int, double>>& terms() const { return terms_; }

  double evaluate(const Eigen::VectorXd& x) const;

 private:
  double constant_ = 0.0;
  std::vector<std::pair<int, double>> terms_;
};

LinExpr operator+(LinExpr lhs, const LinExpr& rhs);
LinExpr operator-(LinExpr lhs, const LinExpr& rhs);
LinExpr operator-(LinExpr e);
LinExpr operator*(double s, LinExpr e);
LinExpr operator*(LinExpr e, double s);

/// A contiguous range of variables.
struct VarBlock {
  int start = 0;
  int size = 0;

  Var operator[](int i) const { return Var{start + i}; }
  Eigen::VectorXd values(const Eigen::VectorXd& x) const { return x.segment(start, size); }
};

/// Collects variables and constraints, then emits a ConicProgram with one
/// canonical cone order: the zero rows, then the nonnegative rows, then every
/// second-order cone in insertion order.
class ProgramBuilder {
 public:
  Var add_var(std::string name);
  VarBlock add_vars(const std::string& name, int count);

  /// expr == 0
  void add_zero(const LinExpr& expr);
  /// expr >= 0
  void add_nonneg(const LinExpr& expr);
  /// lhs <= rhs
  void add_le(const LinExpr& lhs, const LinExpr& rhs) { add_nonneg(rhs - lhs); }
  /// ||(exprs[1], ..., exprs[k-1])||_2 <= exprs[0]
  void add_soc(const std::vector<LinExpr>& exprs);

  void minimize(const LinExpr& objective);

  int num_vars() const { return static_cast<int>(names_.size()); }

  ConicProgram build() const;

 private:
  std::vector<std::string> names_;
  std::vector<LinExpr> zero_rows_;
  std::vector<LinExpr> nonneg_rows_;
  std::vector<std::vector<LinExpr>> soc_blocks_;
  LinExpr objective_;
};

/// Constrains a block to the standard simplex: one zero row for the sum and
/// one nonnegative row per variable.
void simplex_constraint(ProgramBuilder& builder, const VarBlock& block);

// --- Text dump ------------------------------------------------------------

/// Line-oriented dump: `conic v1`, `var n`, `obj j v`, `row tag dim`,
/// `A i j v`, `b i v`. Reals use 17 significant digits.
void write_program(std::ostream& out, const ConicProgram& program);
std::string program_to_string(const ConicProgram& program);
ConicProgram parse_program(std::istream& in);
ConicProgram parse_program(const std::string& text);

}  // namespace optrec
