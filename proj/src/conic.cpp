#include "optrec/conic.hpp"

#include "optrec/format.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <istream>
#include <map>
#include <sstream>
#include <stdexcept>

namespace optrec {

const char* cone_tag(ConeKind kind) {
  switch (kind) {
    case ConeKind::Zero:
      return "zero";
    case ConeKind::NonNeg:
      return "nonneg";
    case ConeKind::SecondOrder:
      return "soc";
  }
  return "?";
}

const char* status_name(SolveStatus status) {
  switch (status) {
    case SolveStatus::Optimal:
      return "optimal";
    case SolveStatus::Infeasible:
      return "infeasible";
    case SolveStatus::Unbounded:
      return "unbounded";
    case SolveStatus::NumericalTrouble:
      return "numerical_trouble";
  }
  return "?";
}

void ConicProgram::validate() const {
  if (num_vars < 0 || objective.size() != num_vars) {
    throw std::invalid_argument("conic program: objective length does not match variable count");
  }
  if (!var_names.empty() && static_cast<int>(var_names.size()) != num_vars) {
    throw std::invalid_argument("conic program: variable name map has the wrong size");
  }
  int rows = 0;
  for (const auto& cone : cones) {
    if (cone.dim < 1) throw std::invalid_argument("conic program: cone segment of dimension < 1");
    rows += cone.dim;
  }
  if (rows != offset.size()) {
    throw std::invalid_argument("conic program: cone dimensions do not partition the rows");
  }
  for (std::size_t k = 0; k < entries.size(); ++k) {
    const auto& e = entries[k];
    if (e.row < 0 || e.row >= rows || e.col < 0 || e.col >= num_vars) {
      throw std::invalid_argument("conic program: matrix entry out of range");
    }
    if (!std::isfinite(e.value)) throw std::invalid_argument("conic program: non-finite matrix entry");
    if (k > 0) {
      const auto& p = entries[k - 1];
      if (std::pair(p.row, p.col) >= std::pair(e.row, e.col)) {
        throw std::invalid_argument("conic program: entries not sorted or duplicated");
      }
    }
  }
  if (!objective.allFinite() || !offset.allFinite()) {
    throw std::invalid_argument("conic program: non-finite objective or offset");
  }
}

Eigen::SparseMatrix<double> ConicProgram::matrix() const {
  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(entries.size());
  for (const auto& e : entries) trips.emplace_back(e.row, e.col, e.value);
  Eigen::SparseMatrix<double> a(num_rows(), num_vars);
  a.setFromTriplets(trips.begin(), trips.end());
  return a;
}

SolverSettings SolverSettings::from_environment(double tol) {
  SolverSettings s;
  s.tol = tol;
  if (const char* env = std::getenv("OPTREC_SOLVER"); env != nullptr && *env != '\0') {
    s.backend = env;
  }
  return s;
}

// --- LinExpr --------------------------------------------------------------

LinExpr& LinExpr::operator+=(const LinExpr& other) {
  constant_ += other.constant_;
  terms_.insert(terms_.end(), other.terms_.begin(), other.terms_.end());
  return *this;
}

LinExpr& LinExpr::operator-=(const LinExpr& other) {
  constant_ -= other.constant_;
  for (const auto& [idx, c] : other.terms_) terms_.emplace_back(idx, -c);
  return *this;
}

LinExpr& LinExpr::operator*=(double s) {
  constant_ *= s;
  for (auto& t : terms_) t.second *= s;
  return *this;
}

double LinExpr::evaluate(const Eigen::VectorXd& x) const {
  double v = constant_;
  for (const auto& [idx, c] : terms_) v += c * x(idx);
  return v;
}

LinExpr operator+(LinExpr lhs, const LinExpr& rhs) { return lhs += rhs; }
LinExpr operator-(LinExpr lhs, const LinExpr& rhs) { return lhs -= rhs; }
LinExpr operator-(LinExpr e) { return e *= -1.0; }
LinExpr operator*(double s, LinExpr e) { return e *= s; }
LinExpr operator*(LinExpr e, double s) { return e *= s; }

// --- ProgramBuilder -------------------------------------------------------

Var ProgramBuilder::add_var(std::string name) {
  names_.push_back(std::move(name));
  return Var{static_cast<int>(names_.size()) - 1};
}

VarBlock ProgramBuilder::add_vars(const std::string& name, int count) {
  VarBlock block{num_vars(), count};
  for (int i = 0; i < count; ++i) names_.push_back(name + "[" + std::to_string(i) + "]");
  return block;
}

void ProgramBuilder::add_zero(const LinExpr& expr) { zero_rows_.push_back(expr); }

void ProgramBuilder::add_nonneg(const LinExpr& expr) { nonneg_rows_.push_back(expr); }

void ProgramBuilder::add_soc(const std::vector<LinExpr>& exprs) {
  if (exprs.empty()) throw std::invalid_argument("second-order cone needs at least one row");
  soc_blocks_.push_back(exprs);
}

void ProgramBuilder::minimize(const LinExpr& objective) { objective_ = objective; }

namespace {

// Row `expr in cone` becomes b_i = constant, A_i = -coefficients.
void emit_row(const LinExpr& expr, int row, std::vector<Entry>& entries, Eigen::VectorXd& offset) {
  std::map<int, double> merged;
  for (const auto& [idx, c] : expr.terms()) merged[idx] += c;
  for (const auto& [idx, c] : merged) {
    if (c != 0.0) entries.push_back({row, idx, -c});
  }
  offset(row) = expr.constant();
}

}  // namespace

ConicProgram ProgramBuilder::build() const {
  ConicProgram p;
  p.num_vars = num_vars();
  p.var_names = names_;
  p.objective = Eigen::VectorXd::Zero(p.num_vars);
  for (const auto& [idx, c] : objective_.terms()) p.objective(idx) += c;

  int rows = static_cast<int>(zero_rows_.size() + nonneg_rows_.size());
  for (const auto& blk : soc_blocks_) rows += static_cast<int>(blk.size());
  p.offset = Eigen::VectorXd::Zero(rows);

  int row = 0;
  if (!zero_rows_.empty()) {
    p.cones.push_back({ConeKind::Zero, static_cast<int>(zero_rows_.size())});
    for (const auto& e : zero_rows_) emit_row(e, row++, p.entries, p.offset);
  }
  if (!nonneg_rows_.empty()) {
    p.cones.push_back({ConeKind::NonNeg, static_cast<int>(nonneg_rows_.size())});
    for (const auto& e : nonneg_rows_) emit_row(e, row++, p.entries, p.offset);
  }
  for (const auto& blk : soc_blocks_) {
    p.cones.push_back({ConeKind::SecondOrder, static_cast<int>(blk.size())});
    for (const auto& e : blk) emit_row(e, row++, p.entries, p.offset);
  }
  return p;
}

void simplex_constraint(ProgramBuilder& builder, const VarBlock& block) {
  if (block.size <= 0) throw std::invalid_argument("simplex over an empty block");
  LinExpr sum(-1.0);
  for (int i = 0; i < block.size; ++i) sum.add(block[i], 1.0);
  builder.add_zero(sum);
  for (int i = 0; i < block.size; ++i) builder.add_nonneg(block[i]);
}

// --- Text dump ------------------------------------------------------------

void write_program(std::ostream& out, const ConicProgram& program) {
  out << "conic v1\n";
  out << "var " << program.num_vars << "\n";
  for (int j = 0; j < program.num_vars; ++j) {
    if (program.objective(j) != 0.0) out << "obj " << j << " " << format_real(program.objective(j)) << "\n";
  }
  for (const auto& cone : program.cones) out << "row " << cone_tag(cone.kind) << " " << cone.dim << "\n";
  for (const auto& e : program.entries) {
    out << "A " << e.row << " " << e.col << " " << format_real(e.value) << "\n";
  }
  for (int i = 0; i < program.num_rows(); ++i) {
    if (program.offset(i) != 0.0) out << "b " << i << " " << format_real(program.offset(i)) << "\n";
  }
}

std::string program_to_string(const ConicProgram& program) {
  std::ostringstream out;
  write_program(out, program);
  return out.str();
}

ConicProgram parse_program(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != "conic v1") {
    throw std::invalid_argument("conic dump: missing `conic v1` header");
  }
  ConicProgram p;
  bool have_vars = false;
  std::vector<std::pair<int, double>> obj;
  std::vector<std::pair<int, double>> rhs;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string key;
    ls >> key;
    auto fail = [&]() {
      throw std::invalid_argument("conic dump: malformed line " + std::to_string(line_no) + ": " + line);
    };
    if (key == "var") {
      if (!(ls >> p.num_vars) || p.num_vars < 0) fail();
      have_vars = true;
    } else if (key == "obj") {
      int j;
      std::string v;
      if (!(ls >> j >> v)) fail();
      obj.emplace_back(j, parse_real(v));
    } else if (key == "row") {
      std::string tag;
      int dim;
      if (!(ls >> tag >> dim)) fail();
      ConeKind kind;
      if (tag == "zero") {
        kind = ConeKind::Zero;
      } else if (tag == "nonneg") {
        kind = ConeKind::NonNeg;
      } else if (tag == "soc") {
        kind = ConeKind::SecondOrder;
      } else {
        fail();
      }
      p.cones.push_back({kind, dim});
    } else if (key == "A") {
      Entry e{};
      std::string v;
      if (!(ls >> e.row >> e.col >> v)) fail();
      e.value = parse_real(v);
      p.entries.push_back(e);
    } else if (key == "b") {
      int i;
      std::string v;
      if (!(ls >> i >> v)) fail();
      rhs.emplace_back(i, parse_real(v));
    } else {
      fail();
    }
  }
  if (!have_vars) throw std::invalid_argument("conic dump: missing `var` line");
  int rows = 0;
  for (const auto& c : p.cones) rows += c.dim;
  p.objective = Eigen::VectorXd::Zero(p.num_vars);
  p.offset = Eigen::VectorXd::Zero(rows);
  for (const auto& [j, v] : obj) {
    if (j < 0 || j >= p.num_vars) throw std::invalid_argument("conic dump: objective index out of range");
    p.objective(j) = v;
  }
  for (const auto& [i, v] : rhs) {
    if (i < 0 || i >= rows) throw std::invalid_argument("conic dump: offset index out of range");
    p.offset(i) = v;
  }
  p.validate();
  return p;
}

ConicProgram parse_program(const std::string& text) {
  std::istringstream in(text);
  return parse_program(in);
}

}  // namespace optrec
