#include "optrec/io.hpp"

#include "optrec/error.hpp"
#include "optrec/format.hpp"

#include <openssl/evp.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

namespace optrec {

namespace {

bool is_scalar(const Json& v) { return !v.is_array() && !v.is_object(); }

void write_value(std::string& out, const Json& v, int indent) {
  const std::string pad(static_cast<std::size_t>(indent) + 2, ' ');
  switch (v.type()) {
    case Json::value_t::null:
      out += "null";
      return;
    case Json::value_t::boolean:
      out += v.get<bool>() ? "true" : "false";
      return;
    case Json::value_t::number_integer:
      out += std::to_string(v.get<std::int64_t>());
      return;
    case Json::value_t::number_unsigned:
      out += std::to_string(v.get<std::uint64_t>());
      return;
    case Json::value_t::number_float: {
      const double d = v.get<double>();
      if (!std::isfinite(d)) throw InputError("non-finite number cannot be written as JSON");
      out += format_real(d);
      return;
    }
    case Json::value_t::string:
      out += v.dump();
      return;
    case Json::value_t::array: {
      if (v.empty()) {
        out += "[]";
        return;
      }
      const bool flat = std::all_of(v.begin(), v.end(), is_scalar);
      out += flat ? "[" : "[\n";
      bool first = true;
      for (const auto& item : v) {
        if (!first) out += flat ? ", " : ",\n";
        first = false;
        if (!flat) out += pad;
        write_value(out, item, indent + 2);
      }
      if (!flat) out += "\n" + std::string(static_cast<std::size_t>(indent), ' ');
      out += "]";
      return;
    }
    case Json::value_t::object: {
      if (v.empty()) {
        out += "{}";
        return;
      }
      out += "{\n";
      bool first = true;
      for (auto it = v.begin(); it != v.end(); ++it) {  // std::map: sorted keys
        if (!first) out += ",\n";
        first = false;
        out += pad + Json(it.key()).dump() + ": ";
        write_value(out, it.value(), indent + 2);
      }
      out += "\n" + std::string(static_cast<std::size_t>(indent), ' ') + "}";
      return;
    }
    default:
      throw InputError("unsupported JSON value");
  }
}

const Json& require(const Json& j, const char* key, const std::string& where) {
  if (!j.is_object()) throw InputError(where + ": expected an object");
  const auto it = j.find(key);
  if (it == j.end()) throw InputError(where + ": missing key \"" + key + "\"");
  return *it;
}

void allow_keys(const Json& j, std::initializer_list<const char*> keys, const std::string& where) {
  if (!j.is_object()) throw InputError(where + ": expected an object");
  const std::set<std::string> allowed(keys.begin(), keys.end());
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (!allowed.count(it.key())) throw InputError(where + ": unknown key \"" + it.key() + "\"");
  }
}

// {"name": {...}} with exactly one key; returns the key.
std::string variant_key(const Json& j, const std::string& where) {
  if (!j.is_object() || j.size() != 1) throw InputError(where + ": expected an object with exactly one key");
  return j.begin().key();
}

double number(const Json& j, const std::string& where) {
  if (!j.is_number()) throw InputError(where + ": expected a number");
  return j.get<double>();
}

int integer(const Json& j, const std::string& where) {
  if (!j.is_number_integer()) throw InputError(where + ": expected an integer");
  const auto v = j.get<std::int64_t>();
  if (v < INT32_MIN || v > INT32_MAX) throw InputError(where + ": integer out of range");
  return static_cast<int>(v);
}

IndexFamily family_from_json(const Json& j, const std::string& where) {
  if (!j.is_array()) throw InputError(where + ": expected an array of index arrays");
  IndexFamily out;
  for (const auto& set : j) {
    if (!set.is_array()) throw InputError(where + ": expected an array of index arrays");
    std::vector<int> s;
    for (const auto& i : set) s.push_back(integer(i, where));
    out.push_back(std::move(s));
  }
  return out;
}

Json family_to_json(const IndexFamily& f) {
  Json out = Json::array();
  for (const auto& s : f) out.push_back(Json(s));
  return out;
}

struct Space {
  int dim = 0;
  std::optional<Matrix> gram;
  bool rkhs = false;
};

Space space_from_json(const Json& j) {
  const std::string kind = variant_key(j, "space");
  Space s;
  if (kind == "rn") {
    const Json& rn = j.at("rn");
    allow_keys(rn, {"dim", "gram"}, "space.rn");
    s.dim = integer(require(rn, "dim", "space.rn"), "space.rn.dim");
    if (s.dim < 1) throw InputError("space.rn.dim must be positive");
    if (rn.contains("gram")) s.gram = matrix_from_json(rn.at("gram"), "space.rn.gram", s.dim);
    if (s.gram && s.gram->rows() != s.dim) throw DimensionError("space.rn.gram must be dim x dim");
  } else if (kind == "rkhs") {
    const Json& r = j.at("rkhs");
    allow_keys(r, {"kernel", "points"}, "space.rkhs");
    const Matrix points = matrix_from_json(require(r, "points", "space.rkhs"), "space.rkhs.points");
    if (points.rows() < 1) throw InputError("space.rkhs.points must not be empty");
    s.dim = static_cast<int>(points.rows());
    s.gram = kernel_gram(require(r, "kernel", "space.rkhs"), points);
    s.rkhs = true;
  } else {
    throw InputError("space: unknown kind \"" + kind + "\" (expected rn or rkhs)");
  }
  return s;
}

ModelSet model_from_json(const Json& j, const Space& space) {
  const std::string kind = variant_key(j, "model");
  if (kind == "polytope") {
    if (space.rkhs || space.gram) throw InputError("model.polytope needs an rn space without a Gram matrix");
    const Json& p = j.at("polytope");
    allow_keys(p, {"a"}, "model.polytope");
    return Polytope(matrix_from_json(require(p, "a", "model.polytope"), "model.polytope.a", space.dim), space.dim);
  }
  if (kind == "approx") {
    const Json& a = j.at("approx");
    allow_keys(a, {"v_basis", "g", "eps"}, "model.approx");
    Matrix v = matrix_from_json(require(a, "v_basis", "model.approx"), "model.approx.v_basis", space.dim);
    Vector g = vector_from_json(require(a, "g", "model.approx"), "model.approx.g");
    const double eps = number(require(a, "eps", "model.approx"), "model.approx.eps");
    Matrix gram = space.gram ? *space.gram : Matrix::Identity(space.dim, space.dim);
    return ApproxSet(std::move(v), std::move(g), eps, std::move(gram));
  }
  throw InputError("model: unknown kind \"" + kind + "\" (expected polytope or approx)");
}

ObservationMap observations_from_json(const Json& j, const Space& space) {
  if (!j.is_array()) throw InputError("observations: expected an array");
  const bool indices = !j.empty() && std::all_of(j.begin(), j.end(), [](const Json& v) { return v.is_number_integer(); });
  if (indices) {
    if (!space.rkhs) throw InputError("observations: point indices need an rkhs space");
    Matrix rows = Matrix::Zero(static_cast<int>(j.size()), space.dim);
    for (std::size_t k = 0; k < j.size(); ++k) {
      const int i = integer(j[k], "observations");
      if (i < 0 || i >= space.dim) throw InputError("observations: point index " + std::to_string(i) + " out of range");
      rows(static_cast<int>(k), i) = 1.0;  // representer of f -> f(x_i)
    }
    return ObservationMap(std::move(rows), space.dim);
  }
  return ObservationMap(matrix_from_json(j, "observations", space.dim), space.dim);
}

TargetFunctional target_from_json(const Json& j, const Space& space) {
  const std::string kind = variant_key(j, "target");
  if (kind == "sup") {
    const Json& t = j.at("sup");
    allow_keys(t, {"w"}, "target.sup");
    return TargetFunctional::sup(matrix_from_json(require(t, "w", "target.sup"), "target.sup.w", space.dim));
  }
  if (kind == "lth_largest") {
    const Json& t = j.at("lth_largest");
    allow_keys(t, {"l", "w"}, "target.lth_largest");
    const int l = integer(require(t, "l", "target.lth_largest"), "target.lth_largest.l");
    return lth_largest_target(matrix_from_json(require(t, "w", "target.lth_largest"), "target.lth_largest.w", space.dim), l);
  }
  if (kind == "diff_of_sups") {
    const Json& t = j.at("diff_of_sups");
    allow_keys(t, {"mu", "nu"}, "target.diff_of_sups");
    return difference_of_sups_target(
        matrix_from_json(require(t, "mu", "target.diff_of_sups"), "target.diff_of_sups.mu", space.dim),
        matrix_from_json(require(t, "nu", "target.diff_of_sups"), "target.diff_of_sups.nu", space.dim));
  }
  throw InputError("target: unknown kind \"" + kind + "\" (expected sup, lth_largest or diff_of_sups)");
}

NoiseModel noise_from_json(const Json& j) {
  allow_keys(j, {"p", "radius"}, "noise");
  NoiseModel n;
  const Json& p = require(j, "p", "noise");
  if (p.is_string()) {
    n.p = NoiseModel::parse_norm(p.get<std::string>());
  } else if (p.is_number_integer()) {
    n.p = NoiseModel::parse_norm(std::to_string(p.get<int>()));
  } else {
    throw InputError("noise.p: expected \"1\", \"2\" or \"inf\"");
  }
  n.radius = number(require(j, "radius", "noise"), "noise.radius");
  n.validate();
  return n;
}

}  // namespace

std::string canonical_json(const Json& value) {
  std::string out;
  write_value(out, value, 0);
  out += "\n";
  return out;
}

std::string sha256_hex(const std::string& bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    throw std::runtime_error("SHA-256 computation failed");
  }
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[digest[i] >> 4];
    out += hex[digest[i] & 15];
  }
  return out;
}

Json parse_json(const std::string& text) {
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw InputError(std::string("invalid JSON: ") + e.what());
  }
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& bytes) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw InputError("cannot write " + path);
    out << bytes;
    if (!out) throw InputError("cannot write " + path);
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0) {
    std::remove(tmp.c_str());
    throw InputError("cannot write " + path);
  }
}

Json matrix_to_json(const Matrix& m) {
  Json out = Json::array();
  for (int i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (int j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    out.push_back(std::move(row));
  }
  return out;
}

Json vector_to_json(const Vector& v) {
  Json out = Json::array();
  for (int i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

Matrix matrix_from_json(const Json& j, const std::string& what, int cols) {
  if (!j.is_array()) throw InputError(what + ": expected an array of rows");
  const int rows = static_cast<int>(j.size());
  if (rows == 0) return Matrix(0, std::max(cols, 0));
  const int width = j[0].is_array() ? static_cast<int>(j[0].size()) : -1;
  if (width < 0) throw InputError(what + ": expected an array of rows");
  if (cols >= 0 && width != cols) {
    throw DimensionError(what + ": rows have length " + std::to_string(width) + ", expected " + std::to_string(cols));
  }
  Matrix m(rows, width);
  for (int i = 0; i < rows; ++i) {
    const Json& row = j[static_cast<std::size_t>(i)];
    if (!row.is_array() || static_cast<int>(row.size()) != width) throw DimensionError(what + ": ragged rows");
    for (int c = 0; c < width; ++c) m(i, c) = number(row[static_cast<std::size_t>(c)], what);
  }
  return m;
}

Vector vector_from_json(const Json& j, const std::string& what) {
  if (!j.is_array()) throw InputError(what + ": expected an array of numbers");
  Vector v(static_cast<int>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v(static_cast<int>(i)) = number(j[i], what);
  return v;
}

Matrix kernel_gram(const Json& kernel, const Matrix& points) {
  const std::string kind = kernel.is_string() ? kernel.get<std::string>() : variant_key(kernel, "space.rkhs.kernel");
  const int n = static_cast<int>(points.rows());
  Matrix g(n, n);
  if (kind == "linear") {
    g = points * points.transpose();
  } else if (kind == "gaussian" && kernel.is_object()) {
    const double gamma = number(require(kernel.at("gaussian"), "gamma", "space.rkhs.kernel.gaussian"),
                                "space.rkhs.kernel.gaussian.gamma");
    if (!(gamma > 0.0)) throw InputError("space.rkhs.kernel.gaussian.gamma must be positive");
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) g(i, j) = std::exp(-gamma * (points.row(i) - points.row(j)).squaredNorm());
    }
  } else {
    throw InputError("space.rkhs.kernel: unknown kernel \"" + kind + "\" (expected linear or gaussian)");
  }
  return g;
}

Problem problem_from_json(const Json& j) {
  allow_keys(j, {"space", "model", "observations", "target", "noise", "name", "description"}, "problem");
  const Space space = space_from_json(require(j, "space", "problem"));
  Problem p{model_from_json(require(j, "model", "problem"), space),
            observations_from_json(require(j, "observations", "problem"), space),
            target_from_json(require(j, "target", "problem"), space), std::nullopt};
  if (j.contains("noise")) p.noise = noise_from_json(j.at("noise"));
  p.validate();
  return p;
}

std::string problem_hash(const Json& j) { return sha256_hex(canonical_json(j)); }

LoadedProblem load_problem(const std::string& path) {
  Json doc = parse_json(read_file(path));
  Problem problem = problem_from_json(doc);
  std::string hash = problem_hash(doc);
  return LoadedProblem{std::move(doc), std::move(problem), std::move(hash)};
}

Json estimator_to_json(const EstimatorFile& file) {
  Json j;
  if (const auto* s = std::get_if<SupAffineEstimator>(&file.estimator)) {
    j["kind"] = "sup_affine";
    j["offsets"] = vector_to_json(s->offsets);
    j["gains"] = matrix_to_json(s->gains);
  } else {
    const auto& si = std::get<SupInfAffineEstimator>(file.estimator);
    j["kind"] = "sup_inf_affine";
    j["offsets"] = vector_to_json(si.offsets);
    j["gains"] = matrix_to_json(si.gains);
    j["families"] = {{"sup", family_to_json(si.sup_families)}, {"inf", family_to_json(si.inf_families)}};
  }
  j["metadata"] = {{"e_hat", file.metadata.e_hat},
                   {"solver_tol", file.metadata.solver_tol},
                   {"problem_hash", file.metadata.problem_hash},
                   {"tool_version", file.metadata.tool_version},
                   {"seed", file.metadata.seed}};
  return j;
}

EstimatorFile estimator_from_json(const Json& j) {
  allow_keys(j, {"kind", "offsets", "gains", "families", "metadata"}, "estimator");
  const Json& kind = require(j, "kind", "estimator");
  if (!kind.is_string()) throw InputError("estimator.kind: expected a string");
  EstimatorFile out;
  Vector offsets = vector_from_json(require(j, "offsets", "estimator"), "estimator.offsets");
  Matrix gains = matrix_from_json(require(j, "gains", "estimator"), "estimator.gains");
  if (gains.rows() == 0) gains.resize(offsets.size(), 0);
  if (kind == "sup_affine") {
    if (j.contains("families")) throw InputError("estimator: families are only valid for sup_inf_affine");
    SupAffineEstimator e{std::move(offsets), std::move(gains)};
    e.validate();
    out.estimator = std::move(e);
  } else if (kind == "sup_inf_affine") {
    const Json& fam = require(j, "families", "estimator");
    allow_keys(fam, {"sup", "inf"}, "estimator.families");
    SupInfAffineEstimator e;
    e.sup_families = family_from_json(require(fam, "sup", "estimator.families"), "estimator.families.sup");
    e.inf_families = family_from_json(require(fam, "inf", "estimator.families"), "estimator.families.inf");
    e.num_sup = static_cast<int>(e.sup_families.size());
    e.num_inf = static_cast<int>(e.inf_families.size());
    e.offsets = std::move(offsets);
    e.gains = std::move(gains);
    e.validate();
    out.estimator = std::move(e);
  } else {
    throw InputError("estimator.kind: expected sup_affine or sup_inf_affine");
  }
  const Json& meta = require(j, "metadata", "estimator");
  allow_keys(meta, {"e_hat", "solver_tol", "problem_hash", "tool_version", "seed"}, "estimator.metadata");
  out.metadata.e_hat = number(require(meta, "e_hat", "estimator.metadata"), "estimator.metadata.e_hat");
  out.metadata.solver_tol = number(require(meta, "solver_tol", "estimator.metadata"), "estimator.metadata.solver_tol");
  const Json& hash = require(meta, "problem_hash", "estimator.metadata");
  const Json& version = require(meta, "tool_version", "estimator.metadata");
  const Json& seed = require(meta, "seed", "estimator.metadata");
  if (!hash.is_string() || !version.is_string()) throw InputError("estimator.metadata: hash and version must be strings");
  if (!seed.is_number_unsigned() && !(seed.is_number_integer() && seed.get<std::int64_t>() >= 0)) {
    throw InputError("estimator.metadata.seed: expected a non-negative integer");
  }
  out.metadata.problem_hash = hash.get<std::string>();
  out.metadata.tool_version = version.get<std::string>();
  out.metadata.seed = seed.get<std::uint64_t>();
  return out;
}

EstimatorFile load_estimator(const std::string& path) { return estimator_from_json(parse_json(read_file(path))); }

}  // namespace optrec
