#pragma once

// Problem and estimator files.
//
// Problem files describe the space ({"rn": {"dim", "gram"?}} or
// {"rkhs": {"kernel", "points"}}), the model set, the observations, the target
// and optional noise. In rkhs mode elements are coefficient vectors over the
// kernel sections k(., x_i), the Gram matrix is K_ij = k(x_i, x_j) and integer
// observations select point evaluations.
//
// Every file is written in one canonical form: sorted keys, two-space indent,
// scalar arrays on one line, reals with 17 significant digits, LF endings.
// Hashes are SHA-256 over those bytes.

#include "optrec/functional.hpp"
#include "optrec/problem.hpp"

#include <json.hpp>

#include <cstdint>
#include <string>

namespace optrec {

using Json = nlohmann::json;

inline constexpr const char* kToolVersion = "0.1.0";

/// Canonical bytes of a JSON value (ends with a newline). Non-finite reals
/// throw InputError.
std::string canonical_json(const Json& value);

std::string sha256_hex(const std::string& bytes);

/// Parses JSON text; syntax errors become InputError.
Json parse_json(const std::string& text);
std::string read_file(const std::string& path);
/// Writes through a temporary file and a rename.
void write_file(const std::string& path, const std::string& bytes);

/// Builds and validates a Problem; schema and consistency violations throw
/// InputError (or DimensionError).
Problem problem_from_json(const Json& j);
/// SHA-256 of the canonical form of a problem document.
std::string problem_hash(const Json& j);

struct LoadedProblem {
  Json document;
  Problem problem;
  std::string hash;
};
LoadedProblem load_problem(const std::string& path);

/// Gram matrix of a kernel description ("linear" or {"gaussian": {"gamma"}})
/// over the given points.
Matrix kernel_gram(const Json& kernel, const Matrix& points);

struct EstimatorMetadata {
  double e_hat = 0.0;
  double solver_tol = 1e-8;
  std::string problem_hash;
  std::string tool_version = kToolVersion;
  std::uint64_t seed = 0;
};

struct EstimatorFile {
  Estimator estimator;
  EstimatorMetadata metadata;
};

Json estimator_to_json(const EstimatorFile& file);
EstimatorFile estimator_from_json(const Json& j);
EstimatorFile load_estimator(const std::string& path);

Json matrix_to_json(const Matrix& m);
Json vector_to_json(const Vector& v);
Matrix matrix_from_json(const Json& j, const std::string& what, int cols = -1);
Vector vector_from_json(const Json& j, const std::string& what);

}  // namespace optrec
