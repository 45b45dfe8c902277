#pragma once

#include "optrec/conic.hpp"

#include <stdexcept>
#include <string>

namespace optrec {

/// Vector or matrix sizes that do not agree with the problem's ambient space.
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Malformed input: schema violations, invalid parameters, broken invariants.
class InputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A subset family or enumeration grew beyond its configured cap.
class LimitError : public std::length_error {
 public:
  using std::length_error::length_error;
};

class SamplingError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An assembled program did not reach an optimal solution. `diagnostic` names
/// the offending block when it could be isolated; `program` holds the conic
/// dump of the failing program.
class ProgramFailure : public std::runtime_error {
 public:
  ProgramFailure(SolveStatus status, const std::string& what, std::string diagnostic = {}, std::string program = {})
      : std::runtime_error(what), status_(status), diagnostic_(std::move(diagnostic)), program_(std::move(program)) {}

  SolveStatus status() const { return status_; }
  const std::string& diagnostic() const { return diagnostic_; }
  const std::string& program() const { return program_; }

 private:
  SolveStatus status_;
  std::string diagnostic_;
  std::string program_;
};

}  // namespace optrec
