#include "optrec/format.hpp"

#include <cstdio>
#include <cstdlib>
#include <stdexcept>

namespace optrec {

std::string format_real(double value) {
  if (value == 0.0) return "0";  // folds -0 into 0
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

double parse_real(const std::string& text) {
  if (text.empty()) throw std::invalid_argument("empty real literal");
  char* end = nullptr;
  const double v = std::strtod(text.c_str(), &end);
  if (end != text.c_str() + text.size()) throw std::invalid_argument("bad real literal: " + text);
  return v;
}

}  // namespace optrec
