#pragma once

#include <string>

namespace optrec {

/// Shortest-free decimal with 17 significant digits ("%.17g"); identical
/// inputs give identical bytes, and parse_real() restores the exact double.
std::string format_real(double value);

/// Strict decimal parse; throws std::invalid_argument on trailing garbage.
double parse_real(const std::string& text);

}  // namespace optrec
