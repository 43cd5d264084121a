#pragma once

#include <algorithm>
#include <cmath>

namespace driftbandit::detail {

// floor/ceil of a power, snapping results within 1e-9 (relative) of an
// integer to that integer so that e.g. 8^{1/3} counts as 2.
inline double snap(double v) {
  const double r = std::round(v);
  return std::abs(v - r) <= 1e-9 * std::max(1.0, std::abs(r)) ? r : v;
}

inline double floor_pow(double base, double exponent) { return std::floor(snap(std::pow(base, exponent))); }
inline double ceil_pow(double base, double exponent) { return std::ceil(snap(std::pow(base, exponent))); }

}  // namespace driftbandit::detail
