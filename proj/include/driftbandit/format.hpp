#pragma once

#include <charconv>
#include <string>

namespace driftbandit {

// Shortest round-trip decimal form; locale independent, '.' separator.
inline std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

}  // namespace driftbandit
