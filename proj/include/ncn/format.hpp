#pragma once

#include <charconv>
#include <cstdio>
#include <string>

namespace ncn {

/// Decimal text with 17 significant digits; parses back to the same double.
inline std::string format_exact(double v) {
  char buf[32];
  const int n = std::snprintf(buf, sizeof buf, "%.17g", v);
  return std::string(buf, static_cast<std::size_t>(n));
}

/// Shortest decimal text that round-trips.
inline std::string format_short(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

}  // namespace ncn
