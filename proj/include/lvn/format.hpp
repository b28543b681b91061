#pragma once

#include <charconv>
#include <string>

namespace lvn {

/// Shortest round-trip decimal form of x.
inline std::string format_real(double x) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return {buf, res.ptr};
}

/// x rounded to 12 significant digits, shortest form. Hides solver noise in
/// reported metrics.
inline std::string format_metric(double x) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, x, std::chars_format::general, 12);
  return {buf, res.ptr};
}

}  // namespace lvn
