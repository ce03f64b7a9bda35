#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

namespace exactdif {

namespace detail {
inline const std::vector<double>& log_factorial_table() {
  static const std::vector<double> table = [] {
    std::vector<double> t(1 << 16);
    t[0] = 0.0;
    for (std::size_t i = 1; i < t.size(); ++i) t[i] = std::lgamma(static_cast<double>(i) + 1.0);
    return t;
  }();
  return table;
}
}  // namespace detail

/// ln(n!) via a lookup table for small n, ln-Gamma otherwise.
inline double log_factorial(std::int64_t n) {
  const auto& t = detail::log_factorial_table();
  if (n >= 0 && static_cast<std::size_t>(n) < t.size()) return t[static_cast<std::size_t>(n)];
  return std::lgamma(static_cast<double>(n) + 1.0);
}

}  // namespace exactdif
