#pragma once

#include <cmath>
#include <span>
#include <vector>

namespace coneflow::detail {

/// Thomas algorithm for a[i] x[i-1] + b[i] x[i] + c[i] x[i+1] = d[i].
/// Returns false if a pivot falls below pivot_tol relative to the largest
/// diagonal entry.
inline bool solve_tridiagonal(std::span<const double> a, std::span<const double> b,
                              std::span<const double> c, std::span<const double> d,
                              std::span<double> x, double pivot_tol = 1e-12) {
  const std::size_t m = b.size();
  if (m == 0) return true;
  double scale = 0.0;
  for (std::size_t i = 0; i < m; ++i) scale = std::fmax(scale, std::fabs(b[i]));
  std::vector<double> cp(m), dp(m);
  double pivot = b[0];
  if (std::fabs(pivot) <= pivot_tol * scale) return false;
  cp[0] = c[0] / pivot;
  dp[0] = d[0] / pivot;
  for (std::size_t i = 1; i < m; ++i) {
    pivot = b[i] - a[i] * cp[i - 1];
    if (std::fabs(pivot) <= pivot_tol * scale) return false;
    cp[i] = c[i] / pivot;
    dp[i] = (d[i] - a[i] * dp[i - 1]) / pivot;
  }
  x[m - 1] = dp[m - 1];
  for (std::size_t i = m - 1; i-- > 0;) x[i] = dp[i] - cp[i] * x[i + 1];
  return true;
}

}  // namespace coneflow::detail
