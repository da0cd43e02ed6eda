#pragma once

// Sampled estimates of the scale-invariant Hoelder norm
//   |f|_inf + sup ||x|^a f(x) - |x'|^a f(x')| / |x - x'|^a
// centred at the corner, and of the classical C^a norm. Both are lower
// bounds of the true norms.

#include <complex>
#include <cstdint>
#include <string>
#include <vector>

#include "coneflow/sector.hpp"

namespace coneflow {

inline constexpr long kMinPairBudget = 10000;

struct NormEstimate {
  double sup_part = 0.0;
  double seminorm_part = 0.0;
  double total = 0.0;
  double alpha = 0.0;
  long pair_count = 0;
  std::complex<double> center{0.0, 0.0};
};

/// Every pair inside each ring, plus pair_budget cross-ring pairs from a
/// fixed-seed stream cycling over ring offsets. The stream is prefix-stable,
/// so the estimate never decreases as the budget grows.
NormEstimate circ_norm(const Field2D& f, double alpha, long pair_budget = kMinPairBudget);

/// Same sampler without the |x|^a weight.
NormEstimate holder_norm(const Field2D& f, double alpha, long pair_budget = kMinPairBudget);

/// sup f + max |f(t) - f(t')| / |t - t'|^a over node pairs on [0, l].
double angular_holder_norm(const std::vector<double>& f, double l, double alpha);

/// Largest corner value over angles, extrapolated linearly in R from the two
/// innermost rings.
double corner_value(const Field2D& f);

/// est|fh|_C / (est|h|_circ est|f|_C); requires |f(corner)| < 1e-8 sup|f|.
double product_rule_check(const Field2D& f, const Field2D& h, double alpha,
                          long pair_budget = kMinPairBudget);

const std::vector<std::string>& norm_estimate_columns();
std::vector<double> norm_estimate_row(const NormEstimate& e);

}  // namespace coneflow
