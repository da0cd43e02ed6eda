#pragma once

#include <gtest/gtest.h>

#include <cmath>
#include <functional>
#include <vector>

#include "coneflow/error.hpp"

namespace coneflow::testing {

/// Runs f and returns the kind it threw; fails the test when nothing is thrown.
inline ErrorKind thrown_kind(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "expected an error";
  return ErrorKind::invalid_input;
}

inline double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double m = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) m = std::fmax(m, std::fabs(a[k] - b[k]));
  return m;
}

inline double order(double coarse_err, double fine_err, double ratio = 2.0) {
  return std::log(coarse_err / fine_err) / std::log(ratio);
}

}  // namespace coneflow::testing
