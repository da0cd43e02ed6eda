#pragma once

// Finite-difference Dirichlet problems on the truncated sector
// r_min <= R <= r_max, 0 <= theta <= l, and the solvers for
//   L psi = psi_zz + psi_etaeta - psi_eta / (1 + eta).

#include <memory>

#include "coneflow/sector.hpp"

namespace coneflow {

enum class OperatorKind { laplacian, l_operator };

/// Five-point discretisation in (ln R, theta), factorised once. Rows are
/// scaled by R^2, which makes the matrix an M-matrix for every grid.
class SectorOperator {
 public:
  SectorOperator(GridPtr grid, OperatorKind kind);
  ~SectorOperator();
  SectorOperator(SectorOperator&&) noexcept;
  SectorOperator& operator=(SectorOperator&&) noexcept;

  /// psi with zero values on all four edges. Throws ErrorKind::solver_failure
  /// when the relative residual exceeds 1e-10.
  [[nodiscard]] Field2D solve(const Field2D& f) const;

  /// The discrete operator at interior nodes; zero on the edges.
  [[nodiscard]] Field2D apply(const Field2D& psi) const;

  [[nodiscard]] const GridPtr& grid() const { return grid_; }
  [[nodiscard]] OperatorKind kind() const { return kind_; }

 private:
  struct Impl;
  GridPtr grid_;
  OperatorKind kind_;
  std::unique_ptr<Impl> impl_;
};

enum class LMethod { fd, iterate };
const char* to_string(LMethod method);

struct LSolveOptions {
  double tolerance = 1e-9;  ///< relative increment that ends the iteration
  int max_iterations = 200;
};

struct LSolveResult {
  Field2D psi;
  LMethod method_used = LMethod::fd;
  bool fell_back = false;  ///< iterate diverged and fd answered instead
  int iterations = 0;
  double last_increment = 0.0;
};

/// fd: direct solve of L. iterate: psi <- Delta^-1 (f + psi_eta / (1 + eta))
/// with Delta^-1 the truncated-sector Green quadrature, falling back to fd
/// after three consecutive growing increments.
LSolveResult l_solve(const Field2D& f, LMethod method, const LSolveOptions& options = {});

struct VanishingFit {
  double slope = 0.0;
  double r2 = 0.0;
  int nodes = 0;
  bool defined = false;        ///< false when D^2 psi vanishes on the window
  double source_slope = 0.0;   ///< same fit applied to sup|f| on each ring
};

struct VanishingOptions {
  double window_lo = 10.0;   ///< fit window, in units of r_min
  double window_hi = 100.0;
  int min_nodes = 8;
};

/// Solves L psi = f, takes the sup over angles of |D^2 psi| on each ring and
/// fits log |D^2 psi| against log R over the window. Throws
/// ErrorKind::insufficient_resolution for fewer than min_nodes rings in the
/// window; alpha must lie in (0, 1/beta - 2).
VanishingFit vanishing_exponent(const Field2D& f, double alpha, const VanishingOptions& options = {});

}  // namespace coneflow
