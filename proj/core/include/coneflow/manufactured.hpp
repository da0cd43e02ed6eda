#pragma once

// Closed-form test problem on the sector:
//   psi_m = R^2 sin(theta) sin(l - theta) chi(R),  chi = (1 - R^2/rho^2)^5 on R < rho,
// with Delta psi_m, L psi_m and the velocity of psi_m in closed form.

#include "coneflow/sector.hpp"

namespace coneflow {

struct ManufacturedSolution {
  double l = 0.0;
  double rho = 0.45;

  [[nodiscard]] double psi(double R, double theta) const;
  [[nodiscard]] double laplacian(double R, double theta) const;
  [[nodiscard]] double l_operator(double R, double theta) const;
  [[nodiscard]] double d_eta(double R, double theta) const;
  [[nodiscard]] double d_z(double R, double theta) const;

  [[nodiscard]] Field2D sample_psi(const GridPtr& grid) const;
  [[nodiscard]] Field2D sample_laplacian(const GridPtr& grid) const;
  [[nodiscard]] Field2D sample_l_operator(const GridPtr& grid) const;
};

struct ConvergenceRow {
  int nr = 0;
  int ntheta = 0;
  double h = 0.0;  ///< angular spacing
  double err_quadrature = 0.0;
  double err_fd = 0.0;
  double err_iterate = 0.0;
  double fd_iterate_gap = 0.0;
  int iterations = 0;
  bool fell_back = false;
};

/// Manufactured-solution errors of poisson_quadrature, l_solve(fd) and
/// l_solve(iterate) on `levels` grids, each doubling the previous cell
/// counts. The sector has r_max = 1 and r_min = 1e-3 r_max.
std::vector<ConvergenceRow> convergence_study(double epsilon, int nr0, int ntheta0, int levels);

/// log2 of successive error ratios of one column.
std::vector<double> observed_orders(const std::vector<ConvergenceRow>& rows, double ConvergenceRow::*column);

}  // namespace coneflow
