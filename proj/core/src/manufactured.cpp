#include "coneflow/manufactured.hpp"

#include <cmath>

#include "coneflow/elliptic.hpp"
#include "coneflow/error.hpp"
#include "coneflow/green.hpp"

namespace coneflow {

namespace {

struct Radial {
  double F, F1, F2;  ///< R^2 chi and its first two derivatives
};

Radial radial(double R, double rho) {
  const double q = R * R / (rho * rho);
  if (q >= 1.0) return {0.0, 0.0, 0.0};
  const double c0 = std::pow(1.0 - q, 5);
  const double c1 = -10.0 * R / (rho * rho) * std::pow(1.0 - q, 4);
  const double c2 = -10.0 / (rho * rho) * std::pow(1.0 - q, 4) + 80.0 * R * R / std::pow(rho, 4) * std::pow(1.0 - q, 3);
  return {R * R * c0, 2.0 * R * c0 + R * R * c1, 2.0 * c0 + 4.0 * R * c1 + R * R * c2};
}

// sin(t) sin(l - t) and its derivatives.
double angular(double t, double l, int order) {
  switch (order) {
    case 0: return 0.5 * (std::cos(2.0 * t - l) - std::cos(l));
    case 1: return -std::sin(2.0 * t - l);
    default: return -2.0 * std::cos(2.0 * t - l);
  }
}

}  // namespace

double ManufacturedSolution::psi(double R, double theta) const { return radial(R, rho).F * angular(theta, l, 0); }

double ManufacturedSolution::laplacian(double R, double theta) const {
  const Radial r = radial(R, rho);
  return (r.F2 + r.F1 / R) * angular(theta, l, 0) + r.F * angular(theta, l, 2) / (R * R);
}

double ManufacturedSolution::d_eta(double R, double theta) const {
  const Radial r = radial(R, rho);
  return std::cos(theta) * r.F1 * angular(theta, l, 0) - std::sin(theta) * r.F * angular(theta, l, 1) / R;
}

double ManufacturedSolution::d_z(double R, double theta) const {
  const Radial r = radial(R, rho);
  return std::sin(theta) * r.F1 * angular(theta, l, 0) + std::cos(theta) * r.F * angular(theta, l, 1) / R;
}

double ManufacturedSolution::l_operator(double R, double theta) const {
  return laplacian(R, theta) - d_eta(R, theta) / (1.0 + R * std::cos(theta));
}

Field2D ManufacturedSolution::sample_psi(const GridPtr& grid) const {
  return Field2D::sample(grid, [this](double R, double t) { return psi(R, t); });
}

Field2D ManufacturedSolution::sample_laplacian(const GridPtr& grid) const {
  return Field2D::sample(grid, [this](double R, double t) { return laplacian(R, t); });
}

Field2D ManufacturedSolution::sample_l_operator(const GridPtr& grid) const {
  return Field2D::sample(grid, [this](double R, double t) { return l_operator(R, t); });
}

std::vector<ConvergenceRow> convergence_study(double epsilon, int nr0, int ntheta0, int levels) {
  if (levels < 2) throw InvalidParameter("levels", "need at least two grids");
  const SectorSpec spec = SectorSpec::from_epsilon(epsilon, 1.0);
  const ManufacturedSolution m{spec.l};
  std::vector<ConvergenceRow> rows;
  for (int k = 0; k < levels; ++k) {
    ConvergenceRow row;
    row.nr = (nr0 - 1) * (1 << k) + 1;
    row.ntheta = (ntheta0 - 1) * (1 << k) + 1;
    const GridPtr grid = make_polar_grid(spec, row.nr, row.ntheta, 1e-3);
    row.h = grid->dtheta();
    const Field2D exact = m.sample_psi(grid);
    const Field2D fl = m.sample_laplacian(grid);
    const Field2D fL = m.sample_l_operator(grid);
    row.err_quadrature = (poisson_quadrature(fl) - exact).max_abs();
    const Field2D fd = l_solve(fL, LMethod::fd).psi;
    const LSolveResult it = l_solve(fL, LMethod::iterate);
    row.err_fd = (fd - exact).max_abs();
    row.err_iterate = (it.psi - exact).max_abs();
    row.fd_iterate_gap = (fd - it.psi).max_abs();
    row.iterations = it.iterations;
    row.fell_back = it.fell_back;
    rows.push_back(row);
  }
  return rows;
}

std::vector<double> observed_orders(const std::vector<ConvergenceRow>& rows, double ConvergenceRow::*column) {
  std::vector<double> orders;
  for (std::size_t k = 1; k < rows.size(); ++k) orders.push_back(std::log2(rows[k - 1].*column / rows[k].*column));
  return orders;
}

}  // namespace coneflow
