#include "coneflow/derivatives.hpp"

#include <cmath>

namespace coneflow {

namespace {

// Derivative along a strided line of m samples with spacing h.
template <class Get>
double line_derivative(Get get, int k, int m, double h) {
  if (k == 0) return (-3.0 * get(0) + 4.0 * get(1) - get(2)) / (2.0 * h);
  if (k == m - 1) return (3.0 * get(m - 1) - 4.0 * get(m - 2) + get(m - 3)) / (2.0 * h);
  return (get(k + 1) - get(k - 1)) / (2.0 * h);
}

template <class Get>
double line_second(Get get, int k, int m, double h) {
  // Second-order one-sided second difference needs four points.
  if (k == 0) return (2.0 * get(0) - 5.0 * get(1) + 4.0 * get(2) - get(3)) / (h * h);
  if (k == m - 1) return (2.0 * get(m - 1) - 5.0 * get(m - 2) + 4.0 * get(m - 3) - get(m - 4)) / (h * h);
  return (get(k + 1) - 2.0 * get(k) + get(k - 1)) / (h * h);
}

}  // namespace

Field2D d_ds(const Field2D& f) {
  const PolarGrid& g = *f.grid;
  Field2D out = Field2D::zeros(f.grid);
  const double h = g.ds();
  for (int j = 0; j < g.ntheta; ++j)
    for (int i = 0; i < g.nr; ++i)
      out.at(i, j) = line_derivative([&](int k) { return f.at(k, j); }, i, g.nr, h);
  return out;
}

Field2D d_dtheta(const Field2D& f) {
  const PolarGrid& g = *f.grid;
  Field2D out = Field2D::zeros(f.grid);
  const double h = g.dtheta();
  for (int i = 0; i < g.nr; ++i)
    for (int j = 0; j < g.ntheta; ++j)
      out.at(i, j) = line_derivative([&](int k) { return f.at(i, k); }, j, g.ntheta, h);
  return out;
}

Field2D d_eta(const Field2D& f) {
  const PolarGrid& g = *f.grid;
  const Field2D fs = d_ds(f);
  const Field2D ft = d_dtheta(f);
  Field2D out = Field2D::zeros(f.grid);
  for (int i = 0; i < g.nr; ++i)
    for (int j = 0; j < g.ntheta; ++j)
      out.at(i, j) = (std::cos(g.thetas[j]) * fs.at(i, j) - std::sin(g.thetas[j]) * ft.at(i, j)) / g.radii[i];
  return out;
}

Field2D d_z(const Field2D& f) {
  const PolarGrid& g = *f.grid;
  const Field2D fs = d_ds(f);
  const Field2D ft = d_dtheta(f);
  Field2D out = Field2D::zeros(f.grid);
  for (int i = 0; i < g.nr; ++i)
    for (int j = 0; j < g.ntheta; ++j)
      out.at(i, j) = (std::sin(g.thetas[j]) * fs.at(i, j) + std::cos(g.thetas[j]) * ft.at(i, j)) / g.radii[i];
  return out;
}

Field2D hessian_norm(const Field2D& f) {
  const PolarGrid& g = *f.grid;
  const Field2D fs = d_ds(f);
  const Field2D ft = d_dtheta(f);
  const Field2D fst = d_dtheta(fs);
  const double hs = g.ds();
  const double ht = g.dtheta();
  Field2D out = Field2D::zeros(f.grid);
  for (int i = 0; i < g.nr; ++i)
    for (int j = 0; j < g.ntheta; ++j) {
      const double fss = line_second([&](int k) { return f.at(k, j); }, i, g.nr, hs);
      const double ftt = line_second([&](int k) { return f.at(i, k); }, j, g.ntheta, ht);
      const double hrr = fss - fs.at(i, j);
      const double hrt = fst.at(i, j) - ft.at(i, j);
      const double htt = ftt + fs.at(i, j);
      const double R2 = g.radii[i] * g.radii[i];
      out.at(i, j) = std::sqrt(hrr * hrr + 2.0 * hrt * hrt + htt * htt) / R2;
    }
  return out;
}

}  // namespace coneflow
