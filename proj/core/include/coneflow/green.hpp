#pragma once

// Dirichlet Green's function of the sector and the quadratures built on it.
//
// With a = 1/beta the map x -> x^a sends the sector onto the upper half-plane,
// so G(x, y) = (1/2pi) ln(|x^a - y^a| / |conj(x)^a - y^a|).

#include <complex>

#include "coneflow/sector.hpp"

namespace coneflow {

using Point = std::complex<double>;  ///< (eta, z)

/// x^a through exp(a (ln R + i theta)); x = 0 maps to 0.
Point sector_power(Point x, double a);

double green(Point x, Point y, double beta);

/// The closed form
///   -x^(a-1)/(4 pi beta) (conj(y)^a - y^a) / ((x^a - conj(y)^a)(x^a - y^a)),
/// which is the complex derivative (d_eta - i d_z)/2 of green in x.
Point kernel_K(Point x, Point y, double beta);

/// (d_eta G, d_z G) packed as a complex number; equal to 2 conj(kernel_K).
Point green_gradient(Point x, Point y, double beta);

/// Green's function of the truncated sector {R < r_max}: the power map sends
/// it onto the unit half-disk, handled by images.
double green_truncated(Point x, Point y, double beta, double r_max);

enum class GreenKind {
  sector,     ///< unbounded sector; requires supp f inside R < r_max / 2
  truncated,  ///< Dirichlet also on R = r_max
};

/// psi(x) = sum over nodes of G(x, y) f(y) dA(y). The cell containing x uses
/// the cell average of the logarithmic part. Values on the rays are zero.
/// Throws ErrorKind::truncation when GreenKind::sector is asked for data that
/// reach R >= r_max / 2.
Field2D poisson_quadrature(const Field2D& f, GreenKind kind = GreenKind::sector);

struct GradientField {
  Field2D d_eta;
  Field2D d_z;
};

/// grad psi from green_gradient quadrature; the self cell is skipped.
GradientField gradient_quadrature(const Field2D& f);

/// sup over nodes with R > 0 of |grad psi(x)| / (|x| sup|f|); zero for f = 0.
double velocity_bound_check(const Field2D& f);

}  // namespace coneflow
