#include "coneflow/green.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "coneflow/error.hpp"

namespace coneflow {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kAngleSlack = 1e-12;

Point power_polar(double R, double theta, double a) {
  if (R == 0.0) return {0.0, 0.0};
  const double m = std::exp(a * std::log(R));
  return {m * std::cos(a * theta), m * std::sin(a * theta)};
}

double checked_angle(Point x, double beta) {
  if (!std::isfinite(x.real()) || !std::isfinite(x.imag()))
    fail(ErrorKind::domain, "point has non-finite coordinates");
  if (std::abs(x) == 0.0) return 0.0;
  const double theta = std::arg(x);
  const double l = beta * std::numbers::pi;
  if (theta < -kAngleSlack || theta > l + kAngleSlack) fail(ErrorKind::domain, "point lies outside the sector");
  return std::clamp(theta, 0.0, l);
}

void check_beta(double beta) {
  if (!(beta > 0.0 && beta <= 0.5)) throw InvalidParameter("beta", "must lie in (0, 1/2]");
}

Point mapped(Point x, double beta) {
  const double theta = checked_angle(x, beta);
  return power_polar(std::abs(x), theta, 1.0 / beta);
}

// Average of ln sqrt(u^2 + v^2) over [-A, A] x [-B, B].
double mean_log_radius(double A, double B) {
  const double J = A * B * std::log(A * A + B * B) - 3.0 * A * B + A * A * std::atan(B / A) +
                   B * B * std::atan(A / B);
  return J / (2.0 * A * B);
}

}  // namespace

Point sector_power(Point x, double a) {
  const double R = std::abs(x);
  return power_polar(R, R == 0.0 ? 0.0 : std::arg(x), a);
}

double green(Point x, Point y, double beta) {
  check_beta(beta);
  const Point X = mapped(x, beta);
  const Point Y = mapped(y, beta);
  if (x == y) fail(ErrorKind::singularity, "green is singular at x = y");
  const double num = std::norm(X - Y);
  if (num == 0.0) fail(ErrorKind::singularity, "green is singular at x = y");
  return std::log(num / std::norm(std::conj(X) - Y)) / (2.0 * kTwoPi);
}

Point kernel_K(Point x, Point y, double beta) {
  check_beta(beta);
  const double a = 1.0 / beta;
  const Point X = mapped(x, beta);
  const Point Y = mapped(y, beta);
  if (x == y || X == Y) fail(ErrorKind::singularity, "kernel is singular at x = y");
  const double R = std::abs(x);
  const Point xa1 = R == 0.0 ? Point{} : X / x;
  return -xa1 * a / (2.0 * kTwoPi) * (std::conj(Y) - Y) / ((X - std::conj(Y)) * (X - Y));
}

Point green_gradient(Point x, Point y, double beta) { return 2.0 * std::conj(kernel_K(x, y, beta)); }

double green_truncated(Point x, Point y, double beta, double r_max) {
  check_beta(beta);
  if (!(r_max > 0.0)) throw InvalidParameter("r_max", "must be positive");
  if (std::abs(x) > r_max * (1.0 + kAngleSlack) || std::abs(y) > r_max * (1.0 + kAngleSlack))
    fail(ErrorKind::domain, "point lies beyond r_max");
  const Point W = mapped(x / r_max, beta);
  const Point V = mapped(y / r_max, beta);
  if (x == y || W == V) fail(ErrorKind::singularity, "green is singular at x = y");
  const Point Vb = std::conj(V);
  const double num = std::norm(W - V) * std::norm(1.0 - W * V);
  const double den = std::norm(W - Vb) * std::norm(1.0 - W * Vb);
  return std::log(num / den) / (2.0 * kTwoPi);
}

Field2D poisson_quadrature(const Field2D& f, GreenKind kind) {
  const PolarGrid& g = *f.grid;
  const double beta = g.spec.beta;
  const double a = 1.0 / beta;
  const double r_max = g.r_max();
  if (kind == GreenKind::sector) {
    for (int i = 0; i < g.nr; ++i) {
      if (g.radii[i] < 0.5 * r_max) continue;
      for (int j = 0; j < g.ntheta; ++j)
        if (f.at(i, j) != 0.0)
          fail(ErrorKind::truncation, "source reaches R >= r_max/2; enlarge r_max or use the truncated kernel");
    }
  }

  // Mapped nodes: x^a for the sector, (x / r_max)^a on the half-disk.
  const double scale = kind == GreenKind::sector ? 1.0 : r_max;
  std::vector<Point> X(g.size());
  for (int i = 0; i < g.nr; ++i)
    for (int j = 0; j < g.ntheta; ++j) X[g.index(i, j)] = power_polar(g.radii[i] / scale, g.thetas[j], a);

  struct Source {
    Point Y;
    double mass;
    std::size_t k;
  };
  std::vector<Source> sources;
  for (int i = 0; i < g.nr; ++i)
    for (int j = 0; j < g.ntheta; ++j) {
      const double m = f.at(i, j) * g.area_weight(i, j);
      if (m != 0.0) sources.push_back({X[g.index(i, j)], m, g.index(i, j)});
    }

  const double cell_log = mean_log_radius(0.5 * g.ds(), 0.5 * g.dtheta());
  Field2D psi = Field2D::zeros(f.grid);
  const int i_end = kind == GreenKind::truncated ? g.nr - 1 : g.nr;
  for (int i = 0; i < i_end; ++i) {
    const double R0 = g.radii[i];
    for (int j = 1; j + 1 < g.ntheta; ++j) {
      const std::size_t k0 = g.index(i, j);
      const Point W = X[k0];
      const Point Wb = std::conj(W);
      double sum = 0.0;
      for (const Source& s : sources) {
        if (s.k == k0) continue;
        double q = std::norm(W - s.Y) / std::norm(Wb - s.Y);
        if (kind == GreenKind::truncated) q *= std::norm(1.0 - W * s.Y) / std::norm(1.0 - W * std::conj(s.Y));
        sum += 0.5 * std::log(q) * s.mass;
      }
      const double m0 = f.at(i, j) * g.area_weight(i, j);
      if (m0 != 0.0) {
        // ln|X - Y| = ln|x - y| + ln|dX/dx| + o(1), |x - y| ~ R0 |(ds, dtheta)|.
        double self = std::log(R0) + cell_log + std::log(a) + (a - 1.0) * std::log(R0) - a * std::log(scale) -
                      std::log(std::abs(W - Wb));
        if (kind == GreenKind::truncated) self += std::log(std::abs(1.0 - W * W)) - std::log(1.0 - std::norm(W));
        sum += self * m0;
      }
      psi.at(i, j) = sum / kTwoPi;
    }
  }
  return psi;
}

GradientField gradient_quadrature(const Field2D& f) {
  const PolarGrid& g = *f.grid;
  const double a = 1.0 / g.spec.beta;
  std::vector<Point> X(g.size());
  for (int i = 0; i < g.nr; ++i)
    for (int j = 0; j < g.ntheta; ++j) X[g.index(i, j)] = power_polar(g.radii[i], g.thetas[j], a);

  struct Source {
    Point Y;
    Point dY;  ///< conj(Y) - Y
    double mass;
    std::size_t k;
  };
  std::vector<Source> sources;
  for (int i = 0; i < g.nr; ++i)
    for (int j = 0; j < g.ntheta; ++j) {
      const double m = f.at(i, j) * g.area_weight(i, j);
      const Point Y = X[g.index(i, j)];
      if (m != 0.0 && Y.imag() != 0.0) sources.push_back({Y, std::conj(Y) - Y, m, g.index(i, j)});
    }

  GradientField out{Field2D::zeros(f.grid), Field2D::zeros(f.grid)};
  for (int i = 0; i < g.nr; ++i)
    for (int j = 0; j < g.ntheta; ++j) {
      const std::size_t k0 = g.index(i, j);
      const Point W = X[k0];
      Point sum{};
      for (const Source& s : sources) {
        if (s.k == k0) continue;
        sum += s.mass * s.dY / ((W - std::conj(s.Y)) * (W - s.Y));
      }
      const Point x = std::polar(g.radii[i], g.thetas[j]);
      const Point K = -(W / x) * a / (2.0 * kTwoPi) * sum;
      out.d_eta.at(i, j) = 2.0 * K.real();
      out.d_z.at(i, j) = -2.0 * K.imag();
    }
  return out;
}

double velocity_bound_check(const Field2D& f) {
  const double fmax = f.max_abs();
  if (fmax == 0.0) return 0.0;
  const GradientField grad = gradient_quadrature(f);
  const PolarGrid& g = *f.grid;
  double c = 0.0;
  for (int i = 0; i < g.nr; ++i)
    for (int j = 0; j < g.ntheta; ++j) {
      const double m = std::hypot(grad.d_eta.at(i, j), grad.d_z.at(i, j));
      c = std::fmax(c, m / (g.radii[i] * fmax));
    }
  return c;
}

}  // namespace coneflow
