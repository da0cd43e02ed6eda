#pragma once

// Sector geometry and sampled fields.
//
// The sector {0 <= eps z <= eta} is parameterised by (R, theta) with
// eta = R cos(theta), z = R sin(theta), theta in [0, l], l = arctan(1/eps).
// Radii are geometrically graded toward the corner, so s = ln R is uniform.

#include <complex>
#include <filesystem>
#include <functional>
#include <memory>
#include <span>
#include <vector>

namespace coneflow {

/// arctan(1/epsilon) / pi, the exponent with tan(beta pi) = 1/epsilon.
double beta_from_eps(double epsilon);

struct SectorSpec {
  double epsilon = 1.0;
  double beta = 0.25;
  double l = 0.0;  ///< opening angle beta * pi
  double r_max = 1.0;

  static SectorSpec from_epsilon(double epsilon, double r_max);
};

struct PolarGrid {
  SectorSpec spec;
  int nr = 0;
  int ntheta = 0;
  std::vector<double> radii;   ///< r_min ... r_max, constant ratio
  std::vector<double> thetas;  ///< 0 ... l, uniform

  [[nodiscard]] double r_min() const { return radii.front(); }
  [[nodiscard]] double r_max() const { return radii.back(); }
  [[nodiscard]] double grading() const { return radii[1] / radii[0]; }
  [[nodiscard]] double ds() const;
  [[nodiscard]] double dtheta() const { return spec.l / (ntheta - 1); }
  [[nodiscard]] std::size_t size() const { return static_cast<std::size_t>(nr) * ntheta; }
  [[nodiscard]] std::size_t index(int i, int j) const {
    return static_cast<std::size_t>(i) * ntheta + j;
  }
  [[nodiscard]] double eta(int i, int j) const;
  [[nodiscard]] double z(int i, int j) const;
  [[nodiscard]] std::complex<double> point(int i, int j) const { return {eta(i, j), z(i, j)}; }
  /// Trapezoid weight in (ln R, theta) times the Jacobian R^2.
  [[nodiscard]] double area_weight(int i, int j) const;
};

using GridPtr = std::shared_ptr<const PolarGrid>;

/// nr radii from r_min to spec.r_max with constant ratio.
GridPtr make_polar_grid(const SectorSpec& spec, int nr, int ntheta, double r_min);

/// Radial count chosen so the ratio is as close as possible to `grading`.
GridPtr make_graded_grid(const SectorSpec& spec, double grading, int ntheta, double r_min);

struct Field2D {
  GridPtr grid;
  std::vector<double> values;  ///< row-major: radius outer, angle inner

  static Field2D zeros(GridPtr grid);
  static Field2D sample(GridPtr grid, const std::function<double(double R, double theta)>& f);

  [[nodiscard]] double& at(int i, int j) { return values[grid->index(i, j)]; }
  [[nodiscard]] double at(int i, int j) const { return values[grid->index(i, j)]; }
  [[nodiscard]] double max_abs() const;
};

Field2D operator+(const Field2D& a, const Field2D& b);
Field2D operator-(const Field2D& a, const Field2D& b);
Field2D operator*(double c, const Field2D& a);

/// Writes <stem>.hdr (key=value text) and <stem>.bin (float64 little-endian,
/// radius outer, angle inner).
void write_field(const Field2D& field, const std::filesystem::path& stem);
Field2D read_field(const std::filesystem::path& stem);

/// One row per node: i, j, R, theta, eta, z, value.
void write_field_csv(const Field2D& field, const std::filesystem::path& path);

}  // namespace coneflow
