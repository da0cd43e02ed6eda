#pragma once

// Axisymmetric Euler near the cone tip in the shifted frame eta = r - 1:
//   D/Dt (omega / (1 + eta)) = 2 u u_z / (1 + eta)^2,
//   D/Dt ((1 + eta) u) = 0,
//   L psi = (1 + eta) omega,  v = (psi_z, -psi_eta) / (1 + eta),
// on the half-sector 0 <= theta <= l. theta = 0 is the symmetry plane
// (u even, omega odd), theta = l is the wall.

#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "coneflow/elliptic.hpp"
#include "coneflow/onedim.hpp"
#include "coneflow/sector.hpp"

namespace coneflow::axisym {

inline constexpr double kMinOuterRadius = 4.0;

/// 1 on R <= r1, 0 on R >= r2, quintic smoothstep in between.
struct Cutoff {
  double r1 = 1.0;
  double r2 = 2.0;

  [[nodiscard]] double operator()(double R) const;
  [[nodiscard]] double derivative(double R, int order) const;
};

struct FlowState {
  GridPtr grid;
  double t = 0.0;
  Field2D omega;
  Field2D u;
  Field2D psi;
  Field2D v1;  ///< eta component
  Field2D v2;  ///< z component
};

/// Interpolant for the transported fields. cubic is tensor Lagrange clipped
/// to the enclosing cell, so no new extrema appear.
enum class Interpolation { bilinear, cubic };
const char* to_string(Interpolation interp);

/// Holds the factorised operator L for one grid; stepping and velocity
/// recovery reuse it.
class FlowSolver {
 public:
  explicit FlowSolver(GridPtr grid, Interpolation interp = Interpolation::cubic);

  [[nodiscard]] const GridPtr& grid() const { return grid_; }
  [[nodiscard]] Interpolation interpolation() const { return interp_; }

  /// Fills psi, v1, v2 from omega.
  void compute_velocity(FlowState& state) const;

  /// max over nodes of |v_R| / (R ds) + |v_theta| / (R dtheta), the Courant
  /// number per unit time in logical coordinates.
  [[nodiscard]] double logical_speed(const FlowState& state) const;

  [[nodiscard]] double admissible_dt(const FlowState& state, double cfl = 1.0) const;

  /// Semi-Lagrangian step: RK2 backtrace through the bilinear frozen velocity,
  /// interpolation of the transported fields in (ln R, theta), trapezoidal source along the
  /// characteristic. Throws StepRejected above Courant number 1 and
  /// ErrorKind::support_escape when a foot point leaves through R = r_max.
  [[nodiscard]] FlowState step(const FlowState& state, double dt) const;

 private:
  GridPtr grid_;
  Interpolation interp_;
  std::shared_ptr<const SectorOperator> op_;
};

/// omega0 = g0 phi, u0 = (1 / (1 + eta) + R P0) phi with g0, P0 sampled on
/// the angular nodes. Throws ConfigError("r_max") when r_max < 4.
FlowState init_blowup_data(const FlowSolver& solver, std::span<const double> g0, std::span<const double> P0,
                           const Cutoff& cutoff = {});

/// omega0 = g0 phi, u0 = 0.
FlowState init_noswirl_data(const FlowSolver& solver, std::span<const double> g0, const Cutoff& cutoff = {});

struct FlowMetrics {
  double energy = 0.0;  ///< 2 int (|v|^2 + u^2)(1 + eta), both halves
  double sup_omega = 0.0;
  double sup_grad_u = 0.0;
  double sup_omega_over_r = 0.0;
  double l1_omega = 0.0;  ///< 2 int |omega| d eta dz
  double q2_min = 0.0;
  double q2_max = 0.0;
  double corner_u = 0.0;  ///< u on the innermost node of theta = 0
  double max_normal_velocity = 0.0;
  double sup_velocity = 0.0;
};

FlowMetrics flow_metrics(const FlowState& state);

struct ShadowOptions {
  std::vector<double> probe_fractions{0.4, 0.2, 0.1, 0.05};
  Cutoff cutoff{};
  /// The error is omega - orientation * g phi.
  double orientation = 1.0;
  double clock_tolerance = 0.0;
};

struct ShadowReport {
  double t = 0.0;
  std::vector<double> probe_radii;
  std::vector<double> sup_err_per_radius;
  double fitted_alpha = 0.0;
  double energy = 0.0;
  double bkm_accumulator = 0.0;
  double sup_omega_over_r = 0.0;
  double l1_omega = 0.0;
};

/// Compares omega on the probe radii (linear in ln R between rings) with the
/// 1D profile. oned.grid must share the angular nodes: n - 1 a multiple of
/// ntheta - 1. Throws ErrorKind::synchronization if |state.t - oned.t|
/// exceeds clock_tolerance.
ShadowReport shadow_diagnostics(const FlowState& state, const onedim::AngularState& oned, double bkm_accumulator,
                                const ShadowOptions& options = {});

// ---------------------------------------------------------------------------
// Runs

struct DiagnosticsRecord {
  int step = 0;
  double t = 0.0;
  double dt = 0.0;
  FlowMetrics metrics;
  double bkm_accumulator = 0.0;
  bool has_shadow = false;
  ShadowReport shadow;
  double sup_g_1d = 0.0;
};

std::vector<std::string> diagnostics_columns(std::size_t probes);
std::vector<double> diagnostics_row(const DiagnosticsRecord& record, std::size_t probes);

enum class AxisymStop { reached_t_end, blowup, dt_exhausted };
const char* to_string(AxisymStop stop);

struct AxisymOptions {
  double t_end = 1.0;
  double dt_ceiling = 1e-2;
  double cfl = 0.8;
  double dt_floor = 1e-8;
  double blowup_factor = 1e6;  ///< stop once sup|omega| exceeds this times (1 + sup|omega0|)
  int record_every = 1;
  std::vector<double> report_times;  ///< always hit exactly and recorded
  int snapshot_every = 0;            ///< 0 disables
  std::filesystem::path snapshot_dir;
  ShadowOptions shadow;
  onedim::RunOptions1D oned;
};

struct AxisymResult {
  std::vector<DiagnosticsRecord> records;
  FlowState final_state;
  std::optional<onedim::AngularState> final_partner;
  AxisymStop reason = AxisymStop::reached_t_end;
  int steps = 0;
};

/// Integrates to t_end. With a 1D partner the partner is advanced on the
/// same clock and every record carries a shadow report.
AxisymResult run_axisym(const FlowSolver& solver, FlowState initial, std::optional<onedim::AngularState> partner,
                        const AxisymOptions& options);

}  // namespace coneflow::axisym
