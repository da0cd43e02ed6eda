#pragma once

// Scale-invariant angular systems on [0, l].
//
// Two systems share the grid, the state layout and the time stepper:
//   boussinesq:  g_t + 2G g' = 2(sin P + cos P'),  P_t + 2G P' = G' P,
//                G'' + 4G = g,
//   axis:        g_t - 3G g' = (G' + 2 tan G) g + 2(tan P + P') P,
//                P_t - 3G P' = -(2G' + tan G) P,
//                6G - (tan G)' + G'' = g,
// all with G(0) = G(l) = 0.

#include <functional>
#include <limits>
#include <span>
#include <string>
#include <vector>

namespace coneflow::onedim {

inline constexpr int kMinNodes = 17;

struct AngularGrid {
  double epsilon = 0.0;  ///< domain slope; l = arctan(1/epsilon)
  double l = 0.0;
  int n = 0;
  std::vector<double> theta;

  [[nodiscard]] double spacing() const { return l / (n - 1); }
};

/// Uniform grid on [0, arctan(1/epsilon)].
AngularGrid make_grid(double epsilon, int n);

/// Uniform grid on [0, l] for an arbitrary opening angle. Used by the axis
/// system (whose interval is set by the cone) and to exercise the resonance
/// guard. epsilon is recorded as 1/tan(l), or 0 when l >= pi/2.
AngularGrid make_grid_on_interval(double l, int n);

enum class AngularSystem { boussinesq, axis };

struct AngularState {
  AngularGrid grid;
  AngularSystem system = AngularSystem::boussinesq;
  double t = 0.0;
  std::vector<double> g;
  std::vector<double> P;
  std::vector<double> G;  ///< cached elliptic solve of g
  bool pin_p_at_zero = false;
};

/// Builds a state from initial profiles, solving for G and deciding whether
/// P(0) is pinned (only when |P0(0)| < 1e-12).
AngularState make_state(const AngularGrid& grid, std::vector<double> g0, std::vector<double> p0,
                        AngularSystem system = AngularSystem::boussinesq);

/// g0 = 0, P0 = theta^2.
AngularState paper_blowup_state(const AngularGrid& grid,
                                AngularSystem system = AngularSystem::boussinesq);

// ---------------------------------------------------------------------------
// Elliptic problems

/// Second-order three-point solve of G'' + 4G = g with G(0) = G(l) = 0.
/// Throws ErrorKind::resonance when l >= pi/2.
std::vector<double> solve_angular_poisson(std::span<const double> g, const AngularGrid& grid);

/// Same operator, one level of Richardson extrapolation: solves on this grid
/// and on the grid with 2n-1 nodes and returns (4 G_fine - G_coarse) / 3 at
/// the coarse nodes.
std::vector<double> solve_angular_poisson_extrapolated(const std::function<double(double)>& g,
                                                       const AngularGrid& grid);

/// Second-order solve of 6G - (tan G)' + G'' = g, G(0) = G(l) = 0.
/// Throws ErrorKind::resonance when the discrete operator is singular.
std::vector<double> solve_axis_poisson(std::span<const double> g, const AngularGrid& grid);

/// max |D2 G + 4G - g| over interior nodes for the three-point operator.
double angular_poisson_residual(std::span<const double> G, std::span<const double> g,
                                const AngularGrid& grid);

// ---------------------------------------------------------------------------
// Finite differences on the uniform grid

/// First derivative: fourth-order central inside, second-order central on
/// the nodes next to the ends, second-order one-sided at the ends.
std::vector<double> d1(std::span<const double> f, double h);
/// Second derivative with the same stencil layout as d1.
std::vector<double> d2(std::span<const double> f, double h);

// ---------------------------------------------------------------------------
// Right-hand sides

enum class AdvectionMode {
  central,  ///< d1 everywhere
  upwind,   ///< second-order upwind wherever the stencil fits
  hybrid,   ///< upwind only where |speed| dt / h exceeds the threshold
};

struct AdvectionOptions {
  AdvectionMode mode = AdvectionMode::upwind;
  double dt = 0.0;  ///< only consulted in hybrid mode
  double upwind_threshold = 0.1;
};

struct Rates {
  std::vector<double> dg_dt;
  std::vector<double> dP_dt;
};

/// Boussinesq right-hand side; requires state.G consistent with state.g.
Rates rhs_1d(const AngularState& state, const AdvectionOptions& options = {});

/// Axis-system right-hand side for a G obtained from solve_axis_poisson.
Rates rhs_axis_1d(std::span<const double> g, std::span<const double> P, std::span<const double> G,
                  const AngularGrid& grid, const AdvectionOptions& options = {});

/// Transport speed d(theta)/dt of the advective terms.
std::vector<double> transport_speed(const AngularState& state);

/// Largest dt admitted by the step CFL bound dt * max|speed| / h <= 0.5.
double admissible_dt(const AngularState& state);

// ---------------------------------------------------------------------------
// Time stepping

/// One classical RK4 step with G re-solved at every stage. Throws
/// StepRejected carrying admissible_dt() on CFL violation.
AngularState step_1d(const AngularState& state, double dt,
                     AdvectionMode mode = AdvectionMode::upwind);

/// min_dg and min_dP are minima of forward differences, min_P_plus_Ppp uses
/// the three-point second difference on interior nodes; G' at the ends is the
/// second-order one-sided difference.
struct BlowupDiagnostics1D {
  double t = 0.0;
  double sup_abs_g = 0.0;
  double integral_g = 0.0;
  double P_at_l = 0.0;
  double Gprime_0 = 0.0;
  double Gprime_l = 0.0;
  double min_g = 0.0;
  double min_dg = 0.0;
  double min_P = 0.0;
  double min_dP = 0.0;
  double min_P_plus_Ppp = 0.0;
};

BlowupDiagnostics1D diagnostics_1d(const AngularState& state);

/// Column names matching the field order of BlowupDiagnostics1D.
const std::vector<std::string>& diagnostics_1d_columns();
std::vector<double> diagnostics_1d_row(const BlowupDiagnostics1D& d);

struct BlowupEstimate {
  double t_star = 0.0;
  double confidence = 0.0;  ///< R^2 of the reciprocal fit
};

/// Least-squares fit of 1/sup|g| against t over the last quartile of the
/// series. Throws ErrorKind::no_blowup when the tail is not increasing or the
/// fitted line does not cross zero forward in time.
BlowupEstimate estimate_blowup_time(std::span<const BlowupDiagnostics1D> series);

enum class StopReason { reached_t_end, blowup, dt_exhausted };
const char* to_string(StopReason reason);

struct RunOptions1D {
  double dt_ceiling = 1e-2;
  double t_end = std::numeric_limits<double>::infinity();
  int record_every = 1;
  double cfl = 0.4;
  double blowup_factor = 1e6;
  double dt_floor = 1e-10;
  AdvectionMode mode = AdvectionMode::upwind;
  /// Called on the initial state and after every accepted step.
  std::function<void(const AngularState&)> observer;
};

struct RunResult1D {
  std::vector<BlowupDiagnostics1D> series;
  AngularState final_state;
  StopReason reason = StopReason::reached_t_end;
  long steps = 0;
};

/// Adaptive integration, dt = min(ceiling, cfl h / max(|speed|, 1e-12)).
/// Halts when sup|g| > blowup_factor * sup|g0 + 1|, when the CFL dt drops
/// below dt_floor, or at t_end. The first and the final states are always
/// recorded.
RunResult1D run_1d(AngularState initial, const RunOptions1D& options);

/// Advances state to exactly t_target with adaptive sub-steps. Returns false
/// (leaving the state at the last accepted time) if the CFL dt collapses
/// below options.dt_floor first.
bool advance_to(AngularState& state, double t_target, const RunOptions1D& options);

}  // namespace coneflow::onedim
