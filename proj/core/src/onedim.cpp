#include "coneflow/onedim.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "coneflow/error.hpp"
#include "tridiagonal.hpp"

namespace coneflow::onedim {

namespace {

constexpr double kPi = std::numbers::pi;

double sup_abs(std::span<const double> f) {
  double s = 0.0;
  for (double v : f) s = std::fmax(s, std::fabs(v));
  return s;
}

void require_finite(std::span<const double> f, const char* what) {
  for (double v : f)
    if (!std::isfinite(v)) fail(ErrorKind::invalid_input, std::string(what) + " has non-finite entries");
}

void require_size(std::span<const double> f, const AngularGrid& grid, const char* what) {
  if (static_cast<int>(f.size()) != grid.n)
    fail(ErrorKind::invalid_input, std::string(what) + " length does not match the grid");
}

// Derivative used for the advective terms at node i.
double advective_derivative(std::span<const double> f, std::span<const double> central, double h,
                            double speed, std::size_t i, const AdvectionOptions& options) {
  const std::size_t n = f.size();
  bool upwind = false;
  switch (options.mode) {
    case AdvectionMode::central: break;
    case AdvectionMode::upwind: upwind = true; break;
    case AdvectionMode::hybrid:
      upwind = std::fabs(speed) * options.dt / h > options.upwind_threshold;
      break;
  }
  if (!upwind || speed == 0.0) return central[i];
  if (speed > 0.0 && i >= 2) return (3.0 * f[i] - 4.0 * f[i - 1] + f[i - 2]) / (2.0 * h);
  if (speed < 0.0 && i + 2 < n) return (-3.0 * f[i] + 4.0 * f[i + 1] - f[i + 2]) / (2.0 * h);
  return central[i];
}

std::vector<double> solve_elliptic(const AngularState& s, std::span<const double> g) {
  return s.system == AngularSystem::boussinesq ? solve_angular_poisson(g, s.grid)
                                               : solve_axis_poisson(g, s.grid);
}

Rates rates_of(const AngularState& s, const AdvectionOptions& options) {
  Rates r = s.system == AngularSystem::boussinesq ? rhs_1d(s, options)
                                                  : rhs_axis_1d(s.g, s.P, s.G, s.grid, options);
  if (s.pin_p_at_zero) r.dP_dt.front() = 0.0;
  return r;
}

}  // namespace

AngularGrid make_grid(double epsilon, int n) {
  if (!(epsilon > 0.0) || !std::isfinite(epsilon))
    throw InvalidParameter("epsilon", "must be positive");
  if (n < kMinNodes) throw InvalidParameter("n", "node count must be at least 17");
  AngularGrid grid = make_grid_on_interval(std::atan(1.0 / epsilon), n);
  grid.epsilon = epsilon;
  return grid;
}

AngularGrid make_grid_on_interval(double l, int n) {
  if (!(l > 0.0) || !std::isfinite(l)) throw InvalidParameter("l", "must be positive");
  if (n < kMinNodes) throw InvalidParameter("n", "node count must be at least 17");
  AngularGrid grid;
  grid.l = l;
  grid.n = n;
  grid.epsilon = l < kPi / 2 ? 1.0 / std::tan(l) : 0.0;
  grid.theta.resize(n);
  for (int i = 0; i < n; ++i) grid.theta[i] = l * static_cast<double>(i) / (n - 1);
  grid.theta.back() = l;
  return grid;
}

AngularState make_state(const AngularGrid& grid, std::vector<double> g0, std::vector<double> p0,
                        AngularSystem system) {
  require_size(g0, grid, "g0");
  require_size(p0, grid, "P0");
  require_finite(g0, "g0");
  require_finite(p0, "P0");
  AngularState s;
  s.grid = grid;
  s.system = system;
  s.g = std::move(g0);
  s.P = std::move(p0);
  s.pin_p_at_zero = std::fabs(s.P.front()) < 1e-12;
  if (s.pin_p_at_zero) s.P.front() = 0.0;
  s.G = solve_elliptic(s, s.g);
  return s;
}

AngularState paper_blowup_state(const AngularGrid& grid, AngularSystem system) {
  std::vector<double> p0(grid.n);
  for (int i = 0; i < grid.n; ++i) p0[i] = grid.theta[i] * grid.theta[i];
  return make_state(grid, std::vector<double>(grid.n, 0.0), std::move(p0), system);
}

std::vector<double> solve_angular_poisson(std::span<const double> g, const AngularGrid& grid) {
  require_size(g, grid, "g");
  require_finite(g, "g");
  if (grid.l >= kPi / 2)
    fail(ErrorKind::resonance, "G'' + 4G = g is not uniquely solvable for l >= pi/2");
  const int n = grid.n;
  const double h = grid.spacing();
  const double off = 1.0 / (h * h);
  const std::size_t m = static_cast<std::size_t>(n - 2);
  std::vector<double> a(m, off), b(m, -2.0 * off + 4.0), c(m, off), d(g.begin() + 1, g.end() - 1);
  std::vector<double> G(n, 0.0);
  if (!detail::solve_tridiagonal(a, b, c, d, std::span(G).subspan(1, m)))
    fail(ErrorKind::resonance, "angular operator is singular on this grid");
  return G;
}

std::vector<double> solve_angular_poisson_extrapolated(const std::function<double(double)>& g,
                                                       const AngularGrid& grid) {
  const AngularGrid fine = make_grid_on_interval(grid.l, 2 * grid.n - 1);
  std::vector<double> gc(grid.n), gf(fine.n);
  for (int i = 0; i < grid.n; ++i) gc[i] = g(grid.theta[i]);
  for (int i = 0; i < fine.n; ++i) gf[i] = g(fine.theta[i]);
  const auto Gc = solve_angular_poisson(gc, grid);
  const auto Gf = solve_angular_poisson(gf, fine);
  std::vector<double> G(grid.n);
  for (int i = 0; i < grid.n; ++i) G[i] = (4.0 * Gf[2 * i] - Gc[i]) / 3.0;
  return G;
}

std::vector<double> solve_axis_poisson(std::span<const double> g, const AngularGrid& grid) {
  require_size(g, grid, "g");
  require_finite(g, "g");
  if (grid.l >= kPi / 2) fail(ErrorKind::resonance, "tan(theta) is unbounded on [0, l] for l >= pi/2");
  const int n = grid.n;
  const double h = grid.spacing();
  const std::size_t m = static_cast<std::size_t>(n - 2);
  std::vector<double> a(m), b(m), c(m), d(g.begin() + 1, g.end() - 1);
  for (std::size_t k = 0; k < m; ++k) {
    const std::size_t i = k + 1;
    // G'' - (tan G)' + 6G with (tan G)' centred on the neighbours.
    a[k] = 1.0 / (h * h) + std::tan(grid.theta[i - 1]) / (2.0 * h);
    b[k] = -2.0 / (h * h) + 6.0;
    c[k] = 1.0 / (h * h) - std::tan(grid.theta[i + 1]) / (2.0 * h);
  }
  std::vector<double> G(n, 0.0);
  if (!detail::solve_tridiagonal(a, b, c, d, std::span(G).subspan(1, m), 1e-9))
    fail(ErrorKind::resonance, "axis operator is singular on this grid");
  return G;
}

double angular_poisson_residual(std::span<const double> G, std::span<const double> g,
                                const AngularGrid& grid) {
  const double h = grid.spacing();
  double r = 0.0;
  for (int i = 1; i + 1 < grid.n; ++i) {
    const double lhs = (G[i - 1] - 2.0 * G[i] + G[i + 1]) / (h * h) + 4.0 * G[i];
    r = std::fmax(r, std::fabs(lhs - g[i]));
  }
  return r;
}

std::vector<double> d1(std::span<const double> f, double h) {
  const std::size_t n = f.size();
  std::vector<double> df(n, 0.0);
  if (n < 5) fail(ErrorKind::invalid_input, "d1 needs at least five nodes");
  df[0] = (-3.0 * f[0] + 4.0 * f[1] - f[2]) / (2.0 * h);
  df[n - 1] = (3.0 * f[n - 1] - 4.0 * f[n - 2] + f[n - 3]) / (2.0 * h);
  df[1] = (f[2] - f[0]) / (2.0 * h);
  df[n - 2] = (f[n - 1] - f[n - 3]) / (2.0 * h);
  for (std::size_t i = 2; i + 2 < n; ++i)
    df[i] = (f[i - 2] - 8.0 * f[i - 1] + 8.0 * f[i + 1] - f[i + 2]) / (12.0 * h);
  return df;
}

std::vector<double> d2(std::span<const double> f, double h) {
  const std::size_t n = f.size();
  std::vector<double> df(n, 0.0);
  if (n < 5) fail(ErrorKind::invalid_input, "d2 needs at least five nodes");
  const double h2 = h * h;
  df[0] = (2.0 * f[0] - 5.0 * f[1] + 4.0 * f[2] - f[3]) / h2;
  df[n - 1] = (2.0 * f[n - 1] - 5.0 * f[n - 2] + 4.0 * f[n - 3] - f[n - 4]) / h2;
  df[1] = (f[0] - 2.0 * f[1] + f[2]) / h2;
  df[n - 2] = (f[n - 3] - 2.0 * f[n - 2] + f[n - 1]) / h2;
  for (std::size_t i = 2; i + 2 < n; ++i)
    df[i] = (-f[i - 2] + 16.0 * f[i - 1] - 30.0 * f[i] + 16.0 * f[i + 1] - f[i + 2]) / (12.0 * h2);
  return df;
}

Rates rhs_1d(const AngularState& state, const AdvectionOptions& options) {
  const AngularGrid& grid = state.grid;
  require_size(state.g, grid, "g");
  require_size(state.P, grid, "P");
  require_size(state.G, grid, "G");
  const double h = grid.spacing();
  const auto dg = d1(state.g, h);
  const auto dP = d1(state.P, h);
  const auto dG = d1(state.G, h);
  Rates r{std::vector<double>(grid.n), std::vector<double>(grid.n)};
  for (int i = 0; i < grid.n; ++i) {
    const double speed = 2.0 * state.G[i];
    const double th = grid.theta[i];
    const double adv_g = advective_derivative(state.g, dg, h, speed, i, options);
    const double adv_P = advective_derivative(state.P, dP, h, speed, i, options);
    r.dg_dt[i] = -speed * adv_g + 2.0 * (std::sin(th) * state.P[i] + std::cos(th) * dP[i]);
    r.dP_dt[i] = -speed * adv_P + dG[i] * state.P[i];
  }
  return r;
}

Rates rhs_axis_1d(std::span<const double> g, std::span<const double> P, std::span<const double> G,
                  const AngularGrid& grid, const AdvectionOptions& options) {
  require_size(g, grid, "g");
  require_size(P, grid, "P");
  require_size(G, grid, "G");
  const double h = grid.spacing();
  const auto dg = d1(g, h);
  const auto dP = d1(P, h);
  const auto dG = d1(G, h);
  Rates r{std::vector<double>(grid.n), std::vector<double>(grid.n)};
  for (int i = 0; i < grid.n; ++i) {
    const double speed = -3.0 * G[i];
    const double tn = std::tan(grid.theta[i]);
    const double adv_g = advective_derivative(g, dg, h, speed, i, options);
    const double adv_P = advective_derivative(P, dP, h, speed, i, options);
    r.dg_dt[i] = -speed * adv_g + (dG[i] + 2.0 * tn * G[i]) * g[i] + 2.0 * (tn * P[i] + dP[i]) * P[i];
    r.dP_dt[i] = -speed * adv_P - (2.0 * dG[i] + tn * G[i]) * P[i];
  }
  return r;
}

std::vector<double> transport_speed(const AngularState& state) {
  const double factor = state.system == AngularSystem::boussinesq ? 2.0 : -3.0;
  std::vector<double> c(state.G.size());
  for (std::size_t i = 0; i < c.size(); ++i) c[i] = factor * state.G[i];
  return c;
}

double admissible_dt(const AngularState& state) {
  const double speed = sup_abs(transport_speed(state));
  if (speed == 0.0) return std::numeric_limits<double>::infinity();
  return 0.5 * state.grid.spacing() / speed;
}

AngularState step_1d(const AngularState& state, double dt, AdvectionMode mode) {
  if (!(dt > 0.0)) throw InvalidParameter("dt", "must be positive");
  const double dt_max = admissible_dt(state);
  if (dt > dt_max)
    throw StepRejected(dt_max, "CFL bound dt * max|speed| / h <= 0.5 violated");

  const AdvectionOptions options{mode, dt, 0.1};
  const int n = state.grid.n;
  auto stage = [&](const AngularState& base, const Rates& k, double factor) {
    AngularState s = base;
    for (int i = 0; i < n; ++i) {
      s.g[i] += factor * k.dg_dt[i];
      s.P[i] += factor * k.dP_dt[i];
    }
    if (s.pin_p_at_zero) s.P.front() = 0.0;
    s.G = solve_elliptic(s, s.g);
    return s;
  };

  const Rates k1 = rates_of(state, options);
  const Rates k2 = rates_of(stage(state, k1, 0.5 * dt), options);
  const Rates k3 = rates_of(stage(state, k2, 0.5 * dt), options);
  const Rates k4 = rates_of(stage(state, k3, dt), options);

  AngularState next = state;
  for (int i = 0; i < n; ++i) {
    next.g[i] += dt / 6.0 * (k1.dg_dt[i] + 2.0 * k2.dg_dt[i] + 2.0 * k3.dg_dt[i] + k4.dg_dt[i]);
    next.P[i] += dt / 6.0 * (k1.dP_dt[i] + 2.0 * k2.dP_dt[i] + 2.0 * k3.dP_dt[i] + k4.dP_dt[i]);
  }
  if (next.pin_p_at_zero) next.P.front() = 0.0;
  for (int i = 0; i < n; ++i)
    if (!std::isfinite(next.g[i]) || !std::isfinite(next.P[i]))
      fail(ErrorKind::invalid_input, "RK4 step produced non-finite values");
  next.G = solve_elliptic(next, next.g);
  next.t = state.t + dt;
  return next;
}

BlowupDiagnostics1D diagnostics_1d(const AngularState& state) {
  const AngularGrid& grid = state.grid;
  const double h = grid.spacing();
  const int n = grid.n;
  BlowupDiagnostics1D d;
  d.t = state.t;
  d.sup_abs_g = sup_abs(state.g);
  double integral = 0.5 * (state.g.front() + state.g.back());
  for (int i = 1; i + 1 < n; ++i) integral += state.g[i];
  d.integral_g = integral * h;
  d.P_at_l = state.P.back();
  const auto& G = state.G;
  d.Gprime_0 = (-3.0 * G[0] + 4.0 * G[1] - G[2]) / (2.0 * h);
  d.Gprime_l = (3.0 * G[n - 1] - 4.0 * G[n - 2] + G[n - 3]) / (2.0 * h);
  // Sign quantities use stencils that cannot change sign on monotone or
  // convex samples: forward differences and the three-point second difference.
  d.min_g = *std::min_element(state.g.begin(), state.g.end());
  d.min_P = *std::min_element(state.P.begin(), state.P.end());
  d.min_dg = std::numeric_limits<double>::infinity();
  d.min_dP = std::numeric_limits<double>::infinity();
  for (int i = 0; i + 1 < n; ++i) {
    d.min_dg = std::fmin(d.min_dg, (state.g[i + 1] - state.g[i]) / h);
    d.min_dP = std::fmin(d.min_dP, (state.P[i + 1] - state.P[i]) / h);
  }
  double m = std::numeric_limits<double>::infinity();
  for (int i = 1; i + 1 < n; ++i)
    m = std::fmin(m, state.P[i] + (state.P[i - 1] - 2.0 * state.P[i] + state.P[i + 1]) / (h * h));
  d.min_P_plus_Ppp = m;
  return d;
}

const std::vector<std::string>& diagnostics_1d_columns() {
  static const std::vector<std::string> cols{
      "t",     "sup_abs_g", "integral_g", "P_at_l", "Gprime_0",       "Gprime_l",
      "min_g", "min_dg",    "min_P",      "min_dP", "min_P_plus_Ppp",
  };
  return cols;
}

std::vector<double> diagnostics_1d_row(const BlowupDiagnostics1D& d) {
  return {d.t,     d.sup_abs_g, d.integral_g, d.P_at_l, d.Gprime_0,       d.Gprime_l,
          d.min_g, d.min_dg,    d.min_P,      d.min_dP, d.min_P_plus_Ppp};
}

BlowupEstimate estimate_blowup_time(std::span<const BlowupDiagnostics1D> series) {
  const std::size_t m = series.size();
  if (m < 4) fail(ErrorKind::no_blowup, "series too short to fit a blow-up time");
  const std::size_t count = std::max<std::size_t>(3, (m + 3) / 4);
  const auto tail = series.subspan(m - count);
  for (std::size_t k = 1; k < tail.size(); ++k)
    if (!(tail[k].sup_abs_g > tail[k - 1].sup_abs_g))
      fail(ErrorKind::no_blowup, "sup|g| is not increasing over the last quartile");

  double st = 0.0, sy = 0.0;
  for (const auto& d : tail) {
    st += d.t;
    sy += 1.0 / d.sup_abs_g;
  }
  const double nt = static_cast<double>(tail.size());
  const double mt = st / nt, my = sy / nt;
  double stt = 0.0, sty = 0.0, syy = 0.0;
  for (const auto& d : tail) {
    const double dt = d.t - mt, dy = 1.0 / d.sup_abs_g - my;
    stt += dt * dt;
    sty += dt * dy;
    syy += dy * dy;
  }
  if (stt == 0.0) fail(ErrorKind::no_blowup, "degenerate time samples");
  const double slope = sty / stt;
  if (!(slope < 0.0)) fail(ErrorKind::no_blowup, "1/sup|g| is not decreasing");
  const double intercept = my - slope * mt;
  BlowupEstimate est;
  est.t_star = -intercept / slope;
  est.confidence = syy > 0.0 ? (sty * sty) / (stt * syy) : 1.0;
  if (!std::isfinite(est.t_star) || est.t_star < tail.front().t)
    fail(ErrorKind::no_blowup, "fitted zero of 1/sup|g| lies in the past");
  return est;
}

const char* to_string(StopReason reason) {
  switch (reason) {
    case StopReason::reached_t_end: return "reached_t_end";
    case StopReason::blowup: return "blowup";
    case StopReason::dt_exhausted: return "dt_exhausted";
  }
  return "unknown";
}

namespace {

double adaptive_dt(const AngularState& s, const RunOptions1D& o) {
  const double speed = std::fmax(sup_abs(transport_speed(s)), 1e-12);
  return std::fmin(o.dt_ceiling, o.cfl * s.grid.spacing() / speed);
}

}  // namespace

RunResult1D run_1d(AngularState initial, const RunOptions1D& options) {
  if (!(options.dt_ceiling > 0.0)) throw InvalidParameter("dt_ceiling", "must be positive");
  if (options.record_every < 1) throw InvalidParameter("record_every", "must be at least 1");
  RunResult1D out;
  double g0_plus_one = 0.0;
  for (double v : initial.g) g0_plus_one = std::fmax(g0_plus_one, std::fabs(v + 1.0));
  const double threshold = options.blowup_factor * g0_plus_one;

  AngularState s = std::move(initial);
  out.series.push_back(diagnostics_1d(s));
  if (options.observer) options.observer(s);
  bool recorded_last = true;
  while (true) {
    if (s.t >= options.t_end) {
      out.reason = StopReason::reached_t_end;
      break;
    }
    const double dt_cfl = adaptive_dt(s, options);
    if (dt_cfl < options.dt_floor) {
      out.reason = StopReason::dt_exhausted;
      break;
    }
    double dt = dt_cfl;
    const bool last = s.t + dt >= options.t_end;
    if (last) dt = options.t_end - s.t;
    s = step_1d(s, dt, options.mode);
    if (last) s.t = options.t_end;
    ++out.steps;
    if (options.observer) options.observer(s);
    recorded_last = false;
    if (out.steps % options.record_every == 0) {
      out.series.push_back(diagnostics_1d(s));
      recorded_last = true;
    }
    if (sup_abs(s.g) > threshold) {
      out.reason = StopReason::blowup;
      break;
    }
  }
  if (!recorded_last) out.series.push_back(diagnostics_1d(s));
  out.final_state = std::move(s);
  return out;
}

bool advance_to(AngularState& state, double t_target, const RunOptions1D& options) {
  while (state.t < t_target) {
    const double dt_cfl = adaptive_dt(state, options);
    if (dt_cfl < options.dt_floor) return false;
    const double remaining = t_target - state.t;
    if (remaining <= 1e-15 * std::fmax(1.0, t_target)) {
      state.t = t_target;
      break;
    }
    const double dt = std::fmin(dt_cfl, remaining);
    state = step_1d(state, dt, options.mode);
    if (dt == remaining) state.t = t_target;
  }
  return true;
}

}  // namespace coneflow::onedim
