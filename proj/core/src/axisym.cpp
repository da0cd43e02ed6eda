#include "coneflow/axisym.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include "coneflow/derivatives.hpp"
#include "coneflow/error.hpp"

namespace coneflow::axisym {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double smoothstep5(double x, int order) {
  switch (order) {
    case 0: return x * x * x * (10.0 + x * (-15.0 + 6.0 * x));
    case 1: return 30.0 * x * x * (1.0 - x) * (1.0 - x);
    case 2: return 60.0 * x * (1.0 - x) * (1.0 - 2.0 * x);
    default: return 60.0 - 360.0 * x + 360.0 * x * x;
  }
}

// Bilinear lookup in (ln R, theta) with the symmetry-plane mirror at
// theta = 0 and clamping on the wall and the radial ends.
class Sampler {
 public:
  explicit Sampler(const PolarGrid& g)
      : g_(g), s0_(std::log(g.r_min())), ds_(g.ds()), dt_(g.dtheta()), smax_(std::log(g.r_max())) {}

  struct Foot {
    int i, j;
    double fs, ft;
    double mirror;  ///< -1 when the point was reflected through theta = 0
  };

  [[nodiscard]] Foot locate(double s, double theta) const {
    Foot f{};
    f.mirror = 1.0;
    if (theta < 0.0) {
      theta = -theta;
      f.mirror = -1.0;
    }
    theta = std::min(theta, g_.spec.l);
    if (s > smax_ + 0.5 * ds_) fail(ErrorKind::support_escape, "backtrace left through R = r_max; enlarge r_max");
    s = std::clamp(s, s0_, smax_);
    const double xs = (s - s0_) / ds_;
    const double xt = theta / dt_;
    f.i = std::clamp(static_cast<int>(std::floor(xs)), 0, g_.nr - 2);
    f.j = std::clamp(static_cast<int>(std::floor(xt)), 0, g_.ntheta - 2);
    f.fs = std::clamp(xs - f.i, 0.0, 1.0);
    f.ft = std::clamp(xt - f.j, 0.0, 1.0);
    return f;
  }

  /// parity +1 for fields even in z, -1 for odd ones.
  [[nodiscard]] double value(const Field2D& q, const Foot& f, double parity) const {
    const double a = q.at(f.i, f.j), b = q.at(f.i + 1, f.j);
    const double c = q.at(f.i, f.j + 1), d = q.at(f.i + 1, f.j + 1);
    const double v = (1.0 - f.ft) * ((1.0 - f.fs) * a + f.fs * b) + f.ft * ((1.0 - f.fs) * c + f.fs * d);
    return f.mirror < 0.0 && parity < 0.0 ? -v : v;
  }

  /// Tensor cubic Lagrange clipped to the range of the four cell corners.
  [[nodiscard]] double value_cubic(const Field2D& q, const Foot& f, double parity) const {
    const int i0 = std::clamp(f.i - 1, 0, g_.nr - 4);
    double ws[4];
    lagrange(f.i + f.fs - i0, ws);
    const int j0 = std::min(f.j - 1, g_.ntheta - 4);
    double wt[4];
    lagrange(f.j + f.ft - j0, wt);
    double v = 0.0;
    for (int b = 0; b < 4; ++b) {
      const int j = j0 + b;
      double row = 0.0;
      for (int a = 0; a < 4; ++a) {
        // Ghost column j = -1 mirrors j = 1 through the symmetry plane.
        const double x = j < 0 ? parity * q.at(i0 + a, -j) : q.at(i0 + a, j);
        row += ws[a] * x;
      }
      v += wt[b] * row;
    }
    const double a = q.at(f.i, f.j), b = q.at(f.i + 1, f.j);
    const double c = q.at(f.i, f.j + 1), d = q.at(f.i + 1, f.j + 1);
    v = std::clamp(v, std::min({a, b, c, d}), std::max({a, b, c, d}));
    return f.mirror < 0.0 && parity < 0.0 ? -v : v;
  }

  [[nodiscard]] double s_of(int i) const { return s0_ + ds_ * i; }
  [[nodiscard]] double theta_of(int j) const { return g_.thetas[j]; }

 private:
  // Weights at position p for nodes 0..3.
  static void lagrange(double p, double w[4]) {
    for (int m = 0; m < 4; ++m) {
      double c = 1.0;
      for (int n = 0; n < 4; ++n)
        if (n != m) c *= (p - n) / static_cast<double>(m - n);
      w[m] = c;
    }
  }

  const PolarGrid& g_;
  double s0_, ds_, dt_, smax_;
};

struct LogicalVelocity {
  Field2D as;  ///< ds/dt, even in z
  Field2D at;  ///< dtheta/dt, odd in z
};

LogicalVelocity logical_velocity(const FlowState& st) {
  const PolarGrid& g = *st.grid;
  LogicalVelocity lv{Field2D::zeros(st.grid), Field2D::zeros(st.grid)};
  for (int i = 0; i < g.nr; ++i)
    for (int j = 0; j < g.ntheta; ++j) {
      const double c = std::cos(g.thetas[j]), s = std::sin(g.thetas[j]);
      const double v1 = st.v1.at(i, j), v2 = st.v2.at(i, j);
      lv.as.at(i, j) = (c * v1 + s * v2) / g.radii[i];
      lv.at.at(i, j) = (-s * v1 + c * v2) / g.radii[i];
    }
  return lv;
}

Field2D stretching(const Field2D& u) {
  const PolarGrid& g = *u.grid;
  Field2D u2 = u;
  for (double& x : u2.values) x *= x;
  Field2D src = d_z(u2);
  for (int i = 0; i < g.nr; ++i)
    for (int j = 0; j < g.ntheta; ++j) {
      const double r = 1.0 + g.eta(i, j);
      src.at(i, j) /= r * r;
    }
  // d_z of an even field vanishes on the symmetry plane.
  for (int i = 0; i < g.nr; ++i) src.at(i, 0) = 0.0;
  return src;
}

void require_profile(std::span<const double> p, const PolarGrid& g, const char* name) {
  if (static_cast<int>(p.size()) != g.ntheta)
    fail(ErrorKind::invalid_input, std::string(name) + " must have one sample per angular node");
}

}  // namespace

double Cutoff::operator()(double R) const { return derivative(R, 0); }

double Cutoff::derivative(double R, int order) const {
  if (R <= r1) return order == 0 ? 1.0 : 0.0;
  if (R >= r2) return 0.0;
  const double w = r2 - r1;
  return -smoothstep5((R - r1) / w, order) / std::pow(w, order) + (order == 0 ? 1.0 : 0.0);
}

const char* to_string(Interpolation interp) { return interp == Interpolation::cubic ? "cubic" : "bilinear"; }

FlowSolver::FlowSolver(GridPtr grid, Interpolation interp)
    : grid_(std::move(grid)), interp_(interp), op_(std::make_shared<SectorOperator>(grid_, OperatorKind::l_operator)) {}

void FlowSolver::compute_velocity(FlowState& state) const {
  const PolarGrid& g = *grid_;
  Field2D rhs = state.omega;
  for (int i = 0; i < g.nr; ++i)
    for (int j = 0; j < g.ntheta; ++j) rhs.at(i, j) *= 1.0 + g.eta(i, j);
  state.psi = op_->solve(rhs);
  state.v1 = d_z(state.psi);
  state.v2 = d_eta(state.psi);
  for (int i = 0; i < g.nr; ++i)
    for (int j = 0; j < g.ntheta; ++j) {
      const double r = 1.0 + g.eta(i, j);
      state.v1.at(i, j) /= r;
      state.v2.at(i, j) /= -r;
    }
}

double FlowSolver::logical_speed(const FlowState& state) const {
  const PolarGrid& g = *grid_;
  const LogicalVelocity lv = logical_velocity(state);
  double m = 0.0;
  for (std::size_t k = 0; k < g.size(); ++k)
    m = std::fmax(m, std::fabs(lv.as.values[k]) / g.ds() + std::fabs(lv.at.values[k]) / g.dtheta());
  return m;
}

double FlowSolver::admissible_dt(const FlowState& state, double cfl) const {
  const double speed = logical_speed(state);
  return speed > 0.0 ? cfl / speed : std::numeric_limits<double>::infinity();
}

FlowState FlowSolver::step(const FlowState& state, double dt) const {
  if (!(dt > 0.0)) throw InvalidParameter("dt", "must be positive");
  const double dt_max = admissible_dt(state, 1.0);
  if (dt > dt_max * (1.0 + 1e-12)) throw StepRejected(dt_max, "Courant number above 1");
  const PolarGrid& g = *grid_;
  const Sampler sampler(g);
  const LogicalVelocity lv = logical_velocity(state);
  auto transported = [&](const Field2D& q, const Sampler::Foot& f, double parity) {
    return interp_ == Interpolation::cubic ? sampler.value_cubic(q, f, parity) : sampler.value(q, f, parity);
  };

  Field2D q1 = state.omega, q2 = state.u;
  for (int i = 0; i < g.nr; ++i)
    for (int j = 0; j < g.ntheta; ++j) {
      const double r = 1.0 + g.eta(i, j);
      q1.at(i, j) /= r;
      q2.at(i, j) *= r;
    }
  const Field2D src_old = stretching(state.u);

  std::vector<Sampler::Foot> feet(g.size());
  for (int i = 0; i < g.nr; ++i)
    for (int j = 0; j < g.ntheta; ++j) {
      const double s = sampler.s_of(i), th = sampler.theta_of(j);
      const Sampler::Foot half =
          sampler.locate(s - 0.5 * dt * lv.as.at(i, j), th - 0.5 * dt * lv.at.at(i, j));
      const double as = sampler.value(lv.as, half, 1.0);
      const double at = sampler.value(lv.at, half, -1.0);
      feet[g.index(i, j)] = sampler.locate(s - dt * as, th - dt * at);
    }

  FlowState next;
  next.grid = grid_;
  next.t = state.t + dt;
  next.u = Field2D::zeros(grid_);
  next.omega = Field2D::zeros(grid_);
  for (int i = 0; i < g.nr; ++i)
    for (int j = 0; j < g.ntheta; ++j)
      next.u.at(i, j) = transported(q2, feet[g.index(i, j)], 1.0) / (1.0 + g.eta(i, j));
  const Field2D src_new = stretching(next.u);
  for (int i = 0; i < g.nr; ++i)
    for (int j = 1; j < g.ntheta; ++j) {
      const Sampler::Foot& f = feet[g.index(i, j)];
      const double q = transported(q1, f, -1.0) + 0.5 * dt * (transported(src_old, f, -1.0) + src_new.at(i, j));
      next.omega.at(i, j) = q * (1.0 + g.eta(i, j));
    }
  compute_velocity(next);
  return next;
}

FlowState init_blowup_data(const FlowSolver& solver, std::span<const double> g0, std::span<const double> P0,
                           const Cutoff& cutoff) {
  const PolarGrid& g = *solver.grid();
  if (g.r_max() < kMinOuterRadius) throw ConfigError("r_max", "blow-up data need r_max >= 4");
  require_profile(g0, g, "g0");
  require_profile(P0, g, "P0");
  FlowState st;
  st.grid = solver.grid();
  st.omega = Field2D::zeros(st.grid);
  st.u = Field2D::zeros(st.grid);
  for (int i = 0; i < g.nr; ++i) {
    const double phi = cutoff(g.radii[i]);
    for (int j = 0; j < g.ntheta; ++j) {
      st.omega.at(i, j) = g0[j] * phi;
      st.u.at(i, j) = (1.0 / (1.0 + g.eta(i, j)) + g.radii[i] * P0[j]) * phi;
    }
  }
  solver.compute_velocity(st);
  return st;
}

FlowState init_noswirl_data(const FlowSolver& solver, std::span<const double> g0, const Cutoff& cutoff) {
  const PolarGrid& g = *solver.grid();
  if (g.r_max() < kMinOuterRadius) throw ConfigError("r_max", "cut-off data need r_max >= 4");
  require_profile(g0, g, "g0");
  FlowState st;
  st.grid = solver.grid();
  st.omega = Field2D::zeros(st.grid);
  st.u = Field2D::zeros(st.grid);
  for (int i = 0; i < g.nr; ++i) {
    const double phi = cutoff(g.radii[i]);
    for (int j = 0; j < g.ntheta; ++j) st.omega.at(i, j) = g0[j] * phi;
  }
  solver.compute_velocity(st);
  return st;
}

FlowMetrics flow_metrics(const FlowState& st) {
  const PolarGrid& g = *st.grid;
  const Field2D ue = d_eta(st.u);
  const Field2D uz = d_z(st.u);
  FlowMetrics m;
  m.q2_min = std::numeric_limits<double>::infinity();
  m.q2_max = -std::numeric_limits<double>::infinity();
  const double cl = std::cos(g.spec.l), sl = std::sin(g.spec.l);
  for (int i = 0; i < g.nr; ++i)
    for (int j = 0; j < g.ntheta; ++j) {
      const double r = 1.0 + g.eta(i, j);
      const double w = g.area_weight(i, j);
      const double om = st.omega.at(i, j), u = st.u.at(i, j);
      const double v1 = st.v1.at(i, j), v2 = st.v2.at(i, j);
      m.energy += 2.0 * w * (v1 * v1 + v2 * v2 + u * u) * r;
      m.l1_omega += 2.0 * w * std::fabs(om);
      m.sup_omega = std::fmax(m.sup_omega, std::fabs(om));
      m.sup_omega_over_r = std::fmax(m.sup_omega_over_r, std::fabs(om) / r);
      m.sup_grad_u = std::fmax(m.sup_grad_u, std::hypot(ue.at(i, j), uz.at(i, j)));
      m.sup_velocity = std::fmax(m.sup_velocity, std::hypot(v1, v2));
      m.q2_min = std::fmin(m.q2_min, r * u);
      m.q2_max = std::fmax(m.q2_max, r * u);
    }
  for (int i = 0; i < g.nr; ++i) {
    m.max_normal_velocity = std::fmax(m.max_normal_velocity, std::fabs(st.v2.at(i, 0)));
    const int j = g.ntheta - 1;
    m.max_normal_velocity = std::fmax(m.max_normal_velocity, std::fabs(-sl * st.v1.at(i, j) + cl * st.v2.at(i, j)));
  }
  m.corner_u = st.u.at(0, 0);
  return m;
}

ShadowReport shadow_diagnostics(const FlowState& state, const onedim::AngularState& oned, double bkm_accumulator,
                                const ShadowOptions& options) {
  const PolarGrid& g = *state.grid;
  if (std::fabs(state.t - oned.t) > options.clock_tolerance)
    fail(ErrorKind::synchronization, "2D and 1D clocks differ");
  const int n = oned.grid.n;
  if ((n - 1) % (g.ntheta - 1) != 0 || std::fabs(oned.grid.l - g.spec.l) > 1e-12)
    fail(ErrorKind::invalid_input, "1D grid does not contain the angular nodes of the 2D grid");
  const int stride = (n - 1) / (g.ntheta - 1);

  ShadowReport rep;
  rep.t = state.t;
  rep.bkm_accumulator = bkm_accumulator;
  const FlowMetrics m = flow_metrics(state);
  rep.energy = m.energy;
  rep.sup_omega_over_r = m.sup_omega_over_r;
  rep.l1_omega = m.l1_omega;

  const double s0 = std::log(g.r_min());
  std::vector<double> x, y;
  bool fittable = true;
  for (std::size_t p = 0; p < options.probe_fractions.size(); ++p) {
    const double R = options.probe_fractions[p] * options.cutoff.r1;
    if (p > 0 && !(R < rep.probe_radii.back())) fail(ErrorKind::invalid_input, "probe radii must decrease");
    if (!(R > g.r_min() && R < g.r_max())) fail(ErrorKind::invalid_input, "probe radius outside the grid");
    const double xs = (std::log(R) - s0) / g.ds();
    const int i = std::clamp(static_cast<int>(std::floor(xs)), 0, g.nr - 2);
    const double fs = xs - i;
    const double phi = options.cutoff(R);
    double err = 0.0;
    for (int j = 0; j < g.ntheta; ++j) {
      const double om = (1.0 - fs) * state.omega.at(i, j) + fs * state.omega.at(i + 1, j);
      err = std::fmax(err, std::fabs(om - options.orientation * oned.g[j * stride] * phi));
    }
    rep.probe_radii.push_back(R);
    rep.sup_err_per_radius.push_back(err);
    if (err > 0.0) {
      x.push_back(std::log(R));
      y.push_back(std::log(err));
    } else {
      fittable = false;
    }
  }
  if (fittable && x.size() >= 2) {
    double mx = 0.0, my = 0.0;
    for (std::size_t k = 0; k < x.size(); ++k) {
      mx += x[k];
      my += y[k];
    }
    mx /= static_cast<double>(x.size());
    my /= static_cast<double>(x.size());
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t k = 0; k < x.size(); ++k) {
      sxx += (x[k] - mx) * (x[k] - mx);
      sxy += (x[k] - mx) * (y[k] - my);
    }
    rep.fitted_alpha = sxy / sxx;
  }
  return rep;
}

std::vector<std::string> diagnostics_columns(std::size_t probes) {
  std::vector<std::string> columns = {"step", "t", "dt", "energy", "sup_omega", "sup_grad_u", "bkm_accumulator",
                                      "sup_omega_over_r", "l1_omega", "q2_min", "q2_max", "corner_u",
                                      "max_normal_velocity", "sup_velocity", "sup_g_1d", "fitted_alpha"};
  for (std::size_t p = 0; p < probes; ++p) columns.push_back("sup_err_" + std::to_string(p));
  return columns;
}

std::vector<double> diagnostics_row(const DiagnosticsRecord& r, std::size_t probes) {
  const FlowMetrics& m = r.metrics;
  std::vector<double> row = {static_cast<double>(r.step),
                             r.t,
                             r.dt,
                             m.energy,
                             m.sup_omega,
                             m.sup_grad_u,
                             r.bkm_accumulator,
                             m.sup_omega_over_r,
                             m.l1_omega,
                             m.q2_min,
                             m.q2_max,
                             m.corner_u,
                             m.max_normal_velocity,
                             m.sup_velocity,
                             r.has_shadow ? r.sup_g_1d : kNaN,
                             r.has_shadow ? r.shadow.fitted_alpha : kNaN};
  for (std::size_t p = 0; p < probes; ++p)
    row.push_back(r.has_shadow && p < r.shadow.sup_err_per_radius.size() ? r.shadow.sup_err_per_radius[p] : kNaN);
  return row;
}

const char* to_string(AxisymStop stop) {
  switch (stop) {
    case AxisymStop::reached_t_end: return "reached_t_end";
    case AxisymStop::blowup: return "blowup";
    case AxisymStop::dt_exhausted: return "dt_exhausted";
  }
  return "unknown";
}

AxisymResult run_axisym(const FlowSolver& solver, FlowState initial, std::optional<onedim::AngularState> partner,
                        const AxisymOptions& options) {
  if (!(options.dt_ceiling > 0.0)) throw InvalidParameter("dt_ceiling", "must be positive");
  if (!(options.cfl > 0.0 && options.cfl <= 1.0)) throw InvalidParameter("cfl", "must lie in (0, 1]");
  if (options.record_every < 1) throw InvalidParameter("record_every", "must be at least 1");
  std::vector<double> reports = options.report_times;
  std::sort(reports.begin(), reports.end());

  AxisymResult result;
  FlowState st = std::move(initial);
  const double omega0 = st.omega.max_abs();
  double bkm = 0.0;
  bool partner_alive = partner.has_value();

  auto integrand = [](const FlowMetrics& m) { return m.sup_omega + m.sup_grad_u; };
  auto make_record = [&](double dt, const FlowMetrics& m) {
    DiagnosticsRecord rec;
    rec.step = result.steps;
    rec.t = st.t;
    rec.dt = dt;
    rec.metrics = m;
    rec.bkm_accumulator = bkm;
    if (partner_alive) {
      rec.has_shadow = true;
      ShadowOptions so = options.shadow;
      rec.shadow = shadow_diagnostics(st, *partner, bkm, so);
      double sg = 0.0;
      for (double v : partner->g) sg = std::fmax(sg, std::fabs(v));
      rec.sup_g_1d = sg;
    }
    result.records.push_back(std::move(rec));
  };
  auto snapshot = [&] {
    if (options.snapshot_every <= 0 || result.steps % options.snapshot_every != 0) return;
    char stem[32];
    std::snprintf(stem, sizeof stem, "%06d", result.steps);
    write_field(st.omega, options.snapshot_dir / (std::string("omega_") + stem));
    write_field(st.u, options.snapshot_dir / (std::string("u_") + stem));
  };

  FlowMetrics metrics = flow_metrics(st);
  make_record(0.0, metrics);
  snapshot();
  std::size_t next_report = 0;
  while (next_report < reports.size() && reports[next_report] <= st.t) ++next_report;

  while (st.t < options.t_end) {
    const double stop_at = next_report < reports.size() ? std::min(options.t_end, reports[next_report]) : options.t_end;
    const double cfl_dt = solver.admissible_dt(st, options.cfl);
    if (cfl_dt < options.dt_floor) {
      result.reason = AxisymStop::dt_exhausted;
      break;
    }
    double dt = std::min(options.dt_ceiling, cfl_dt);
    bool lands = false;
    if (st.t + dt >= stop_at - 1e-12 * std::max(1.0, stop_at)) {
      dt = stop_at - st.t;
      lands = true;
    }
    const double before = integrand(metrics);
    st = solver.step(st, dt);
    if (lands) st.t = stop_at;
    ++result.steps;
    metrics = flow_metrics(st);
    bkm += 0.5 * dt * (before + integrand(metrics));
    if (partner_alive) partner_alive = onedim::advance_to(*partner, st.t, options.oned);

    const bool at_report = lands && next_report < reports.size() && stop_at == reports[next_report];
    if (at_report) ++next_report;
    const bool finished = st.t >= options.t_end;
    const bool blown = metrics.sup_omega > options.blowup_factor * (1.0 + omega0);
    if (at_report || finished || blown || result.steps % options.record_every == 0) make_record(dt, metrics);
    snapshot();
    if (blown) {
      result.reason = AxisymStop::blowup;
      break;
    }
  }
  result.final_state = std::move(st);
  result.final_partner = std::move(partner);
  return result;
}

}  // namespace coneflow::axisym
