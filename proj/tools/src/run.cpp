#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <sstream>
#include <thread>

#include "coneflow/axisym.hpp"
#include "coneflow/cli.hpp"
#include "coneflow/elliptic.hpp"
#include "coneflow/error.hpp"
#include "coneflow/manufactured.hpp"
#include "coneflow/onedim.hpp"

namespace coneflow::cli {

namespace {

constexpr const char* kVersion = "0.1.0";

struct Profiles {
  std::vector<double> g, P;
};

Profiles initial_profiles(const RunConfig& c, const std::vector<double>& theta, double l) {
  const std::size_t n = theta.size();
  Profiles p{std::vector<double>(n, 0.0), std::vector<double>(n, 0.0)};
  if (c.preset == "paper-blowup") {
    for (std::size_t j = 0; j < n; ++j) p.P[j] = theta[j] * theta[j];
  } else if (c.preset == "sine") {
    for (std::size_t j = 0; j < n; ++j) p.g[j] = c.amplitude * std::sin(std::numbers::pi * theta[j] / l);
  } else {
    const CsvTable t = read_csv(c.initial_data);
    const std::size_t ct = t.column("theta"), cg = t.column("g"), cp = t.column("P");
    if (t.rows.size() != n)
      fail(ErrorKind::invalid_input, "initial_data has " + std::to_string(t.rows.size()) + " rows, the grid has " +
                                         std::to_string(n) + " angular nodes");
    for (std::size_t j = 0; j < n; ++j) {
      if (std::fabs(t.rows[j][ct] - theta[j]) > 1e-9 * l)
        fail(ErrorKind::invalid_input, "initial_data row " + std::to_string(j + 1) + " is not on the grid node");
      p.g[j] = t.rows[j][cg];
      p.P[j] = t.rows[j][cp];
    }
  }
  return p;
}

onedim::AdvectionMode advection_mode(const std::string& name) {
  if (name == "central") return onedim::AdvectionMode::central;
  if (name == "hybrid") return onedim::AdvectionMode::hybrid;
  return onedim::AdvectionMode::upwind;
}

onedim::RunOptions1D oned_options(const RunConfig& c, double cfl) {
  onedim::RunOptions1D o;
  o.dt_ceiling = c.dt_ceiling;
  o.record_every = c.record_every;
  o.cfl = cfl;
  o.blowup_factor = c.blowup_factor;
  o.dt_floor = c.dt_floor;
  o.mode = advection_mode(c.advection);
  return o;
}

void write_state_csv(const onedim::AngularState& s, const std::filesystem::path& path) {
  CsvWriter w(path, {"theta", "g", "P", "G"});
  for (int j = 0; j < s.grid.n; ++j) {
    const double row[] = {s.grid.theta[j], s.g[j], s.P[j], s.G[j]};
    w.row(row);
  }
}

void write_series(const std::vector<onedim::BlowupDiagnostics1D>& series, const std::filesystem::path& path) {
  CsvWriter w(path, onedim::diagnostics_1d_columns());
  for (const auto& d : series) w.row(onedim::diagnostics_1d_row(d));
}

std::optional<onedim::BlowupEstimate> try_estimate(const std::vector<onedim::BlowupDiagnostics1D>& series) {
  try {
    return onedim::estimate_blowup_time(series);
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::no_blowup) throw;
    return std::nullopt;
  }
}

void add_estimate(KeyValues& kv, const std::optional<onedim::BlowupEstimate>& est, const std::string& prefix) {
  kv.emplace_back(prefix + "t_star", est ? format_double(est->t_star) : "none");
  kv.emplace_back(prefix + "t_star_confidence", est ? format_double(est->confidence) : "none");
}

int code_for(onedim::StopReason r) {
  switch (r) {
    case onedim::StopReason::blowup: return kExitBlowup;
    case onedim::StopReason::dt_exhausted: return kExitCflExhausted;
    default: return kExitOk;
  }
}

int run_onedim(const RunConfig& c, KeyValues& summary, std::ostream& log) {
  const auto system = c.scenario == Scenario::axis_onedim ? onedim::AngularSystem::axis : onedim::AngularSystem::boussinesq;
  const onedim::AngularGrid grid = onedim::make_grid(c.epsilon, c.n);
  Profiles p = initial_profiles(c, grid.theta, grid.l);
  onedim::RunOptions1D o = oned_options(c, c.cfl);
  o.t_end = *c.t_end;
  const onedim::RunResult1D r = onedim::run_1d(onedim::make_state(grid, std::move(p.g), std::move(p.P), system), o);
  write_series(r.series, c.out / "diagnostics.csv");
  write_state_csv(r.final_state, c.out / "final_state.csv");
  summary.emplace_back("reason", onedim::to_string(r.reason));
  summary.emplace_back("steps", std::to_string(r.steps));
  summary.emplace_back("t_final", format_double(r.final_state.t));
  summary.emplace_back("sup_abs_g_final", format_double(r.series.back().sup_abs_g));
  if (r.reason == onedim::StopReason::blowup) add_estimate(summary, try_estimate(r.series), "");
  log << to_string(c.scenario) << ": " << onedim::to_string(r.reason) << " at t = " << r.final_state.t << " after "
      << r.steps << " steps\n";
  return code_for(r.reason);
}

int run_elliptic(const RunConfig& c, KeyValues& summary, std::ostream& log) {
  const std::vector<ConvergenceRow> rows = convergence_study(c.epsilon, c.nr, c.ntheta, c.levels);
  {
    CsvWriter w(c.out / "convergence.csv", {"nr", "ntheta", "h", "err_quadrature", "err_fd", "err_iterate",
                                            "fd_iterate_gap", "iterations", "fell_back"});
    for (const auto& r : rows) {
      const double v[] = {double(r.nr), double(r.ntheta), r.h, r.err_quadrature, r.err_fd, r.err_iterate,
                          r.fd_iterate_gap, double(r.iterations), r.fell_back ? 1.0 : 0.0};
      w.row(v);
    }
  }
  const double oq = observed_orders(rows, &ConvergenceRow::err_quadrature).back();
  const double of = observed_orders(rows, &ConvergenceRow::err_fd).back();
  const double oi = observed_orders(rows, &ConvergenceRow::err_iterate).back();
  const ConvergenceRow& fine = rows.back();
  const double gap_ratio = fine.fd_iterate_gap / std::max(fine.err_fd, fine.err_iterate);

  const SectorSpec spec = SectorSpec::from_epsilon(c.epsilon, 1.0);
  const GridPtr graded = make_graded_grid(spec, 1.05, 33, 1e-4);
  auto chi = [](double R) {
    const double q = R * R / (0.45 * 0.45);
    return q >= 1.0 ? 0.0 : std::pow(1.0 - q, 5);
  };
  const Field2D f = Field2D::sample(graded, [&](double R, double t) {
    return std::pow(R, c.alpha) * std::sin(std::numbers::pi * t / spec.l) * chi(R);
  });
  const VanishingFit fit = vanishing_exponent(f, c.alpha);

  summary.emplace_back("order_quadrature", format_double(oq));
  summary.emplace_back("order_fd", format_double(of));
  summary.emplace_back("order_iterate", format_double(oi));
  summary.emplace_back("fd_iterate_gap_ratio", format_double(gap_ratio));
  summary.emplace_back("vanishing_slope", format_double(fit.slope));
  summary.emplace_back("vanishing_r2", format_double(fit.r2));
  const bool pass = std::min({oq, of, oi}) >= 1.8 && gap_ratio <= 2.0;
  summary.emplace_back("verdict", pass ? "pass" : "fail");
  log << "elliptic-validate: orders " << oq << ", " << of << ", " << oi << " (" << (pass ? "pass" : "fail") << ")\n";
  return pass ? kExitOk : kExitFailure;
}

GridPtr sector_grid(const RunConfig& c) {
  const SectorSpec spec = SectorSpec::from_epsilon(c.epsilon, c.r_max);
  return c.grading > 0.0 ? make_graded_grid(spec, c.grading, c.ntheta, c.r_min)
                         : make_polar_grid(spec, c.nr, c.ntheta, c.r_min);
}

void write_records(const std::vector<axisym::DiagnosticsRecord>& records, std::size_t probes,
                   const std::filesystem::path& path) {
  CsvWriter w(path, axisym::diagnostics_columns(probes));
  for (const auto& r : records) w.row(axisym::diagnostics_row(r, probes));
}

void write_final_fields(const axisym::FlowState& s, const std::filesystem::path& dir) {
  write_field(s.omega, dir / "final_omega");
  write_field(s.u, dir / "final_u");
  write_field(s.psi, dir / "final_psi");
}

int code_for(axisym::AxisymStop r) {
  switch (r) {
    case axisym::AxisymStop::blowup: return kExitBlowup;
    case axisym::AxisymStop::dt_exhausted: return kExitCflExhausted;
    default: return kExitOk;
  }
}

axisym::AxisymOptions axisym_options(const RunConfig& c) {
  axisym::AxisymOptions o;
  o.dt_ceiling = c.dt_ceiling;
  o.cfl = c.cfl;
  o.dt_floor = c.dt_floor;
  o.blowup_factor = c.blowup_factor;
  o.record_every = c.record_every;
  o.snapshot_every = c.snapshot_every;
  o.snapshot_dir = c.out / "snapshots";
  if (c.snapshot_every > 0) std::filesystem::create_directories(o.snapshot_dir);
  o.oned = oned_options(c, onedim::RunOptions1D{}.cfl);
  return o;
}

axisym::Interpolation interpolation(const RunConfig& c) {
  return c.interpolation == "bilinear" ? axisym::Interpolation::bilinear : axisym::Interpolation::cubic;
}

int run_noswirl(const RunConfig& c, const GridPtr& grid, KeyValues& summary, std::ostream& log) {
  const axisym::FlowSolver solver(grid, interpolation(c));
  const Profiles p = initial_profiles(c, grid->thetas, grid->spec.l);
  axisym::AxisymOptions o = axisym_options(c);
  o.t_end = *c.t_end;
  const axisym::AxisymResult r = axisym::run_axisym(solver, axisym::init_noswirl_data(solver, p.g), std::nullopt, o);
  write_records(r.records, 0, c.out / "diagnostics.csv");
  write_final_fields(r.final_state, c.out);
  const axisym::FlowMetrics& a = r.records.front().metrics;
  const axisym::FlowMetrics& b = r.records.back().metrics;
  auto drift = [](double x, double x0) { return x0 == 0.0 ? 0.0 : x / x0 - 1.0; };
  summary.emplace_back("reason", axisym::to_string(r.reason));
  summary.emplace_back("steps", std::to_string(r.steps));
  summary.emplace_back("t_final", format_double(r.final_state.t));
  summary.emplace_back("drift_sup_omega_over_r", format_double(drift(b.sup_omega_over_r, a.sup_omega_over_r)));
  summary.emplace_back("drift_l1_omega", format_double(drift(b.l1_omega, a.l1_omega)));
  summary.emplace_back("drift_energy", format_double(drift(b.energy, a.energy)));
  log << "axisym-noswirl: " << axisym::to_string(r.reason) << " at t = " << r.final_state.t << " after " << r.steps
      << " steps\n";
  return code_for(r.reason);
}

int run_blowup2d(const RunConfig& c, const GridPtr& grid, KeyValues& summary, std::ostream& log) {
  const axisym::FlowSolver solver(grid, interpolation(c));
  const int pn = c.partner_n > 0 ? c.partner_n : grid->ntheta;
  if ((pn - 1) % (grid->ntheta - 1) != 0)
    throw InvalidParameter("partner_n", "partner_n - 1 must be a multiple of ntheta - 1");
  const int stride = (pn - 1) / (grid->ntheta - 1);
  const onedim::AngularGrid pgrid = onedim::make_grid(c.epsilon, pn);
  Profiles p = initial_profiles(c, pgrid.theta, pgrid.l);
  std::vector<double> g0(grid->ntheta), P0(grid->ntheta);
  for (int j = 0; j < grid->ntheta; ++j) {
    g0[j] = c.orientation * p.g[j * stride];
    P0[j] = c.orientation * p.P[j * stride];
  }
  const onedim::AngularState partner = onedim::make_state(pgrid, std::move(p.g), std::move(p.P));

  axisym::AxisymOptions o = axisym_options(c);
  onedim::RunOptions1D pre = o.oned;
  const onedim::RunResult1D clock = onedim::run_1d(partner, pre);
  const auto est = clock.reason == onedim::StopReason::blowup ? try_estimate(clock.series) : std::nullopt;
  add_estimate(summary, est, "partner_");
  if (c.t_end) {
    o.t_end = *c.t_end;
  } else {
    if (!est) throw ConfigError("t_end", "the 1D partner shows no blow-up; set t_end");
    o.t_end = c.t_end_fraction * est->t_star;
  }
  if (est)
    for (double frac : {0.25, 0.5, 0.75, 0.95})
      if (frac * est->t_star < o.t_end) o.report_times.push_back(frac * est->t_star);
  o.shadow.orientation = c.orientation;
  o.shadow.clock_tolerance = 1e-9 * std::max(1.0, o.t_end);

  const axisym::AxisymResult r = axisym::run_axisym(solver, axisym::init_blowup_data(solver, g0, P0), partner, o);
  const std::size_t probes = o.shadow.probe_fractions.size();
  write_records(r.records, probes, c.out / "diagnostics.csv");
  write_final_fields(r.final_state, c.out);
  if (r.final_partner) write_state_csv(*r.final_partner, c.out / "partner_final_state.csv");

  summary.emplace_back("reason", axisym::to_string(r.reason));
  summary.emplace_back("steps", std::to_string(r.steps));
  summary.emplace_back("t_end", format_double(o.t_end));
  summary.emplace_back("t_final", format_double(r.final_state.t));
  summary.emplace_back("bkm_final", format_double(r.records.back().bkm_accumulator));
  int code = code_for(r.reason);
  if (est && r.reason == axisym::AxisymStop::reached_t_end) {
    const double half = 0.5 * est->t_star;
    double bkm_half = std::numeric_limits<double>::quiet_NaN();
    for (const auto& rec : r.records)
      if (std::fabs(rec.t - half) <= 1e-12 * half) bkm_half = rec.bkm_accumulator;
    const double growth = r.records.back().bkm_accumulator / bkm_half;
    summary.emplace_back("bkm_growth_from_half_t_star", format_double(growth));
    if (r.final_state.t >= 0.95 * est->t_star * (1.0 - 1e-9) && growth >= 5.0) code = kExitBlowup;
  }
  log << "axisym-blowup: " << axisym::to_string(r.reason) << " at t = " << r.final_state.t << " after " << r.steps
      << " steps" << (code == kExitBlowup ? ", blow-up detected" : "") << '\n';
  return code;
}

KeyValues manifest(const RunConfig& c) {
  KeyValues kv = to_key_values(c);
  kv.emplace_back("version", kVersion);
  const SectorSpec spec = SectorSpec::from_epsilon(c.epsilon, c.r_max);
  kv.emplace_back("beta", format_double(spec.beta));
  kv.emplace_back("l", format_double(spec.l));
  if (c.scenario == Scenario::axisym_blowup || c.scenario == Scenario::axisym_noswirl) {
    const GridPtr g = sector_grid(c);
    kv.emplace_back("grid_nr", std::to_string(g->nr));
    kv.emplace_back("grid_ratio", format_double(g->grading()));
    kv.emplace_back("partner_n_used", std::to_string(c.partner_n > 0 ? c.partner_n : c.ntheta));
  }
  return kv;
}

void prepare_output(const std::filesystem::path& out) {
  std::error_code ec;
  std::filesystem::create_directories(out, ec);
  if (ec || !std::filesystem::is_directory(out))
    fail(ErrorKind::io, "cannot create output directory " + out.string());
  const auto probe = out / ".write_probe";
  {
    std::ofstream f(probe);
    if (!f || !(f << "ok")) fail(ErrorKind::io, "output directory " + out.string() + " is not writable");
  }
  std::filesystem::remove(probe, ec);
}

}  // namespace

int exit_code_for(const std::exception& e) {
  const auto* err = dynamic_cast<const Error*>(&e);
  if (!err) return kExitFailure;
  switch (err->kind()) {
    case ErrorKind::invalid_parameter:
    case ErrorKind::invalid_input:
    case ErrorKind::config:
    case ErrorKind::domain:
      return kExitConfig;
    case ErrorKind::io: return kExitIo;
    case ErrorKind::step_rejected: return kExitCflExhausted;
    case ErrorKind::solver_failure:
    case ErrorKind::resonance:
    case ErrorKind::truncation:
    case ErrorKind::support_escape:
    case ErrorKind::singularity:
      return kExitSolverFailure;
    default: return kExitFailure;
  }
}

int run(const RunConfig& config, std::ostream& log) {
  try {
    validate(config);
    prepare_output(config.out);
    write_key_values(config.out / "manifest.txt", manifest(config));
    KeyValues summary;
    int code = kExitFailure;
    switch (config.scenario) {
      case Scenario::onedim_blowup:
      case Scenario::axis_onedim: code = run_onedim(config, summary, log); break;
      case Scenario::elliptic_validate: code = run_elliptic(config, summary, log); break;
      case Scenario::axisym_noswirl: code = run_noswirl(config, sector_grid(config), summary, log); break;
      case Scenario::axisym_blowup: code = run_blowup2d(config, sector_grid(config), summary, log); break;
    }
    summary.emplace_back("exit_code", std::to_string(code));
    write_key_values(config.out / "summary.txt", summary);
    return code;
  } catch (const std::exception& e) {
    log << "error: " << e.what() << '\n';
    return exit_code_for(e);
  }
}

int run_sweep(const ConfigSources& base, const Sweep& sweep, unsigned workers, std::ostream& log) {
  RunConfig root;
  try {
    root = parse_config(base).config;
    prepare_output(root.out);
  } catch (const std::exception& e) {
    log << "error: " << e.what() << '\n';
    return exit_code_for(e);
  }
  const std::size_t count = sweep.values.size();
  std::vector<int> codes(count, kExitFailure);
  std::vector<std::string> logs(count);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t k = next++; k < count; k = next++) {
      std::ostringstream out;
      try {
        ConfigSources src = base;
        const std::string dir = sweep.key + "=" + sweep.values[k];
        src.flags.emplace_back(sweep.key, sweep.values[k]);
        src.flags.emplace_back("out", (root.out / dir).string());
        const ParsedConfig parsed = parse_config(src);
        for (const auto& w : parsed.warnings) out << "warning: " << w << '\n';
        codes[k] = run(parsed.config, out);
      } catch (const std::exception& e) {
        out << "error: " << e.what() << '\n';
        codes[k] = exit_code_for(e);
      }
      logs[k] = out.str();
    }
  };
  std::vector<std::thread> pool;
  const unsigned n = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(count)));
  for (unsigned t = 0; t < n; ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();

  std::ofstream table(root.out / "sweep.csv", std::ios::binary);
  table << "index," << sweep.key << ",exit_code\n";
  int worst = kExitOk;
  for (std::size_t k = 0; k < count; ++k) {
    log << "[" << sweep.key << "=" << sweep.values[k] << "] " << logs[k];
    table << k << ',' << sweep.values[k] << ',' << codes[k] << '\n';
    if (codes[k] != kExitOk && codes[k] != kExitBlowup) worst = std::max(worst, codes[k]);
  }
  if (!table) {
    log << "error: cannot write sweep.csv\n";
    return kExitIo;
  }
  return worst;
}

}  // namespace coneflow::cli
