#include <benchmark/benchmark.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "coneflow/axisym.hpp"
#include "coneflow/elliptic.hpp"
#include "coneflow/green.hpp"
#include "coneflow/onedim.hpp"

using namespace coneflow;

namespace {

// Smooth source supported well inside R < r_max / 2.
Field2D bump(const GridPtr& g) {
  const double l = g->spec.l;
  return Field2D::sample(g, [l](double R, double t) {
    const double q = R * R / (0.4 * 0.4);
    return q >= 1.0 ? 0.0 : std::pow(1.0 - q, 4) * std::sin(std::numbers::pi * t / l);
  });
}

void BM_Step1D(benchmark::State& st) {
  onedim::AngularState s = onedim::paper_blowup_state(onedim::make_grid(1.0, static_cast<int>(st.range(0))));
  onedim::advance_to(s, 1.0, {});
  const double dt = 0.5 * onedim::admissible_dt(s);
  for (auto _ : st) benchmark::DoNotOptimize(onedim::step_1d(s, dt));
  st.SetComplexityN(st.range(0));
}
BENCHMARK(BM_Step1D)->RangeMultiplier(2)->Range(128, 2048)->Complexity();

void BM_LSolveFd(benchmark::State& st) {
  const int n = static_cast<int>(st.range(0));
  const Field2D f = bump(make_polar_grid(SectorSpec::from_epsilon(1.0, 1.0), n, n / 2 + 1, 1e-3));
  for (auto _ : st) benchmark::DoNotOptimize(l_solve(f, LMethod::fd));
}
BENCHMARK(BM_LSolveFd)->Arg(32)->Arg(64)->Arg(128)->Unit(benchmark::kMillisecond);

void BM_PoissonQuadrature(benchmark::State& st) {
  const int n = static_cast<int>(st.range(0));
  const Field2D f = bump(make_polar_grid(SectorSpec::from_epsilon(1.0, 1.0), n, n / 2 + 1, 1e-3));
  for (auto _ : st) benchmark::DoNotOptimize(poisson_quadrature(f));
}
BENCHMARK(BM_PoissonQuadrature)->Arg(16)->Arg(32)->Unit(benchmark::kMillisecond);

void BM_AxisymStep(benchmark::State& st) {
  const int ntheta = static_cast<int>(st.range(1));
  const GridPtr g = make_polar_grid(SectorSpec::from_epsilon(1.0, 4.0), static_cast<int>(st.range(0)), ntheta, 4e-4);
  const axisym::FlowSolver solver(g);
  std::vector<double> g0(ntheta);
  for (int j = 0; j < ntheta; ++j) g0[j] = std::sin(std::numbers::pi * g->thetas[j] / g->spec.l);
  const axisym::FlowState s = axisym::init_noswirl_data(solver, g0);
  const double dt = 0.5 * solver.admissible_dt(s);
  for (auto _ : st) benchmark::DoNotOptimize(solver.step(s, dt));
}
BENCHMARK(BM_AxisymStep)->Args({64, 33})->Args({128, 65})->Args({256, 128})->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
