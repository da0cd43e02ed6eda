#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <numbers>
#include <random>

#include "coneflow/derivatives.hpp"
#include "coneflow/elliptic.hpp"
#include "coneflow/green.hpp"
#include "coneflow/manufactured.hpp"
#include "coneflow/textio.hpp"
#include "support.hpp"

using namespace coneflow;
using coneflow::testing::thrown_kind;

namespace {

constexpr double kPi = std::numbers::pi;

Point polar(double R, double theta) { return std::polar(R, theta); }

struct PairSampler {
  std::mt19937_64 rng;
  double l;
  double r_max;

  PairSampler(unsigned seed, double l_, double r_max_ = 2.0) : rng(seed), l(l_), r_max(r_max_) {}

  Point interior() {
    std::uniform_real_distribution<double> R(0.05, r_max * 0.95), t(0.02 * l, 0.98 * l);
    return polar(R(rng), t(rng));
  }
};

double bump(double R) {
  const double q = R * R / (0.45 * 0.45);
  return q >= 1.0 ? 0.0 : std::pow(1.0 - q, 5);
}

}  // namespace

TEST(BetaFromEps, ReferenceValues) {
  EXPECT_NEAR(beta_from_eps(1.0), 0.25, 1e-15);
  EXPECT_NEAR(beta_from_eps(std::sqrt(3.0)), 1.0 / 6.0, 1e-15);
  EXPECT_NEAR(beta_from_eps(0.25), 0.4220208696226307, 1e-12);
  for (double eps : {0.1, 0.25, 1.0, 3.0, 10.0})
    EXPECT_LT(std::fabs(std::tan(beta_from_eps(eps) * kPi) * eps - 1.0), 1e-12);
}

TEST(BetaFromEps, RejectsNonpositive) {
  EXPECT_EQ(thrown_kind([] { (void)beta_from_eps(0.0); }), ErrorKind::invalid_parameter);
  EXPECT_EQ(thrown_kind([] { (void)beta_from_eps(-2.0); }), ErrorKind::invalid_parameter);
}

TEST(PolarGrid, GeometricRadii) {
  const GridPtr g = make_polar_grid(SectorSpec::from_epsilon(1.0, 4.0), 40, 9, 4e-4);
  EXPECT_DOUBLE_EQ(g->r_min(), 4e-4);
  EXPECT_DOUBLE_EQ(g->r_max(), 4.0);
  for (int i = 1; i < g->nr; ++i) EXPECT_NEAR(g->radii[i] / g->radii[i - 1], g->grading(), 1e-12);
  EXPECT_DOUBLE_EQ(g->thetas.back(), kPi / 4);
  const GridPtr graded = make_graded_grid(SectorSpec::from_epsilon(1.0, 1.0), 1.05, 9, 1e-4);
  EXPECT_NEAR(graded->grading(), 1.05, 1e-3);
  EXPECT_EQ(thrown_kind([] { (void)make_polar_grid(SectorSpec::from_epsilon(1.0, 1.0), 9, 9, 2.0); }),
            ErrorKind::invalid_parameter);
}

TEST(Green, VanishesOnBothRays) {
  const double beta = 0.25, l = beta * kPi;
  PairSampler s(1, l);
  for (int k = 0; k < 200; ++k) {
    const Point y = s.interior();
    std::uniform_real_distribution<double> R(0.01, 3.0);
    for (double t : {0.0, l}) {
      const Point x = polar(R(s.rng), t);
      EXPECT_LE(std::fabs(green(x, y, beta)), 1e-10 * (1.0 + std::fabs(std::log(std::abs(x - y)))));
    }
  }
}

TEST(Green, SymmetricAndNonpositive) {
  for (double eps : {1.0, std::sqrt(3.0), 0.25}) {
    const double beta = beta_from_eps(eps);
    PairSampler s(2, beta * kPi);
    for (int k = 0; k < 1000; ++k) {
      const Point x = s.interior(), y = s.interior();
      const double gxy = green(x, y, beta);
      EXPECT_LE(std::fabs(gxy - green(y, x, beta)), 1e-12);
      EXPECT_LE(gxy, 0.0);
    }
  }
}

TEST(Green, HalfPlaneImages) {
  PairSampler s(3, kPi / 2);
  for (int k = 0; k < 200; ++k) {
    const Point x = s.interior(), y = s.interior();
    const Point X = x * x, Y = y * y;
    const double images = std::log(std::abs(X - Y) / std::abs(std::conj(X) - Y)) / (2 * kPi);
    EXPECT_NEAR(green(x, y, 0.5), images, 1e-12 * (1.0 + std::fabs(images)));
  }
}

TEST(Green, ErrorKinds) {
  const Point x = polar(1.0, 0.3);
  EXPECT_EQ(thrown_kind([&] { (void)green(x, x, 0.25); }), ErrorKind::singularity);
  EXPECT_EQ(thrown_kind([&] { (void)green(polar(1.0, 1.2), x, 0.25); }), ErrorKind::domain);
  EXPECT_EQ(thrown_kind([&] { (void)kernel_K(x, x, 0.25); }), ErrorKind::singularity);
  EXPECT_EQ(thrown_kind([&] { (void)green(polar(1.0, 0.1), x, 0.7); }), ErrorKind::invalid_parameter);
}

TEST(GreenTruncated, VanishesOnOuterArcAndIsSymmetric) {
  const double beta = 0.25, l = beta * kPi, r_max = 2.0;
  PairSampler s(4, l, r_max);
  for (int k = 0; k < 200; ++k) {
    const Point x = s.interior(), y = s.interior();
    EXPECT_NEAR(green_truncated(x, y, beta, r_max), green_truncated(y, x, beta, r_max), 1e-12);
    EXPECT_LE(green_truncated(x, y, beta, r_max), 0.0);
    std::uniform_real_distribution<double> t(0.0, l);
    EXPECT_NEAR(green_truncated(polar(r_max, t(s.rng)), y, beta, r_max), 0.0, 1e-12);
    EXPECT_GE(green_truncated(x, y, beta, r_max), green(x, y, beta) - 1e-14);
  }
}

TEST(Kernel, VanishesForSourceOnSymmetryRay) {
  PairSampler s(5, kPi / 4);
  for (int k = 0; k < 100; ++k) {
    const Point x = s.interior();
    EXPECT_EQ(std::abs(kernel_K(x, Point(0.3 + 0.01 * k, 0.0), 0.25)), 0.0);
  }
}

TEST(Kernel, IsTheGradientAtSecondOrder) {
  const double beta = 0.25;
  PairSampler s(6, beta * kPi);
  for (int k = 0; k < 20; ++k) {
    const Point x = s.interior(), y = s.interior();
    if (std::abs(x - y) < 0.2) continue;
    auto fd = [&](double h) {
      const double ge = (green(x + Point(h, 0), y, beta) - green(x - Point(h, 0), y, beta)) / (2 * h);
      const double gz = (green(x + Point(0, h), y, beta) - green(x - Point(0, h), y, beta)) / (2 * h);
      return Point(ge, gz);
    };
    const Point exact = green_gradient(x, y, beta);
    EXPECT_NEAR(std::abs(exact - 2.0 * std::conj(kernel_K(x, y, beta))), 0.0, 1e-13 * (1 + std::abs(exact)));
    const double h = 1e-3 * std::min(std::abs(x - y), x.imag());
    const double e1 = std::abs(fd(h) - exact), e2 = std::abs(fd(h / 2) - exact);
    if (e2 < 1e-9 * std::abs(exact)) continue;
    EXPECT_NEAR(coneflow::testing::order(e1, e2), 2.0, 0.3);
  }
}

TEST(Kernel, BoundedByInverseDistance) {
  for (double eps : {1.0, 0.25}) {
    const double beta = beta_from_eps(eps);
    auto fitted = [&](unsigned seed) {
      PairSampler s(seed, beta * kPi);
      double c = 0.0;
      for (int k = 0; k < 5000; ++k) {
        const Point x = s.interior(), y = s.interior();
        c = std::fmax(c, std::abs(kernel_K(x, y, beta)) * std::abs(x - y));
      }
      return c;
    };
    const double c1 = fitted(7), c2 = fitted(8);
    EXPECT_TRUE(std::isfinite(c1));
    EXPECT_LT(std::fmax(c1, c2) / std::fmin(c1, c2), 1.5);
    std::cout << "eps=" << eps << " fitted |K||x-y| constant " << std::fmax(c1, c2) << "\n";
  }
}

TEST(Kernel, FarFieldShape) {
  const double beta = 0.25;
  PairSampler s(9, beta * kPi, 100.0);
  double c = 0.0;
  for (int k = 0; k < 5000; ++k) {
    const Point x = s.interior(), y = s.interior();
    if (std::abs(y) < 2 * std::abs(x)) continue;
    c = std::fmax(c, std::abs(kernel_K(x, y, beta)) * std::norm(y) / std::abs(x));
  }
  EXPECT_TRUE(std::isfinite(c));
  EXPECT_GT(c, 0.0);
  std::cout << "fitted |K||y|^2/|x| constant on |y| >= 2|x|: " << c << "\n";
}

TEST(PoissonQuadrature, ZeroSource) {
  const GridPtr g = make_polar_grid(SectorSpec::from_epsilon(1.0, 1.0), 17, 9, 1e-3);
  EXPECT_EQ(poisson_quadrature(Field2D::zeros(g)).max_abs(), 0.0);
}

TEST(PoissonQuadrature, LinearAndZeroOnRays) {
  const GridPtr g = make_polar_grid(SectorSpec::from_epsilon(1.0, 1.0), 25, 13, 1e-3);
  const Field2D f = Field2D::sample(g, [](double R, double t) { return bump(R) * std::cos(3 * t); });
  const Field2D h = Field2D::sample(g, [](double R, double t) { return bump(R) * R * t; });
  const Field2D lhs = poisson_quadrature(2.5 * f + (-1.5) * h);
  const Field2D rhs = 2.5 * poisson_quadrature(f) + (-1.5) * poisson_quadrature(h);
  EXPECT_LE((lhs - rhs).max_abs(), 1e-13 * (1.0 + rhs.max_abs()));
  for (int i = 0; i < g->nr; ++i) {
    EXPECT_EQ(lhs.at(i, 0), 0.0);
    EXPECT_EQ(lhs.at(i, g->ntheta - 1), 0.0);
  }
}

TEST(PoissonQuadrature, RefusesSupportNearTruncation) {
  const GridPtr g = make_polar_grid(SectorSpec::from_epsilon(1.0, 1.0), 17, 9, 1e-3);
  const Field2D f = Field2D::sample(g, [](double R, double) { return R < 0.7 ? 1.0 : 0.0; });
  EXPECT_EQ(thrown_kind([&] { (void)poisson_quadrature(f); }), ErrorKind::truncation);
  EXPECT_NO_THROW((void)poisson_quadrature(f, GreenKind::truncated));
}

TEST(Manufactured, ClosedFormsAgreeWithDifferences) {
  const ManufacturedSolution m{kPi / 4};
  const double R = 0.3, t = 0.4, h = 1e-4;
  auto at = [&](double dx, double dz) {
    const Point p = polar(R, t) + Point(dx, dz);
    return m.psi(std::abs(p), std::arg(p));
  };
  const double pe = (at(h, 0) - at(-h, 0)) / (2 * h), pz = (at(0, h) - at(0, -h)) / (2 * h);
  const double lap = (at(h, 0) + at(-h, 0) + at(0, h) + at(0, -h) - 4 * at(0, 0)) / (h * h);
  EXPECT_NEAR(m.d_eta(R, t), pe, 1e-7);
  EXPECT_NEAR(m.d_z(R, t), pz, 1e-7);
  EXPECT_NEAR(m.laplacian(R, t), lap, 1e-5);
  EXPECT_NEAR(m.l_operator(R, t), lap - pe / (1.0 + R * std::cos(t)), 1e-5);
}

TEST(Manufactured, SecondOrderConvergence) {
  const auto rows = convergence_study(1.0, 17, 9, 3);
  for (auto col : {&ConvergenceRow::err_quadrature, &ConvergenceRow::err_fd, &ConvergenceRow::err_iterate}) {
    const auto orders = observed_orders(rows, col);
    EXPECT_GE(orders.back(), 1.8);
    EXPECT_LE(orders.back(), 2.5);
  }
  const ConvergenceRow& fine = rows.back();
  EXPECT_FALSE(fine.fell_back);
  EXPECT_LE(fine.fd_iterate_gap, 2.0 * std::max(fine.err_fd, fine.err_iterate));
}

TEST(VelocityBound, ZeroSource) {
  const GridPtr g = make_polar_grid(SectorSpec::from_epsilon(1.0, 1.0), 17, 9, 1e-3);
  EXPECT_EQ(velocity_bound_check(Field2D::zeros(g)), 0.0);
}

TEST(VelocityBound, StableUnderRefinementAndScaleFree) {
  const SectorSpec spec = SectorSpec::from_epsilon(1.0, 1.0);
  auto source = [](double R, double t) { return bump(R) * std::sin(4 * t) + bump(R); };
  const Field2D fc = Field2D::sample(make_polar_grid(spec, 33, 17, 1e-3), source);
  const Field2D ff = Field2D::sample(make_polar_grid(spec, 65, 33, 1e-3), source);
  const double cc = velocity_bound_check(fc), cf = velocity_bound_check(ff);
  EXPECT_TRUE(std::isfinite(cf));
  EXPECT_LE(std::fabs(cc - cf) / cf, 0.05);
  EXPECT_NEAR(velocity_bound_check(2.0 * fc), cc, 1e-12 * cc);

  const GradientField g1 = gradient_quadrature(fc), g2 = gradient_quadrature(2.0 * fc);
  EXPECT_LE((g2.d_eta - 2.0 * g1.d_eta).max_abs(), 1e-13 * g2.d_eta.max_abs());
  EXPECT_LE((g2.d_z - 2.0 * g1.d_z).max_abs(), 1e-13 * g2.d_z.max_abs());
}

TEST(SectorOperator, SolveInvertsApply) {
  const GridPtr g = make_polar_grid(SectorSpec::from_epsilon(0.5, 1.0), 30, 15, 1e-2);
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Field2D f = Field2D::zeros(g);
  for (int i = 1; i + 1 < g->nr; ++i)
    for (int j = 1; j + 1 < g->ntheta; ++j) f.at(i, j) = u(rng);
  for (OperatorKind kind : {OperatorKind::laplacian, OperatorKind::l_operator}) {
    const SectorOperator op(g, kind);
    const Field2D psi = op.solve(f);
    EXPECT_LE((op.apply(psi) - f).max_abs(), 1e-8);
  }
}

TEST(LSolve, ZeroSource) {
  const GridPtr g = make_polar_grid(SectorSpec::from_epsilon(1.0, 1.0), 17, 9, 1e-3);
  EXPECT_EQ(l_solve(Field2D::zeros(g), LMethod::fd).psi.max_abs(), 0.0);
  const LSolveResult it = l_solve(Field2D::zeros(g), LMethod::iterate);
  EXPECT_EQ(it.psi.max_abs(), 0.0);
  EXPECT_FALSE(it.fell_back);
}

TEST(LSolve, FallsBackWhenIterationBudgetRunsOut) {
  const GridPtr g = make_polar_grid(SectorSpec::from_epsilon(1.0, 1.0), 17, 9, 1e-3);
  const ManufacturedSolution m{g->spec.l};
  const LSolveResult r = l_solve(m.sample_l_operator(g), LMethod::iterate, {1e-9, 1});
  EXPECT_TRUE(r.fell_back);
  EXPECT_EQ(r.method_used, LMethod::fd);
  const LSolveResult fd = l_solve(m.sample_l_operator(g), LMethod::fd);
  EXPECT_EQ((r.psi - fd.psi).max_abs(), 0.0);
}

TEST(LSolve, AgreesOnRandomSmoothSource) {
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const double a = u(rng), b = u(rng), c = u(rng);
  auto source = [&](double R, double t) { return bump(R) * (a + b * std::cos(2 * t) + c * R * std::sin(3 * t)); };
  const SectorSpec spec = SectorSpec::from_epsilon(1.0, 1.0);
  auto solve = [&](int nr, int nt, LMethod m) {
    return l_solve(Field2D::sample(make_polar_grid(spec, nr, nt, 1e-3), source), m).psi;
  };
  auto at_coarse = [](const Field2D& fine, const GridPtr& coarse) {
    Field2D out = Field2D::zeros(coarse);
    for (int i = 0; i < coarse->nr; ++i)
      for (int j = 0; j < coarse->ntheta; ++j) out.at(i, j) = fine.at(2 * i, 2 * j);
    return out;
  };
  const Field2D fd = solve(33, 17, LMethod::fd), it = solve(33, 17, LMethod::iterate);
  const Field2D fd_fine = solve(65, 33, LMethod::fd);
  const double disc = (fd - at_coarse(fd_fine, fd.grid)).max_abs() * 4.0 / 3.0;
  EXPECT_LE((fd - it).max_abs(), 2.0 * disc);
}

TEST(LSolve, MaximumPrinciple) {
  const GridPtr g = make_polar_grid(SectorSpec::from_epsilon(1.0, 1.0), 25, 13, 1e-3);
  std::mt19937_64 rng(14);
  std::uniform_real_distribution<double> u(-1.0, 0.0);
  for (int trial = 0; trial < 10; ++trial) {
    Field2D f = Field2D::zeros(g);
    for (double& v : f.values) v = u(rng);
    const Field2D psi = l_solve(f, LMethod::fd).psi;
    for (double v : psi.values) EXPECT_GE(v, 0.0);
  }
}

TEST(VanishingExponent, ZeroSourceIsFlagged) {
  const GridPtr g = make_graded_grid(SectorSpec::from_epsilon(1.0, 1.0), 1.05, 17, 1e-4);
  const VanishingFit fit = vanishing_exponent(Field2D::zeros(g), 0.5);
  EXPECT_FALSE(fit.defined);
}

TEST(VanishingExponent, HoelderSourceDecays) {
  const SectorSpec spec = SectorSpec::from_epsilon(1.0, 1.0);
  const GridPtr g = make_graded_grid(spec, 1.05, 33, 1e-4);
  const Field2D f = Field2D::sample(g, [&](double R, double t) {
    return std::pow(R, 0.5) * std::sin(kPi * t / spec.l) * bump(R);
  });
  const VanishingFit fit = vanishing_exponent(f, 0.5);
  EXPECT_TRUE(fit.defined);
  EXPECT_GE(fit.slope, 0.4);
  EXPECT_NEAR(fit.source_slope, 0.5, 0.05);
}

TEST(VanishingExponent, ConstantSourceDoesNotDecay) {
  const GridPtr g = make_graded_grid(SectorSpec::from_epsilon(1.0, 1.0), 1.05, 33, 1e-4);
  const Field2D f = Field2D::sample(g, [](double R, double) { return bump(R); });
  const VanishingFit fit = vanishing_exponent(f, 0.5);
  EXPECT_TRUE(fit.defined);
  EXPECT_LT(std::fabs(fit.slope), 0.1);
}

TEST(VanishingExponent, ParameterAndResolutionErrors) {
  const SectorSpec spec = SectorSpec::from_epsilon(1.0, 1.0);
  const GridPtr fine = make_graded_grid(spec, 1.05, 17, 1e-4);
  EXPECT_EQ(thrown_kind([&] { (void)vanishing_exponent(Field2D::zeros(fine), 2.5); }), ErrorKind::invalid_parameter);
  const GridPtr coarse = make_graded_grid(spec, 1.6, 17, 1e-4);
  EXPECT_EQ(thrown_kind([&] { (void)vanishing_exponent(Field2D::zeros(coarse), 0.5); }),
            ErrorKind::insufficient_resolution);
}

TEST(FieldIo, BinaryRoundTripIsExact) {
  const GridPtr g = make_graded_grid(SectorSpec::from_epsilon(0.25, 4.0), 1.1, 11, 4e-4);
  std::mt19937_64 rng(15);
  std::normal_distribution<double> n;
  Field2D f = Field2D::zeros(g);
  for (double& v : f.values) v = n(rng);
  const auto dir = std::filesystem::temp_directory_path() / "coneflow_field_io";
  std::filesystem::create_directories(dir);
  write_field(f, dir / "f");
  const Field2D back = read_field(dir / "f");
  EXPECT_EQ(back.grid->nr, g->nr);
  EXPECT_EQ(back.grid->ntheta, g->ntheta);
  EXPECT_EQ(back.values, f.values);
  EXPECT_EQ(std::filesystem::file_size(dir / "f.bin"), 8 * g->size());

  const KeyValues hdr = read_key_values(dir / "f.hdr");
  std::vector<std::string> keys;
  for (const auto& [k, v] : hdr) keys.push_back(k);
  for (const char* k : {"nr", "ntheta", "epsilon", "r_min", "r_max", "grading"})
    EXPECT_NE(std::find(keys.begin(), keys.end(), k), keys.end()) << k;

  write_field_csv(f, dir / "f.csv");
  const CsvTable t = read_csv(dir / "f.csv");
  EXPECT_EQ(t.rows.size(), g->size());
  EXPECT_EQ(t.rows[5][t.column("value")], f.values[5]);
  std::filesystem::remove_all(dir);
}

TEST(FieldIo, TruncatedBinaryIsRejected) {
  const GridPtr g = make_polar_grid(SectorSpec::from_epsilon(1.0, 1.0), 5, 5, 0.1);
  const auto dir = std::filesystem::temp_directory_path() / "coneflow_field_trunc";
  std::filesystem::create_directories(dir);
  write_field(Field2D::zeros(g), dir / "f");
  std::filesystem::resize_file(dir / "f.bin", 8 * 10);
  EXPECT_EQ(thrown_kind([&] { (void)read_field(dir / "f"); }), ErrorKind::invalid_input);
  std::filesystem::remove_all(dir);
}

TEST(Derivatives, HessianOfQuadraticIsExact) {
  const GridPtr g = make_polar_grid(SectorSpec::from_epsilon(1.0, 1.0), 60, 40, 0.05);
  const Field2D f = Field2D::sample(g, [](double R, double t) {
    const double x = R * std::cos(t), z = R * std::sin(t);
    return x * x + 3 * x * z;
  });
  const Field2D h = hessian_norm(f);
  const double exact = std::sqrt(4.0 + 2 * 9.0);
  EXPECT_NEAR(h.at(30, 20), exact, 1e-2 * exact);
  const Field2D fe = d_eta(f), fz = d_z(f);
  const double x = g->eta(30, 20), z = g->z(30, 20);
  EXPECT_NEAR(fe.at(30, 20), 2 * x + 3 * z, 1e-2);
  EXPECT_NEAR(fz.at(30, 20), 3 * x, 1e-2);
}
