#include "coneflow/elliptic.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseLU>
#include <cmath>
#include <limits>
#include <vector>

#include "coneflow/derivatives.hpp"
#include "coneflow/error.hpp"
#include "coneflow/green.hpp"

namespace coneflow {

namespace {

struct Stencil {
  double diag, south, north, west, east;  ///< i-1, i+1, j-1, j+1
};

// R^2 times the operator at node (i, j).
Stencil stencil_at(const PolarGrid& g, OperatorKind kind, int i, int j) {
  const double hs = g.ds();
  const double ht = g.dtheta();
  double c = 0.0, b = 0.0;
  if (kind == OperatorKind::l_operator) {
    const double R = g.radii[i];
    const double w = R / (1.0 + R * std::cos(g.thetas[j]));
    c = w * std::cos(g.thetas[j]);
    b = w * std::sin(g.thetas[j]);
  }
  Stencil st{};
  st.diag = -2.0 / (hs * hs) - 2.0 / (ht * ht);
  st.south = 1.0 / (hs * hs) + c / (2.0 * hs);
  st.north = 1.0 / (hs * hs) - c / (2.0 * hs);
  st.west = 1.0 / (ht * ht) - b / (2.0 * ht);
  st.east = 1.0 / (ht * ht) + b / (2.0 * ht);
  return st;
}

}  // namespace

struct SectorOperator::Impl {
  int mi = 0, mj = 0;
  Eigen::SparseMatrix<double> A;
  Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> lu;

  [[nodiscard]] int unknown(int i, int j) const { return (i - 1) * mj + (j - 1); }
};

SectorOperator::SectorOperator(GridPtr grid, OperatorKind kind)
    : grid_(std::move(grid)), kind_(kind), impl_(std::make_unique<Impl>()) {
  const PolarGrid& g = *grid_;
  impl_->mi = g.nr - 2;
  impl_->mj = g.ntheta - 2;
  const int m = impl_->mi * impl_->mj;
  std::vector<Eigen::Triplet<double>> entries;
  entries.reserve(5 * static_cast<std::size_t>(m));
  for (int i = 1; i <= impl_->mi; ++i)
    for (int j = 1; j <= impl_->mj; ++j) {
      const Stencil st = stencil_at(g, kind, i, j);
      const int row = impl_->unknown(i, j);
      entries.emplace_back(row, row, st.diag);
      if (i > 1) entries.emplace_back(row, impl_->unknown(i - 1, j), st.south);
      if (i < impl_->mi) entries.emplace_back(row, impl_->unknown(i + 1, j), st.north);
      if (j > 1) entries.emplace_back(row, impl_->unknown(i, j - 1), st.west);
      if (j < impl_->mj) entries.emplace_back(row, impl_->unknown(i, j + 1), st.east);
    }
  impl_->A.resize(m, m);
  impl_->A.setFromTriplets(entries.begin(), entries.end());
  impl_->A.makeCompressed();
  impl_->lu.compute(impl_->A);
  if (impl_->lu.info() != Eigen::Success) fail(ErrorKind::solver_failure, "sparse LU factorisation failed");
}

SectorOperator::~SectorOperator() = default;
SectorOperator::SectorOperator(SectorOperator&&) noexcept = default;
SectorOperator& SectorOperator::operator=(SectorOperator&&) noexcept = default;

Field2D SectorOperator::solve(const Field2D& f) const {
  const PolarGrid& g = *grid_;
  if (f.values.size() != g.size()) fail(ErrorKind::invalid_input, "source does not match the operator grid");
  const int m = impl_->mi * impl_->mj;
  Eigen::VectorXd b(m);
  for (int i = 1; i <= impl_->mi; ++i)
    for (int j = 1; j <= impl_->mj; ++j) b[impl_->unknown(i, j)] = g.radii[i] * g.radii[i] * f.at(i, j);
  Field2D psi = Field2D::zeros(grid_);
  const double bmax = b.lpNorm<Eigen::Infinity>();
  if (bmax == 0.0) return psi;
  if (!std::isfinite(bmax)) fail(ErrorKind::invalid_input, "source has non-finite entries");
  Eigen::VectorXd x = impl_->lu.solve(b);
  double res = (impl_->A * x - b).lpNorm<Eigen::Infinity>() / bmax;
  if (res > 1e-10) {
    x += impl_->lu.solve(b - impl_->A * x);
    res = (impl_->A * x - b).lpNorm<Eigen::Infinity>() / bmax;
  }
  if (!(res <= 1e-10)) fail(ErrorKind::solver_failure, "sparse solve residual above 1e-10");
  for (int i = 1; i <= impl_->mi; ++i)
    for (int j = 1; j <= impl_->mj; ++j) psi.at(i, j) = x[impl_->unknown(i, j)];
  return psi;
}

Field2D SectorOperator::apply(const Field2D& psi) const {
  const PolarGrid& g = *grid_;
  Field2D out = Field2D::zeros(grid_);
  for (int i = 1; i + 1 < g.nr; ++i)
    for (int j = 1; j + 1 < g.ntheta; ++j) {
      const Stencil st = stencil_at(g, kind_, i, j);
      const double v = st.diag * psi.at(i, j) + st.south * psi.at(i - 1, j) + st.north * psi.at(i + 1, j) +
                       st.west * psi.at(i, j - 1) + st.east * psi.at(i, j + 1);
      out.at(i, j) = v / (g.radii[i] * g.radii[i]);
    }
  return out;
}

const char* to_string(LMethod method) { return method == LMethod::fd ? "fd" : "iterate"; }

LSolveResult l_solve(const Field2D& f, LMethod method, const LSolveOptions& options) {
  LSolveResult result;
  auto direct = [&] {
    result.psi = SectorOperator(f.grid, OperatorKind::l_operator).solve(f);
    result.method_used = LMethod::fd;
  };
  if (method == LMethod::fd) {
    direct();
    return result;
  }
  const PolarGrid& g = *f.grid;
  Field2D psi = poisson_quadrature(f, GreenKind::truncated);
  double previous = std::numeric_limits<double>::infinity();
  int growing = 0;
  for (int k = 1; k <= options.max_iterations; ++k) {
    Field2D rhs = d_eta(psi);
    for (int i = 0; i < g.nr; ++i)
      for (int j = 0; j < g.ntheta; ++j) rhs.at(i, j) = f.at(i, j) + rhs.at(i, j) / (1.0 + g.eta(i, j));
    Field2D next = poisson_quadrature(rhs, GreenKind::truncated);
    const double scale = next.max_abs();
    const double inc = scale == 0.0 ? 0.0 : (next - psi).max_abs() / scale;
    psi = std::move(next);
    result.iterations = k;
    result.last_increment = inc;
    if (inc < options.tolerance) {
      result.psi = std::move(psi);
      result.method_used = LMethod::iterate;
      return result;
    }
    growing = inc > previous ? growing + 1 : 0;
    previous = inc;
    if (growing >= 3 || !std::isfinite(inc)) break;
  }
  result.fell_back = true;
  direct();
  return result;
}

namespace {

struct LineFit {
  double slope = 0.0;
  double r2 = 0.0;
};

LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    mx += x[k];
    my += y[k];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    sxx += (x[k] - mx) * (x[k] - mx);
    sxy += (x[k] - mx) * (y[k] - my);
    syy += (y[k] - my) * (y[k] - my);
  }
  LineFit fit;
  fit.slope = sxy / sxx;
  fit.r2 = syy == 0.0 ? 1.0 : sxy * sxy / (sxx * syy);
  return fit;
}

}  // namespace

VanishingFit vanishing_exponent(const Field2D& f, double alpha, const VanishingOptions& options) {
  const PolarGrid& g = *f.grid;
  if (!(alpha > 0.0 && alpha < 1.0 / g.spec.beta - 2.0))
    throw InvalidParameter("alpha", "must lie in (0, 1/beta - 2)");
  const double lo = options.window_lo * g.r_min();
  const double hi = options.window_hi * g.r_min();
  std::vector<int> rings;
  for (int i = 1; i + 1 < g.nr; ++i)
    if (g.radii[i] >= lo * (1.0 - 1e-12) && g.radii[i] <= hi * (1.0 + 1e-12)) rings.push_back(i);
  if (static_cast<int>(rings.size()) < options.min_nodes)
    fail(ErrorKind::insufficient_resolution, "fit window holds " + std::to_string(rings.size()) +
                                                 " radial nodes, need " + std::to_string(options.min_nodes));

  const Field2D psi = SectorOperator(f.grid, OperatorKind::l_operator).solve(f);
  const Field2D hess = hessian_norm(psi);

  VanishingFit fit;
  fit.nodes = static_cast<int>(rings.size());
  std::vector<double> x, y, ys;
  bool source_zero = false;
  for (int i : rings) {
    double h = 0.0, s = 0.0;
    for (int j = 0; j < g.ntheta; ++j) {
      h = std::fmax(h, hess.at(i, j));
      s = std::fmax(s, std::fabs(f.at(i, j)));
    }
    if (h == 0.0) return fit;
    if (s == 0.0) source_zero = true;
    x.push_back(std::log(g.radii[i]));
    y.push_back(std::log(h));
    ys.push_back(s > 0.0 ? std::log(s) : 0.0);
  }
  const LineFit main = fit_line(x, y);
  fit.slope = main.slope;
  fit.r2 = main.r2;
  fit.defined = true;
  fit.source_slope = source_zero ? 0.0 : fit_line(x, ys).slope;
  return fit;
}

}  // namespace coneflow
