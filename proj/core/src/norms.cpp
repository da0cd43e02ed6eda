#include "coneflow/norms.hpp"

#include <cmath>
#include <random>

#include "coneflow/error.hpp"

namespace coneflow {

namespace {

constexpr std::uint64_t kPairSeed = 0x5eed'c0de'0001ULL;

void check_alpha(double alpha) {
  if (!(alpha > 0.0 && alpha <= 1.0)) throw InvalidParameter("alpha", "must lie in (0, 1]");
}

NormEstimate estimate(const Field2D& f, double alpha, long pair_budget, bool weighted) {
  check_alpha(alpha);
  if (pair_budget < kMinPairBudget) throw InvalidParameter("pair_budget", "must be at least 10^4");
  const PolarGrid& g = *f.grid;

  std::vector<double> w(g.size());
  std::vector<std::complex<double>> pos(g.size());
  for (int i = 0; i < g.nr; ++i)
    for (int j = 0; j < g.ntheta; ++j) {
      const std::size_t k = g.index(i, j);
      w[k] = weighted ? std::pow(g.radii[i], alpha) * f.values[k] : f.values[k];
      pos[k] = g.point(i, j);
    }
  auto quotient = [&](std::size_t p, std::size_t q) {
    const double d = std::abs(pos[p] - pos[q]);
    return std::fabs(w[p] - w[q]) / std::pow(d, alpha);
  };

  NormEstimate e;
  e.alpha = alpha;
  e.sup_part = f.max_abs();
  double semi = 0.0;
  for (int i = 0; i < g.nr; ++i)
    for (int j = 0; j < g.ntheta; ++j)
      for (int jj = j + 1; jj < g.ntheta; ++jj) {
        semi = std::fmax(semi, quotient(g.index(i, j), g.index(i, jj)));
        ++e.pair_count;
      }

  std::mt19937_64 rng(kPairSeed);
  const auto nt = static_cast<std::uint64_t>(g.ntheta);
  for (long k = 0; k < pair_budget && g.nr > 1; ++k) {
    const int offset = 1 + static_cast<int>(k % (g.nr - 1));
    const int i = static_cast<int>(rng() % static_cast<std::uint64_t>(g.nr - offset));
    const int j = static_cast<int>(rng() % nt);
    const int jj = static_cast<int>(rng() % nt);
    semi = std::fmax(semi, quotient(g.index(i, j), g.index(i + offset, jj)));
    ++e.pair_count;
  }
  e.seminorm_part = semi;
  e.total = e.sup_part + e.seminorm_part;
  return e;
}

}  // namespace

NormEstimate circ_norm(const Field2D& f, double alpha, long pair_budget) {
  return estimate(f, alpha, pair_budget, true);
}

NormEstimate holder_norm(const Field2D& f, double alpha, long pair_budget) {
  return estimate(f, alpha, pair_budget, false);
}

double angular_holder_norm(const std::vector<double>& f, double l, double alpha) {
  check_alpha(alpha);
  const std::size_t n = f.size();
  if (n < 2) fail(ErrorKind::invalid_input, "profile needs at least two samples");
  const double h = l / static_cast<double>(n - 1);
  double sup = 0.0, semi = 0.0;
  for (std::size_t a = 0; a < n; ++a) {
    sup = std::fmax(sup, std::fabs(f[a]));
    for (std::size_t b = a + 1; b < n; ++b)
      semi = std::fmax(semi, std::fabs(f[a] - f[b]) / std::pow(h * static_cast<double>(b - a), alpha));
  }
  return sup + semi;
}

double corner_value(const Field2D& f) {
  const PolarGrid& g = *f.grid;
  const double r0 = g.radii[0];
  const double r1 = g.radii[1];
  double c = 0.0;
  for (int j = 0; j < g.ntheta; ++j) {
    const double v = f.at(0, j) - r0 * (f.at(1, j) - f.at(0, j)) / (r1 - r0);
    c = std::fmax(c, std::fabs(v));
  }
  return c;
}

double product_rule_check(const Field2D& f, const Field2D& h, double alpha, long pair_budget) {
  if (f.values.size() != h.values.size()) fail(ErrorKind::invalid_input, "f and h live on different grids");
  const double fsup = f.max_abs();
  if (fsup == 0.0) return 0.0;
  if (!(corner_value(f) < 1e-8 * fsup)) fail(ErrorKind::invalid_input, "f does not vanish at the corner");
  Field2D fh = f;
  for (std::size_t k = 0; k < fh.values.size(); ++k) fh.values[k] *= h.values[k];
  const double num = holder_norm(fh, alpha, pair_budget).total;
  if (num == 0.0) return 0.0;
  return num / (circ_norm(h, alpha, pair_budget).total * holder_norm(f, alpha, pair_budget).total);
}

const std::vector<std::string>& norm_estimate_columns() {
  static const std::vector<std::string> columns = {"alpha", "sup_part", "seminorm_part", "total", "pair_count"};
  return columns;
}

std::vector<double> norm_estimate_row(const NormEstimate& e) {
  return {e.alpha, e.sup_part, e.seminorm_part, e.total, static_cast<double>(e.pair_count)};
}

}  // namespace coneflow
