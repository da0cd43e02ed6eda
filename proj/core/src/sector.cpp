#include "coneflow/sector.hpp"

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <numbers>

#include "coneflow/error.hpp"
#include "coneflow/textio.hpp"

namespace coneflow {

double beta_from_eps(double epsilon) {
  if (!(epsilon > 0.0) || !std::isfinite(epsilon)) throw InvalidParameter("epsilon", "must be positive");
  return std::atan(1.0 / epsilon) / std::numbers::pi;
}

SectorSpec SectorSpec::from_epsilon(double epsilon, double r_max) {
  if (!(r_max > 0.0) || !std::isfinite(r_max)) throw InvalidParameter("r_max", "must be positive");
  SectorSpec s;
  s.epsilon = epsilon;
  s.beta = beta_from_eps(epsilon);
  s.l = std::atan(1.0 / epsilon);
  s.r_max = r_max;
  return s;
}

double PolarGrid::ds() const { return std::log(r_max() / r_min()) / (nr - 1); }

double PolarGrid::eta(int i, int j) const { return radii[i] * std::cos(thetas[j]); }
double PolarGrid::z(int i, int j) const { return radii[i] * std::sin(thetas[j]); }

double PolarGrid::area_weight(int i, int j) const {
  double w = radii[i] * radii[i] * ds() * dtheta();
  if (i == 0 || i == nr - 1) w *= 0.5;
  if (j == 0 || j == ntheta - 1) w *= 0.5;
  return w;
}

GridPtr make_polar_grid(const SectorSpec& spec, int nr, int ntheta, double r_min) {
  if (nr < 3) throw InvalidParameter("nr", "need at least 3 radial nodes");
  if (ntheta < 3) throw InvalidParameter("ntheta", "need at least 3 angular nodes");
  if (!(r_min > 0.0) || !(r_min < spec.r_max)) throw InvalidParameter("r_min", "must lie in (0, r_max)");
  auto grid = std::make_shared<PolarGrid>();
  grid->spec = spec;
  grid->nr = nr;
  grid->ntheta = ntheta;
  grid->radii.resize(nr);
  const double ds = std::log(spec.r_max / r_min) / (nr - 1);
  for (int i = 0; i < nr; ++i) grid->radii[i] = r_min * std::exp(ds * i);
  grid->radii.front() = r_min;
  grid->radii.back() = spec.r_max;
  grid->thetas.resize(ntheta);
  for (int j = 0; j < ntheta; ++j) grid->thetas[j] = spec.l * static_cast<double>(j) / (ntheta - 1);
  grid->thetas.back() = spec.l;
  return grid;
}

GridPtr make_graded_grid(const SectorSpec& spec, double grading, int ntheta, double r_min) {
  if (!(grading > 1.0)) throw InvalidParameter("grading", "ratio must exceed 1");
  if (!(r_min > 0.0) || !(r_min < spec.r_max)) throw InvalidParameter("r_min", "must lie in (0, r_max)");
  const int nr = static_cast<int>(std::lround(std::log(spec.r_max / r_min) / std::log(grading))) + 1;
  return make_polar_grid(spec, nr, ntheta, r_min);
}

Field2D Field2D::zeros(GridPtr grid) {
  Field2D f;
  f.values.assign(grid->size(), 0.0);
  f.grid = std::move(grid);
  return f;
}

Field2D Field2D::sample(GridPtr grid, const std::function<double(double, double)>& fn) {
  Field2D f = zeros(std::move(grid));
  const PolarGrid& g = *f.grid;
  for (int i = 0; i < g.nr; ++i)
    for (int j = 0; j < g.ntheta; ++j) f.at(i, j) = fn(g.radii[i], g.thetas[j]);
  return f;
}

double Field2D::max_abs() const {
  double m = 0.0;
  for (double v : values) m = std::fmax(m, std::fabs(v));
  return m;
}

namespace {

void require_same_grid(const Field2D& a, const Field2D& b) {
  if (a.grid != b.grid && (a.grid->nr != b.grid->nr || a.grid->ntheta != b.grid->ntheta ||
                           a.grid->radii != b.grid->radii || a.grid->thetas != b.grid->thetas))
    fail(ErrorKind::invalid_input, "fields live on different grids");
}

}  // namespace

Field2D operator+(const Field2D& a, const Field2D& b) {
  require_same_grid(a, b);
  Field2D c = a;
  for (std::size_t k = 0; k < c.values.size(); ++k) c.values[k] += b.values[k];
  return c;
}

Field2D operator-(const Field2D& a, const Field2D& b) {
  require_same_grid(a, b);
  Field2D c = a;
  for (std::size_t k = 0; k < c.values.size(); ++k) c.values[k] -= b.values[k];
  return c;
}

Field2D operator*(double s, const Field2D& a) {
  Field2D c = a;
  for (double& v : c.values) v *= s;
  return c;
}

namespace {

std::filesystem::path with_suffix(const std::filesystem::path& stem, const char* suffix) {
  return std::filesystem::path(stem.string() + suffix);
}

std::uint64_t to_little_endian(std::uint64_t v) {
  if constexpr (std::endian::native == std::endian::little) return v;
  std::uint64_t r = 0;
  for (int k = 0; k < 8; ++k) r |= ((v >> (8 * k)) & 0xffu) << (8 * (7 - k));
  return r;
}

}  // namespace

void write_field(const Field2D& field, const std::filesystem::path& stem) {
  const PolarGrid& g = *field.grid;
  write_key_values(with_suffix(stem, ".hdr"),
                   {{"nr", std::to_string(g.nr)},
                    {"ntheta", std::to_string(g.ntheta)},
                    {"epsilon", format_double(g.spec.epsilon)},
                    {"r_min", format_double(g.r_min())},
                    {"r_max", format_double(g.r_max())},
                    {"grading", format_double(g.grading())}});
  std::ofstream out(with_suffix(stem, ".bin"), std::ios::binary);
  if (!out) fail(ErrorKind::io, "cannot open " + with_suffix(stem, ".bin").string());
  for (double v : field.values) {
    std::uint64_t bits = to_little_endian(std::bit_cast<std::uint64_t>(v));
    char bytes[8];
    std::memcpy(bytes, &bits, 8);
    out.write(bytes, 8);
  }
  if (!out) fail(ErrorKind::io, "field write failed");
}

Field2D read_field(const std::filesystem::path& stem) {
  const KeyValues kv = read_key_values(with_suffix(stem, ".hdr"));
  auto get = [&](const std::string& key) -> std::string {
    for (const auto& [k, v] : kv)
      if (k == key) return v;
    fail(ErrorKind::invalid_input, "field header lacks '" + key + "'");
  };
  const int nr = std::stoi(get("nr"));
  const int ntheta = std::stoi(get("ntheta"));
  const SectorSpec spec = SectorSpec::from_epsilon(std::stod(get("epsilon")), std::stod(get("r_max")));
  Field2D f = Field2D::zeros(make_polar_grid(spec, nr, ntheta, std::stod(get("r_min"))));
  std::ifstream in(with_suffix(stem, ".bin"), std::ios::binary);
  if (!in) fail(ErrorKind::io, "cannot open " + with_suffix(stem, ".bin").string());
  for (double& v : f.values) {
    char bytes[8];
    if (!in.read(bytes, 8)) fail(ErrorKind::invalid_input, "field binary is truncated");
    std::uint64_t bits = 0;
    std::memcpy(&bits, bytes, 8);
    v = std::bit_cast<double>(to_little_endian(bits));
  }
  if (in.peek() != std::char_traits<char>::eof())
    fail(ErrorKind::invalid_input, "field binary is longer than the header says");
  return f;
}

void write_field_csv(const Field2D& field, const std::filesystem::path& path) {
  const PolarGrid& g = *field.grid;
  CsvWriter csv(path, {"i", "j", "R", "theta", "eta", "z", "value"});
  for (int i = 0; i < g.nr; ++i)
    for (int j = 0; j < g.ntheta; ++j) {
      const double row[] = {static_cast<double>(i), static_cast<double>(j), g.radii[i], g.thetas[j],
                            g.eta(i, j), g.z(i, j), field.at(i, j)};
      csv.row(row);
    }
}

}  // namespace coneflow
