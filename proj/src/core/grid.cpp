#include "grid.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <numbers>

#include "error.hpp"

namespace kp2 {

Grid2D Grid2D::make(std::size_t nx, std::size_t ny, double lx, double ly) {
  auto valid_count = [](std::size_t n) { return n >= 64 && std::has_single_bit(n); };
  if (!valid_count(nx) || !valid_count(ny)) {
    throw InvalidArgument("grid sizes must be powers of two >= 64 (got " + std::to_string(nx) +
                          " x " + std::to_string(ny) + ")");
  }
  if (!(lx > 0.0) || !(ly > 0.0) || !std::isfinite(lx) || !std::isfinite(ly)) {
    throw InvalidArgument("domain lengths must be positive");
  }
  return Grid2D{nx, ny, lx, ly};
}

double Grid2D::kx(std::size_t j) const noexcept {
  return 2.0 * std::numbers::pi * static_cast<double>(j) / lx;
}

long Grid2D::ky_index(std::size_t m) const noexcept {
  const long mm = static_cast<long>(m);
  const long half = static_cast<long>(ny / 2);
  return mm < half ? mm : mm - static_cast<long>(ny);
}

double Grid2D::ky(std::size_t m) const noexcept {
  return 2.0 * std::numbers::pi * static_cast<double>(ky_index(m)) / ly;
}

Field2D::Field2D(const Grid2D& grid) : grid_(grid) {
  auto d = std::make_shared<Data>();
  d->values.assign(grid.size(), 0.0);
  data_ = std::move(d);
}

Field2D Field2D::from_values(const Grid2D& grid, std::vector<double> values) {
  if (values.size() != grid.size()) {
    throw InvalidArgument("sample count does not match the grid");
  }
  Field2D f;
  f.grid_ = grid;
  auto d = std::make_shared<Data>();
  d->values = std::move(values);
  f.data_ = std::move(d);
  return f;
}

Field2D Field2D::from_spectrum(const Grid2D& grid, std::vector<cplx> spectrum) {
  if (spectrum.size() != grid.spectral_size()) {
    throw InvalidArgument("coefficient count does not match the grid");
  }
  Field2D f;
  f.grid_ = grid;
  auto d = std::make_shared<Data>();
  d->values.resize(grid.size());
  RealFft2D(grid.nx, grid.ny).inverse(spectrum, d->values);
  // Re-derive the coefficients from the real samples on first use: this
  // enforces Hermitian symmetry of the kx = 0 and Nyquist columns.
  f.data_ = std::move(d);
  return f;
}

Field2D Field2D::sample(const Grid2D& grid, const std::function<double(double, double)>& fn) {
  std::vector<double> v(grid.size());
  for (std::size_t m = 0; m < grid.ny; ++m) {
    const double y = grid.y(m);
    for (std::size_t j = 0; j < grid.nx; ++j) v[m * grid.nx + j] = fn(grid.x(j), y);
  }
  return from_values(grid, std::move(v));
}

std::span<const double> Field2D::values() const noexcept {
  if (!data_) return {};
  return data_->values;
}

std::span<const cplx> Field2D::spectrum() const {
  if (!data_) return {};
  std::call_once(data_->once, [this] {
    data_->spectrum.resize(grid_.spectral_size());
    RealFft2D(grid_.nx, grid_.ny).forward(data_->values, data_->spectrum);
  });
  return data_->spectrum;
}

namespace {

template <class Op>
Field2D combine(const Field2D& a, const Field2D& b, Op op) {
  if (!(a.grid() == b.grid())) throw InvalidArgument("fields live on different grids");
  std::vector<double> out(a.grid().size());
  auto va = a.values();
  auto vb = b.values();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = op(va[i], vb[i]);
  return Field2D::from_values(a.grid(), std::move(out));
}

template <class Mult>
Field2D map_spectrum(const Field2D& f, Mult mult) {
  const Grid2D& g = f.grid();
  auto in = f.spectrum();
  std::vector<cplx> out(in.size());
  const std::size_t nk = g.nkx();
  for (std::size_t m = 0; m < g.ny; ++m) {
    for (std::size_t j = 0; j < nk; ++j) {
      const std::size_t idx = m * nk + j;
      out[idx] = mult(j, m, in[idx]);
    }
  }
  return Field2D::from_spectrum(g, std::move(out));
}

cplx ipow(cplx z, int n) {
  cplx r{1.0, 0.0};
  for (int i = 0; i < n; ++i) r *= z;
  return r;
}

}  // namespace

Field2D operator+(const Field2D& a, const Field2D& b) {
  return combine(a, b, [](double x, double y) { return x + y; });
}

Field2D operator-(const Field2D& a, const Field2D& b) {
  return combine(a, b, [](double x, double y) { return x - y; });
}

Field2D operator*(double s, const Field2D& a) {
  std::vector<double> out(a.values().begin(), a.values().end());
  for (auto& v : out) v *= s;
  return Field2D::from_values(a.grid(), std::move(out));
}

Field2D spectral_derivative(const Field2D& f, int ox, int oy) {
  if (ox < 0 || oy < 0) throw InvalidArgument("derivative orders must be non-negative");
  if (ox == 0 && oy == 0) return f;
  const Grid2D& g = f.grid();
  return map_spectrum(f, [&](std::size_t j, std::size_t m, cplx c) -> cplx {
    if ((ox % 2 == 1 && g.kx_nyquist(j)) || (oy % 2 == 1 && g.ky_nyquist(m))) return 0.0;
    return c * ipow(cplx(0.0, g.kx(j)), ox) * ipow(cplx(0.0, g.ky(m)), oy);
  });
}

double max_x_mean_coefficient(const Field2D& f) {
  const Grid2D& g = f.grid();
  auto s = f.spectrum();
  double worst = 0.0;
  for (std::size_t m = 0; m < g.ny; ++m) worst = std::max(worst, std::abs(s[m * g.nkx()]));
  return worst;
}

Field2D antiderivative_x(const Field2D& f, double tolerance) {
  const double worst = max_x_mean_coefficient(f);
  if (worst > tolerance) throw NonzeroXMean(worst);
  const Grid2D& g = f.grid();
  return map_spectrum(f, [&](std::size_t j, std::size_t, cplx c) -> cplx {
    if (j == 0 || g.kx_nyquist(j)) return 0.0;
    return c / cplx(0.0, g.kx(j));
  });
}

bool dealias_keep(const Grid2D& g, std::size_t j, std::size_t m) noexcept {
  const auto kxmax = static_cast<long>(g.nx / 3);
  const auto kymax = static_cast<long>(g.ny / 3);
  return static_cast<long>(j) <= kxmax && std::labs(g.ky_index(m)) <= kymax;
}

Field2D dealias(const Field2D& f) {
  const Grid2D& g = f.grid();
  return map_spectrum(f, [&](std::size_t j, std::size_t m, cplx c) -> cplx {
    return dealias_keep(g, j, m) ? c : cplx{};
  });
}

Field2D project_x_mean(const Field2D& f) {
  return map_spectrum(f, [&](std::size_t j, std::size_t m, cplx c) -> cplx {
    return (j == 0 && m != 0) ? cplx{} : c;
  });
}

double integral(const Field2D& f) {
  double s = 0.0;
  for (double v : f.values()) s += v;
  return s * f.grid().dx() * f.grid().dy();
}

double l2_quadrature(const Field2D& f) {
  double s = 0.0;
  for (double v : f.values()) s += v * v;
  return s * f.grid().dx() * f.grid().dy();
}

double l2_spectral(const Field2D& f) {
  const Grid2D& g = f.grid();
  auto s = f.spectrum();
  double sum = 0.0;
  for (std::size_t m = 0; m < g.ny; ++m) {
    for (std::size_t j = 0; j < g.nkx(); ++j) {
      // Interior kx columns stand for two conjugate modes.
      const double w = (j == 0 || g.kx_nyquist(j)) ? 1.0 : 2.0;
      sum += w * std::norm(s[m * g.nkx() + j]);
    }
  }
  return sum * g.lx * g.ly;
}

Integrals energy_density_integrals(const Field2D& f) {
  const Field2D ux = spectral_derivative(f, 1, 0);
  const Field2D w = antiderivative_x(spectral_derivative(f, 0, 1));
  auto u = f.values();
  auto vx = ux.values();
  auto vw = w.values();
  double l2 = 0.0, grad = 0.0, nonloc = 0.0, cubic = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    l2 += u[i] * u[i];
    grad += vx[i] * vx[i];
    nonloc += vw[i] * vw[i];
    cubic += u[i] * u[i] * u[i];
  }
  const double da = f.grid().dx() * f.grid().dy();
  Integrals out;
  out.l2 = l2 * da;
  out.energy = (grad + nonloc + l2) * da;
  out.hamiltonian = 0.5 * (grad - 3.0 * nonloc - 2.0 * cubic) * da;
  return out;
}

namespace {

template <class T>
void put_le(std::ostream& os, T value) {
  static_assert(sizeof(T) == 8);
  std::array<unsigned char, 8> bytes;
  std::memcpy(bytes.data(), &value, 8);
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes.begin(), bytes.end());
  os.write(reinterpret_cast<const char*>(bytes.data()), 8);
}

template <class T>
T get_le(std::istream& is) {
  std::array<unsigned char, 8> bytes;
  is.read(reinterpret_cast<char*>(bytes.data()), 8);
  if (!is) throw IoError("truncated snapshot");
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes.begin(), bytes.end());
  T value;
  std::memcpy(&value, bytes.data(), 8);
  return value;
}

}  // namespace

void write_snapshot(const std::filesystem::path& path, const Field2D& f) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot open " + path.string() + " for writing");
  const Grid2D& g = f.grid();
  put_le<std::uint64_t>(os, g.nx);
  put_le<std::uint64_t>(os, g.ny);
  put_le<double>(os, g.lx);
  put_le<double>(os, g.ly);
  for (double v : f.values()) put_le<double>(os, v);
  if (!os) throw IoError("failed writing " + path.string());
}

Field2D read_snapshot(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open " + path.string());
  const auto nx = get_le<std::uint64_t>(is);
  const auto ny = get_le<std::uint64_t>(is);
  const auto lx = get_le<double>(is);
  const auto ly = get_le<double>(is);
  const Grid2D g = Grid2D::make(nx, ny, lx, ly);
  std::vector<double> v(g.size());
  for (auto& x : v) x = get_le<double>(is);
  return Field2D::from_values(g, std::move(v));
}

}  // namespace kp2
