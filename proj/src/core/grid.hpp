#pragma once

#include <complex>
#include <cstddef>
#include <filesystem>
#include <functional>
#include <memory>
#include <mutex>
#include <span>
#include <vector>

#include "fft.hpp"

namespace kp2 {

/// Doubly periodic grid on [-Lx/2, Lx/2) x [-Ly/2, Ly/2).
///
/// Samples sit at x_j = (j - nx/2) dx, y_m = (m - ny/2) dy, so the origin is
/// the sample (nx/2, ny/2). Spectral data uses the half-complex layout
/// [ny][nx/2 + 1]: kx index j in [0, nx/2], ky index m in [0, ny) with signed
/// wavenumber ky = 2 pi (m < ny/2 ? m : m - ny) / Ly.
struct Grid2D {
  std::size_t nx = 0;
  std::size_t ny = 0;
  double lx = 0.0;
  double ly = 0.0;

  /// Validates nx, ny (powers of two, >= 64) and Lx, Ly > 0.
  static Grid2D make(std::size_t nx, std::size_t ny, double lx, double ly);

  double dx() const noexcept { return lx / static_cast<double>(nx); }
  double dy() const noexcept { return ly / static_cast<double>(ny); }
  double x(std::size_t j) const noexcept {
    return (static_cast<double>(j) - static_cast<double>(nx / 2)) * dx();
  }
  double y(std::size_t m) const noexcept {
    return (static_cast<double>(m) - static_cast<double>(ny / 2)) * dy();
  }
  std::size_t nkx() const noexcept { return nx / 2 + 1; }
  std::size_t spectral_size() const noexcept { return ny * nkx(); }
  std::size_t size() const noexcept { return nx * ny; }

  double kx(std::size_t j) const noexcept;
  double ky(std::size_t m) const noexcept;
  /// Signed ky index in [-ny/2, ny/2).
  long ky_index(std::size_t m) const noexcept;
  bool kx_nyquist(std::size_t j) const noexcept { return j == nx / 2; }
  bool ky_nyquist(std::size_t m) const noexcept { return m == ny / 2; }

  bool operator==(const Grid2D&) const = default;
};

/// Doubly periodic real field. Immutable once built; the spectral view is
/// computed on first use and shared between copies.
///
/// Spectral coefficients are normalized (forward transform divided by nx*ny),
/// so u(x, y) = sum u_hat exp(i (kx x' + ky y')) with x', y' measured from the
/// first sample.
class Field2D {
 public:
  Field2D() = default;
  explicit Field2D(const Grid2D& grid);

  static Field2D from_values(const Grid2D& grid, std::vector<double> values);
  static Field2D from_spectrum(const Grid2D& grid, std::vector<cplx> spectrum);
  static Field2D sample(const Grid2D& grid, const std::function<double(double, double)>& f);

  const Grid2D& grid() const noexcept { return grid_; }
  std::span<const double> values() const noexcept;
  std::span<const cplx> spectrum() const;

  double at(std::size_t ix, std::size_t iy) const noexcept {
    return values()[iy * grid_.nx + ix];
  }
  /// One x-line (fixed y index).
  std::span<const double> row(std::size_t iy) const noexcept {
    return values().subspan(iy * grid_.nx, grid_.nx);
  }

 private:
  struct Data {
    std::vector<double> values;
    mutable std::once_flag once;
    mutable std::vector<cplx> spectrum;
  };

  Grid2D grid_{};
  std::shared_ptr<const Data> data_;
};

Field2D operator+(const Field2D& a, const Field2D& b);
Field2D operator-(const Field2D& a, const Field2D& b);
Field2D operator*(double s, const Field2D& a);

/// Coefficient multiplication by (i kx)^ox (i ky)^oy. Nyquist modes are zeroed
/// for odd orders in the corresponding direction.
Field2D spectral_derivative(const Field2D& f, int ox, int oy);

/// Largest |u_hat(kx = 0, ky)| over all ky: the x-mean of each transverse line.
double max_x_mean_coefficient(const Field2D& f);

/// Inverse of d/dx on fields with zero x-mean per line (divides by i kx).
/// Throws NonzeroXMean when some kx = 0 coefficient exceeds `tolerance`.
Field2D antiderivative_x(const Field2D& f, double tolerance = 1e-8);

/// 2/3-rule truncation: zeroes modes with |j| > nx/3 or |m| > ny/3.
Field2D dealias(const Field2D& f);
bool dealias_keep(const Grid2D& g, std::size_t j, std::size_t m) noexcept;

/// Zeroes kx = 0, ky != 0 modes so that every x-line has the same mean.
Field2D project_x_mean(const Field2D& f);

struct Integrals {
  double l2 = 0.0;           // integral of u^2
  double energy = 0.0;       // integral of (u_x)^2 + (d_x^{-1} u_y)^2 + u^2
  double hamiltonian = 0.0;  // 1/2 integral of (u_x)^2 - 3 (d_x^{-1} u_y)^2 - 2 u^3
};

/// Rectangle-rule integrals (exact for trigonometric polynomials on the grid).
/// Propagates NonzeroXMean from the d_x^{-1} d_y term.
Integrals energy_density_integrals(const Field2D& f);

/// Integral of u^2 from the coefficients (Parseval).
double l2_spectral(const Field2D& f);
/// Integral of u^2 by the rectangle rule.
double l2_quadrature(const Field2D& f);
/// Rectangle-rule integral of the samples.
double integral(const Field2D& f);

/// Little-endian snapshot: u64 nx, u64 ny, f64 Lx, f64 Ly, then nx*ny f64
/// samples in row-major order (rows are x-lines, y index outermost).
void write_snapshot(const std::filesystem::path& path, const Field2D& f);
Field2D read_snapshot(const std::filesystem::path& path);

}  // namespace kp2
