#pragma once

#include <complex>
#include <cstddef>
#include <span>

namespace kp2 {

using cplx = std::complex<double>;

// Thin wrappers over cached FFTW plans. Plans are created once per size under a
// lock and executed with the new-array interface, so instances are cheap and
// can be used from several threads at once.
//
// Conventions: forward transforms are normalized by 1/N so that the output
// holds the coefficients of the trigonometric interpolant,
//   u(x_j) = sum_k u_k exp(2 pi i j k / N),
// and inverse transforms are unnormalized sums.

/// 2-D real transform of a row-major array [ny][nx] (x fastest) to the
/// half-complex array [ny][nx/2 + 1].
class RealFft2D {
 public:
  RealFft2D(std::size_t nx, std::size_t ny);

  std::size_t nx() const noexcept { return nx_; }
  std::size_t ny() const noexcept { return ny_; }
  std::size_t spectral_size() const noexcept { return ny_ * (nx_ / 2 + 1); }

  void forward(std::span<const double> in, std::span<cplx> out) const;
  /// `in` is left untouched (FFTW's c2r destroys its input, so a copy is made).
  void inverse(std::span<const cplx> in, std::span<double> out) const;

 private:
  std::size_t nx_, ny_;
  void* r2c_;
  void* c2r_;
};

/// 1-D real transform of length n to n/2 + 1 coefficients.
class RealFft1D {
 public:
  explicit RealFft1D(std::size_t n);

  std::size_t size() const noexcept { return n_; }
  void forward(std::span<const double> in, std::span<cplx> out) const;
  void inverse(std::span<const cplx> in, std::span<double> out) const;

 private:
  std::size_t n_;
  void* r2c_;
  void* c2r_;
};

/// 1-D complex transform of length n.
class ComplexFft1D {
 public:
  explicit ComplexFft1D(std::size_t n);

  std::size_t size() const noexcept { return n_; }
  void forward(std::span<const cplx> in, std::span<cplx> out) const;
  void inverse(std::span<const cplx> in, std::span<cplx> out) const;

 private:
  std::size_t n_;
  void* fwd_;
  void* bwd_;
};

}  // namespace kp2
