#include "fft.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>
#include <tuple>
#include <vector>

namespace kp2 {
namespace {

std::mutex& plan_mutex() {
  static std::mutex m;
  return m;
}

enum class Kind { R2C2, C2R2, R2C1, C2R1, C2CF, C2CB };

// Plans live for the life of the process; FFTW keeps its own wisdom.
void* cached_plan(Kind kind, std::size_t n0, std::size_t n1) {
  static std::map<std::tuple<Kind, std::size_t, std::size_t>, fftw_plan> cache;
  std::lock_guard<std::mutex> lock(plan_mutex());
  auto key = std::make_tuple(kind, n0, n1);
  if (auto it = cache.find(key); it != cache.end()) return it->second;

  const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
  const int a = static_cast<int>(n0);
  const int b = static_cast<int>(n1);
  fftw_plan plan = nullptr;
  switch (kind) {
    case Kind::R2C2: {
      std::vector<double> r(n0 * n1);
      std::vector<fftw_complex> c(n0 * (n1 / 2 + 1));
      plan = fftw_plan_dft_r2c_2d(a, b, r.data(), c.data(), flags);
      break;
    }
    case Kind::C2R2: {
      std::vector<double> r(n0 * n1);
      std::vector<fftw_complex> c(n0 * (n1 / 2 + 1));
      plan = fftw_plan_dft_c2r_2d(a, b, c.data(), r.data(), flags);
      break;
    }
    case Kind::R2C1: {
      std::vector<double> r(n0);
      std::vector<fftw_complex> c(n0 / 2 + 1);
      plan = fftw_plan_dft_r2c_1d(a, r.data(), c.data(), flags);
      break;
    }
    case Kind::C2R1: {
      std::vector<double> r(n0);
      std::vector<fftw_complex> c(n0 / 2 + 1);
      plan = fftw_plan_dft_c2r_1d(a, c.data(), r.data(), flags);
      break;
    }
    case Kind::C2CF:
    case Kind::C2CB: {
      std::vector<fftw_complex> in(n0), out(n0);
      plan = fftw_plan_dft_1d(a, in.data(), out.data(),
                              kind == Kind::C2CF ? FFTW_FORWARD : FFTW_BACKWARD, flags);
      break;
    }
  }
  cache.emplace(key, plan);
  return plan;
}

fftw_complex* as_fftw(cplx* p) { return reinterpret_cast<fftw_complex*>(p); }
fftw_complex* as_fftw(const cplx* p) {
  return reinterpret_cast<fftw_complex*>(const_cast<cplx*>(p));
}

}  // namespace

RealFft2D::RealFft2D(std::size_t nx, std::size_t ny)
    : nx_(nx),
      ny_(ny),
      r2c_(cached_plan(Kind::R2C2, ny, nx)),
      c2r_(cached_plan(Kind::C2R2, ny, nx)) {}

void RealFft2D::forward(std::span<const double> in, std::span<cplx> out) const {
  fftw_execute_dft_r2c(static_cast<fftw_plan>(r2c_), const_cast<double*>(in.data()),
                       as_fftw(out.data()));
  const double scale = 1.0 / static_cast<double>(nx_ * ny_);
  for (auto& c : out) c *= scale;
}

void RealFft2D::inverse(std::span<const cplx> in, std::span<double> out) const {
  std::vector<cplx> scratch(in.begin(), in.end());
  fftw_execute_dft_c2r(static_cast<fftw_plan>(c2r_), as_fftw(scratch.data()), out.data());
}

RealFft1D::RealFft1D(std::size_t n)
    : n_(n), r2c_(cached_plan(Kind::R2C1, n, 0)), c2r_(cached_plan(Kind::C2R1, n, 0)) {}

void RealFft1D::forward(std::span<const double> in, std::span<cplx> out) const {
  fftw_execute_dft_r2c(static_cast<fftw_plan>(r2c_), const_cast<double*>(in.data()),
                       as_fftw(out.data()));
  const double scale = 1.0 / static_cast<double>(n_);
  for (auto& c : out) c *= scale;
}

void RealFft1D::inverse(std::span<const cplx> in, std::span<double> out) const {
  std::vector<cplx> scratch(in.begin(), in.end());
  fftw_execute_dft_c2r(static_cast<fftw_plan>(c2r_), as_fftw(scratch.data()), out.data());
}

ComplexFft1D::ComplexFft1D(std::size_t n)
    : n_(n), fwd_(cached_plan(Kind::C2CF, n, 0)), bwd_(cached_plan(Kind::C2CB, n, 0)) {}

void ComplexFft1D::forward(std::span<const cplx> in, std::span<cplx> out) const {
  fftw_execute_dft(static_cast<fftw_plan>(fwd_), as_fftw(in.data()), as_fftw(out.data()));
  const double scale = 1.0 / static_cast<double>(n_);
  for (auto& c : out) c *= scale;
}

void ComplexFft1D::inverse(std::span<const cplx> in, std::span<cplx> out) const {
  fftw_execute_dft(static_cast<fftw_plan>(bwd_), as_fftw(in.data()), as_fftw(out.data()));
}

}  // namespace kp2
