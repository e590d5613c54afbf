#include "soliton.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <cmath>
#include <numbers>

#include "error.hpp"

namespace kp2 {

void SolitonParams::validate() const {
  if (!(c > 0.0)) throw InvalidArgument("soliton amplitude must be positive");
  if (!(L >= 0.0)) throw InvalidArgument("bump offset must be non-negative");
}

namespace {

struct SechTanh {
  double s;  // sech^2
  double t;  // tanh
};

SechTanh sech_tanh(double a) {
  const double ch = std::cosh(a);
  const double sech = std::isfinite(ch) ? 1.0 / ch : 0.0;
  return {sech * sech, std::tanh(a)};
}

double kappa(double c) { return std::sqrt(0.5 * c); }

}  // namespace

double phi(double x, double c) {
  const auto [s, t] = sech_tanh(kappa(c) * x);
  return c * s;
}

double phi_prime(double x, double c) {
  const double k = kappa(c);
  const auto [s, t] = sech_tanh(k * x);
  return -2.0 * c * k * s * t;
}

double phi_second(double x, double c) {
  const double k = kappa(c);
  const auto [s, t] = sech_tanh(k * x);
  return 2.0 * c * k * k * s * (2.0 - 3.0 * s);
}

double phi_third(double x, double c) {
  const double k = kappa(c);
  const auto [s, t] = sech_tanh(k * x);
  return 8.0 * c * k * k * k * s * t * (3.0 * s - 1.0);
}

double phi_c_derivative(double x, double c) {
  const double th = kappa(c) * x;
  const auto [s, t] = sech_tanh(th);
  return s * (1.0 - th * t);
}

double phi_c2_derivative(double x, double c) {
  const double th = kappa(c) * x;
  const auto [s, t] = sech_tanh(th);
  const double dF = -3.0 * s * t + th * s * (2.0 * t * t - s);
  return dF * th / (2.0 * c);
}

double phi_c_derivative_integral(double x, double c) {
  const double k = kappa(c);
  const auto [s, t] = sech_tanh(k * x);
  return (t + 1.0) / (2.0 * k) + 0.5 * x * s;
}

double phi_mass(double c) { return 2.0 * std::sqrt(2.0 * c); }

namespace {

double smooth_bump_raw(double x) {
  if (std::abs(x) >= 1.0) return 0.0;
  return std::exp(-1.0 / (1.0 - x * x));
}

double smooth_bump_norm() {
  static const double norm = [] {
    using boost::math::quadrature::gauss_kronrod;
    const double mass = gauss_kronrod<double, 61>::integrate(smooth_bump_raw, -1.0, 1.0, 15, 1e-15);
    return 1.0 / mass;
  }();
  return norm;
}

}  // namespace

double bump(double x, BumpKind kind) {
  if (std::abs(x) >= 1.0) return 0.0;
  switch (kind) {
    case BumpKind::Smooth:
      return smooth_bump_norm() * smooth_bump_raw(x);
    case BumpKind::Cosine:
      return 0.5 * (1.0 + std::cos(std::numbers::pi * x));
  }
  return 0.0;
}

double bump_prime(double x, BumpKind kind) {
  if (std::abs(x) >= 1.0) return 0.0;
  switch (kind) {
    case BumpKind::Smooth: {
      const double q = 1.0 - x * x;
      return smooth_bump_norm() * smooth_bump_raw(x) * (-2.0 * x / (q * q));
    }
    case BumpKind::Cosine:
      return -0.5 * std::numbers::pi * std::sin(std::numbers::pi * x);
  }
  return 0.0;
}

double psi_cL(double x, double c, double L, BumpKind kind) {
  return 2.0 * (std::sqrt(2.0 * c) - 2.0) * bump(x + L, kind);
}

double psi_cL_c_derivative(double x, double c, double L, BumpKind kind) {
  return std::sqrt(2.0 / c) * bump(x + L, kind);
}

double wrap_periodic(double x, double period) {
  double r = std::fmod(x + 0.5 * period, period);
  if (r < 0.0) r += period;
  return r - 0.5 * period;
}

double min_window_for(double c) { return 30.0 / kappa(c); }

Field2D soliton_field(const Grid2D& grid, double c, double x0) {
  if (!(c > 0.0)) throw InvalidArgument("soliton amplitude must be positive");
  if (grid.lx < min_window_for(c)) {
    throw InvalidArgument("x-window too short for the soliton tails (need Lx >= " +
                          std::to_string(min_window_for(c)) + ")");
  }
  std::vector<double> line(grid.nx);
  for (std::size_t j = 0; j < grid.nx; ++j) line[j] = phi(wrap_periodic(grid.x(j) - x0, grid.lx), c);
  std::vector<double> v(grid.size());
  for (std::size_t m = 0; m < grid.ny; ++m) std::copy(line.begin(), line.end(), v.begin() + m * grid.nx);
  return Field2D::from_values(grid, std::move(v));
}

InitialDecomposition initial_decomposition(const Field2D& v0, double c0) {
  if (!(c0 > 0.0)) throw InvalidArgument("c0 must be positive");
  const Grid2D& g = v0.grid();
  InitialDecomposition out;
  out.c1.resize(g.ny);
  std::vector<double> vs(v0.values().begin(), v0.values().end());
  const double root0 = std::sqrt(c0);
  for (std::size_t m = 0; m < g.ny; ++m) {
    double mass = 0.0;
    for (double v : v0.row(m)) mass += v;
    mass *= g.dx();
    const double root = root0 + mass / (2.0 * std::numbers::sqrt2);
    if (!(root > 0.0)) throw AmplitudeCollapse(root > 0.0 ? root * root : -root * root);
    const double c1 = root * root;
    out.c1[m] = c1;
    for (std::size_t j = 0; j < g.nx; ++j) {
      const double x = g.x(j);
      vs[m * g.nx + j] += phi(x, c0) - phi(x, c1);
    }
  }
  out.v_star = Field2D::from_values(g, std::move(vs));
  return out;
}

}  // namespace kp2
