#include "doctest.h"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <cmath>
#include <numbers>

#include "error.hpp"
#include "grid.hpp"
#include "rng.hpp"
#include "soliton.hpp"

using namespace kp2;
using boost::math::quadrature::gauss_kronrod;

namespace {

template <class F>
double quad(F f, double a, double b) {
  return gauss_kronrod<double, 61>::integrate(f, a, b, 25, 1e-14);
}

}  // namespace

TEST_CASE("soliton closed forms") {
  CHECK(phi(0.0, 2.0) == 2.0);
  CHECK(phi(0.0, 1.3) == 1.3);
  CHECK(phi(1e4, 2.0) == 0.0);

  for (double c : {1.2, 2.0, 2.7}) {
    CAPTURE(c);
    CHECK(quad([&](double x) { return phi(x, c); }, -80, 80) ==
          doctest::Approx(phi_mass(c)).epsilon(1e-10));
    CHECK(phi_mass(c) == doctest::Approx(2 * std::sqrt(2 * c)).epsilon(1e-15));
  }
}

TEST_CASE("amplitude derivatives against finite differences") {
  const double h = 1e-5;
  for (double c : {1.5, 2.0, 2.4}) {
    for (double x : {-3.0, -0.7, 0.0, 0.4, 2.5}) {
      CAPTURE(c);
      CAPTURE(x);
      const double fd1 = (phi(x, c + h) - phi(x, c - h)) / (2 * h);
      CHECK(std::abs(phi_c_derivative(x, c) - fd1) < 1e-8);
      const double fd2 = (phi_c_derivative(x, c + h) - phi_c_derivative(x, c - h)) / (2 * h);
      CHECK(std::abs(phi_c2_derivative(x, c) - fd2) < 1e-8);
    }
  }
}

TEST_CASE("x derivatives against finite differences") {
  const double h = 1e-4;
  for (double c : {1.5, 2.0}) {
    for (double x : {-2.0, -0.3, 0.0, 0.9, 3.1}) {
      auto fd = [&](auto f) { return (f(x - 2 * h) - 8 * f(x - h) + 8 * f(x + h) - f(x + 2 * h)) / (12 * h); };
      CHECK(phi_prime(x, c) == doctest::Approx(fd([&](double s) { return phi(s, c); })).epsilon(1e-9));
      CHECK(std::abs(phi_second(x, c) - fd([&](double s) { return phi_prime(s, c); })) < 1e-9);
      CHECK(std::abs(phi_third(x, c) - fd([&](double s) { return phi_second(s, c); })) < 1e-9);
    }
  }
}

TEST_CASE("running integral of the amplitude derivative") {
  for (double c : {1.6, 2.0}) {
    for (double x : {-5.0, -1.0, 0.0, 2.0, 7.0}) {
      const double q = quad([&](double s) { return phi_c_derivative(s, c); }, -60.0, x);
      CHECK(std::abs(phi_c_derivative_integral(x, c) - q) < 1e-10);
    }
    // total equals d/dc of the mass
    CHECK(phi_c_derivative_integral(60.0, c) == doctest::Approx(std::sqrt(2.0 / c)).epsilon(1e-12));
  }
}

TEST_CASE("traveling-wave ODE residual") {
  for (double c : {1.0, 2.0, 2.9}) {
    double worst = 0.0;
    for (double x = -15.0; x <= 15.0; x += 0.01) {
      const double r = -2 * c * phi_prime(x, c) + phi_third(x, c) + 6 * phi(x, c) * phi_prime(x, c);
      worst = std::max(worst, std::abs(r));
    }
    CHECK(worst < 1e-8);
  }
}

TEST_CASE("mass-correcting bump") {
  for (auto kind : {BumpKind::Smooth, BumpKind::Cosine}) {
    CHECK(quad([&](double x) { return bump(x, kind); }, -1, 1) == doctest::Approx(1.0).epsilon(1e-12));
    for (double x = -1.0; x <= 1.0; x += 0.1) CHECK(psi_cL(x, 2.0, 0.5, kind) == 0.0);
    for (double c : {1.7, 2.3}) {
      const double L = 3.0;
      const double lhs = quad([&](double x) { return psi_cL(x, c, L, kind); }, -L - 1, -L + 1);
      const double rhs = quad([&](double x) { return phi(x, c) - phi(x, 2.0); }, -80, 80);
      CHECK(std::abs(lhs - rhs) < 1e-8);
      CHECK(lhs == doctest::Approx(2 * std::sqrt(2 * c) - 4).epsilon(1e-10));
      for (double x : {-L - 1.0, -L + 1.0, -L - 1.5, 0.0, 10.0}) CHECK(psi_cL(x, c, L, kind) == 0.0);
      const double h = 1e-6;
      const double fd = (psi_cL(-L + 0.3, c + h, L, kind) - psi_cL(-L + 0.3, c - h, L, kind)) / (2 * h);
      CHECK(std::abs(psi_cL_c_derivative(-L + 0.3, c, L, kind) - fd) < 1e-8);
    }
    for (double x : {-0.6, 0.1, 0.8}) {
      const double h = 1e-5;
      const double fd = (bump(x + h, kind) - bump(x - h, kind)) / (2 * h);
      CHECK(std::abs(bump_prime(x, kind) - fd) < 1e-7);
    }
  }
  SolitonParams bad{0.0, 0.0, 0.0};
  CHECK_THROWS_AS(bad.validate(), InvalidArgument);
  SolitonParams bad_l{2.0, 0.0, -1.0};
  CHECK_THROWS_AS(bad_l.validate(), InvalidArgument);
}

TEST_CASE("periodic wrap and soliton placement") {
  CHECK(wrap_periodic(0.0, 10.0) == 0.0);
  CHECK(wrap_periodic(6.0, 10.0) == doctest::Approx(-4.0));
  CHECK(wrap_periodic(-5.0, 10.0) == doctest::Approx(-5.0));
  CHECK(wrap_periodic(14.0, 10.0) == doctest::Approx(4.0));
  CHECK(min_window_for(2.0) == doctest::Approx(30.0));

  const auto small = Grid2D::make(256, 64, 20.0, 10.0);
  CHECK_THROWS_AS(soliton_field(small, 2.0), InvalidArgument);
  const auto g = Grid2D::make(256, 64, 40.0, 10.0);
  auto f = soliton_field(g, 2.0, 3.125);
  // boundary tail
  CHECK(std::abs(f.at(0, 0)) < 1e-12);
  std::size_t jmax = 0;
  for (std::size_t j = 0; j < g.nx; ++j)
    if (f.at(j, 5) > f.at(jmax, 5)) jmax = j;
  CHECK(g.x(jmax) == doctest::Approx(3.125).epsilon(1e-12));
}

TEST_CASE("initial decomposition") {
  const auto g = Grid2D::make(512, 64, 80.0, 20.0);

  SUBCASE("zero perturbation") {
    auto d = initial_decomposition(Field2D(g), 2.0);
    for (double c : d.c1) CHECK(c == doctest::Approx(2.0).epsilon(1e-15));
    for (double v : d.v_star.values()) CHECK(std::abs(v) < 1e-15);
  }
  SUBCASE("pure amplitude shift") {
    auto v0 = Field2D::sample(g, [](double x, double) { return phi(x, 2.1) - phi(x, 2.0); });
    auto d = initial_decomposition(v0, 2.0);
    for (double c : d.c1) CHECK(std::abs(c - 2.1) < 1e-9);
    for (double v : d.v_star.values()) CHECK(std::abs(v) < 1e-9);
  }
  SUBCASE("zero-mean input passes through") {
    auto v0 = Field2D::sample(g, [](double x, double y) {
      return -2 * (x - 1) * std::exp(-(x - 1) * (x - 1) - y * y / 9);
    });
    auto d = initial_decomposition(v0, 2.0);
    for (double c : d.c1) CHECK(std::abs(c - 2.0) < 1e-12);
    double err = 0;
    for (std::size_t i = 0; i < g.size(); ++i) err = std::max(err, std::abs(d.v_star.values()[i] - v0.values()[i]));
    CHECK(err < 1e-12);
  }
  SUBCASE("collapse") {
    auto v0 = Field2D::sample(g, [](double x, double) { return -3.0 * std::exp(-x * x); });
    CHECK_THROWS_AS(initial_decomposition(v0, 2.0), AmplitudeCollapse);
  }
  SUBCASE("zero line mean for random localized data") {
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
      SplitMix64 rng(seed);
      const double a = 0.3 * rng.normal(), x0 = 4 * rng.normal(), w = 0.5 + rng.uniform();
      const double b = 0.3 * rng.normal(), y0 = 3 * rng.normal();
      auto v0 = Field2D::sample(g, [&](double x, double y) {
        const double s = (x - x0) / w;
        return a * std::exp(-s * s - (y - y0) * (y - y0) / 16) + b * s * std::exp(-s * s);
      });
      auto d = initial_decomposition(v0, 2.0);
      double worst = 0.0;
      for (std::size_t m = 0; m < g.ny; ++m) {
        double mean = 0.0;
        for (double v : d.v_star.row(m)) mean += v;
        worst = std::max(worst, std::abs(mean * g.dx()));
      }
      CHECK(worst < 1e-8);
    }
  }
}
