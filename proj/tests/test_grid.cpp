#include "doctest.h"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <cmath>
#include <filesystem>
#include <numbers>

#include "error.hpp"
#include "grid.hpp"
#include "rng.hpp"
#include "soliton.hpp"

using namespace kp2;
using std::numbers::pi;

namespace {

double max_abs_diff(const Field2D& a, const Field2D& b) {
  double e = 0.0;
  for (std::size_t i = 0; i < a.values().size(); ++i) {
    e = std::max(e, std::abs(a.values()[i] - b.values()[i]));
  }
  return e;
}

double max_abs(const Field2D& a) {
  double e = 0.0;
  for (double v : a.values()) e = std::max(e, std::abs(v));
  return e;
}

// Smooth random trigonometric field with a few low modes.
Field2D random_smooth(const Grid2D& g, std::uint64_t seed, bool zero_x_mean) {
  SplitMix64 rng(seed);
  struct Mode {
    int j, m;
    double a, ph;
  };
  std::vector<Mode> modes;
  for (int i = 0; i < 12; ++i) {
    int j = static_cast<int>(rng.next() % 6) + (zero_x_mean ? 1 : 0);
    int m = static_cast<int>(rng.next() % 9) - 4;
    modes.push_back({j, m, rng.normal(), 2.0 * pi * rng.uniform()});
  }
  return Field2D::sample(g, [&](double x, double y) {
    double s = 0.0;
    for (auto& md : modes) s += md.a * std::cos(2 * pi * md.j * x / g.lx + 2 * pi * md.m * y / g.ly + md.ph);
    return s;
  });
}

}  // namespace

TEST_CASE("grid validation") {
  CHECK_THROWS_AS(Grid2D::make(63, 64, 1, 1), InvalidArgument);
  CHECK_THROWS_AS(Grid2D::make(96, 64, 1, 1), InvalidArgument);
  CHECK_THROWS_AS(Grid2D::make(64, 64, 0, 1), InvalidArgument);
  const auto g = Grid2D::make(64, 128, 10, 20);
  CHECK(g.kx(0) == 0.0);
  CHECK(g.ky(0) == 0.0);
  CHECK(g.ky_index(127) == -1);
  CHECK(g.ky_index(64) == -64);
  CHECK(g.x(32) == 0.0);
  CHECK(g.y(64) == 0.0);
}

TEST_CASE("spectral derivative") {
  const auto g = Grid2D::make(128, 64, 20.0, 10.0);

  SUBCASE("zero order is identity") {
    auto f = random_smooth(g, 1, false);
    CHECK(max_abs_diff(spectral_derivative(f, 0, 0), f) == 0.0);
  }
  SUBCASE("single mode") {
    auto f = Field2D::sample(g, [&](double x, double) { return std::sin(2 * pi * x / g.lx); });
    auto exact = Field2D::sample(g, [&](double x, double) { return 2 * pi / g.lx * std::cos(2 * pi * x / g.lx); });
    CHECK(max_abs_diff(spectral_derivative(f, 1, 0), exact) < 1e-10);
  }
  SUBCASE("soliton second derivative against the closed form") {
    const auto gs = Grid2D::make(512, 64, 80.0, 10.0);
    auto f = soliton_field(gs, 2.0);
    auto d2 = spectral_derivative(f, 2, 0);
    double err = 0.0;
    for (std::size_t j = 0; j < gs.nx; ++j) {
      const double x = gs.x(j);
      if (std::abs(x) > 30.0) continue;
      err = std::max(err, std::abs(d2.at(j, 3) - phi_second(x, 2.0)));
    }
    CHECK(err < 1e-8);
  }
  SUBCASE("negative order rejected") { CHECK_THROWS_AS(spectral_derivative(Field2D(g), -1, 0), InvalidArgument); }
}

TEST_CASE("antiderivative in x") {
  const auto g = Grid2D::make(128, 64, 20.0, 10.0);

  SUBCASE("inverse pair on zero-mean fields") {
    auto f = random_smooth(g, 7, true);
    CHECK(max_abs_diff(spectral_derivative(antiderivative_x(f), 1, 0), f) < 1e-10);
  }
  SUBCASE("single cosine mode") {
    const double k = 2 * pi * 3 / g.lx;
    auto f = Field2D::sample(g, [&](double x, double) { return std::cos(k * x); });
    auto exact = Field2D::sample(g, [&](double x, double) { return std::sin(k * x) / k; });
    CHECK(max_abs_diff(antiderivative_x(f), exact) < 1e-12);
  }
  SUBCASE("removes the x-mean of each line") {
    auto f = random_smooth(g, 11, false);
    auto back = antiderivative_x(spectral_derivative(f, 1, 0));
    // f minus its per-line mean
    std::vector<double> expect(f.values().begin(), f.values().end());
    for (std::size_t m = 0; m < g.ny; ++m) {
      double mean = 0.0;
      for (double v : f.row(m)) mean += v;
      mean /= static_cast<double>(g.nx);
      for (std::size_t j = 0; j < g.nx; ++j) expect[m * g.nx + j] -= mean;
    }
    CHECK(max_abs_diff(back, Field2D::from_values(g, expect)) < 1e-10);
  }
  SUBCASE("constant-in-x line is rejected") {
    auto f = Field2D::sample(g, [&](double, double y) { return std::cos(2 * pi * y / g.ly); });
    CHECK_THROWS_AS(antiderivative_x(f), NonzeroXMean);
    try {
      antiderivative_x(f);
    } catch (const NonzeroXMean& e) {
      CHECK(e.magnitude() == doctest::Approx(0.5).epsilon(1e-12));
    }
  }
}

TEST_CASE("dealiasing") {
  const auto g = Grid2D::make(64, 64, 2 * pi, 2 * pi);
  SUBCASE("band-limited field unchanged") {
    auto f = Field2D::sample(g, [](double x, double y) { return std::cos(5 * x) * std::sin(7 * y) + std::sin(21 * x); });
    CHECK(max_abs_diff(dealias(f), f) < 1e-13);
  }
  SUBCASE("Nyquist mode removed") {
    auto f = Field2D::sample(g, [](double x, double) { return std::cos(32 * x); });
    CHECK(max_abs(dealias(f)) < 1e-13);
  }
  SUBCASE("white noise loses energy") {
    SplitMix64 rng(3);
    std::vector<double> v(g.size());
    for (auto& x : v) x = rng.normal();
    auto f = Field2D::from_values(g, v);
    const double before = l2_quadrature(f);
    const double after = l2_quadrature(dealias(f));
    CHECK(after < before);
    // Parseval on the zeroed set
    double removed = 0.0;
    auto s = f.spectrum();
    for (std::size_t m = 0; m < g.ny; ++m)
      for (std::size_t j = 0; j < g.nkx(); ++j)
        if (!dealias_keep(g, j, m)) removed += ((j == 0 || j == g.nx / 2) ? 1.0 : 2.0) * std::norm(s[m * g.nkx() + j]);
    CHECK(before - after == doctest::Approx(removed * g.lx * g.ly).epsilon(1e-10));
  }
}

TEST_CASE("integral functionals") {
  SUBCASE("zero field") {
    const auto g = Grid2D::make(64, 64, 10, 10);
    auto r = energy_density_integrals(Field2D(g));
    CHECK(r.l2 == 0.0);
    CHECK(r.energy == 0.0);
    CHECK(r.hamiltonian == 0.0);
  }
  SUBCASE("single sine mode") {
    const auto g = Grid2D::make(64, 64, 10, 7);
    auto f = Field2D::sample(g, [&](double x, double) { return std::sin(2 * pi * x / g.lx); });
    CHECK(energy_density_integrals(f).l2 == doctest::Approx(g.lx * g.ly / 2).epsilon(1e-13));
  }
  SUBCASE("soliton line against 1-D adaptive quadrature") {
    using boost::math::quadrature::gauss_kronrod;
    const double c = 2.0;
    const double line = gauss_kronrod<double, 61>::integrate(
        [&](double x) { return phi(x, c) * phi(x, c); }, -40.0, 40.0, 20, 1e-14);
    const double grad = gauss_kronrod<double, 61>::integrate(
        [&](double x) { return phi_prime(x, c) * phi_prime(x, c); }, -40.0, 40.0, 20, 1e-14);
    const double cubic = gauss_kronrod<double, 61>::integrate(
        [&](double x) { return std::pow(phi(x, c), 3); }, -40.0, 40.0, 20, 1e-14);
    const auto g = Grid2D::make(512, 64, 80.0, 16.0);
    auto r = energy_density_integrals(soliton_field(g, c));
    CHECK(r.l2 == doctest::Approx(line * g.ly).epsilon(1e-10));
    CHECK(r.energy == doctest::Approx((line + grad) * g.ly).epsilon(1e-10));
    CHECK(r.hamiltonian == doctest::Approx(0.5 * (grad - 2 * cubic) * g.ly).epsilon(1e-10));
    CHECK(line == doctest::Approx(16.0 / 3.0).epsilon(1e-12));
  }
}

TEST_CASE("round trip and Parseval on random fields") {
  const auto g = Grid2D::make(128, 64, 13.0, 5.0);
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    SplitMix64 rng(seed);
    std::vector<double> v(g.size());
    for (auto& x : v) x = rng.normal();
    auto f = Field2D::from_values(g, v);
    auto back = Field2D::from_spectrum(g, std::vector<cplx>(f.spectrum().begin(), f.spectrum().end()));
    CHECK(max_abs_diff(back, f) < 1e-12 * max_abs(f));
    CHECK(l2_spectral(f) == doctest::Approx(l2_quadrature(f)).epsilon(1e-10));
  }
}

TEST_CASE("snapshot format") {
  const auto g = Grid2D::make(64, 128, 3.5, 7.25);
  auto f = random_smooth(g, 5, false);
  auto path = std::filesystem::temp_directory_path() / "kp2_snapshot_test.bin";
  write_snapshot(path, f);
  CHECK(std::filesystem::file_size(path) == 32 + 8 * g.size());
  auto r = read_snapshot(path);
  CHECK(r.grid() == g);
  CHECK(std::equal(r.values().begin(), r.values().end(), f.values().begin()));
  std::filesystem::remove(path);
  CHECK_THROWS_AS(read_snapshot(path), IoError);
}
