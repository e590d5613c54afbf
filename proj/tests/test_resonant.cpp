#include "doctest.h"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>

#include "error.hpp"
#include "resonant.hpp"
#include "soliton.hpp"

using namespace kp2;
using std::numbers::pi;

namespace {

// Least-squares slope of log(err) against log(eta).
template <class F>
double loglog_slope(F err, double lo, double hi, int n = 8) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (int i = 0; i < n; ++i) {
    const double eta = lo * std::pow(hi / lo, i / double(n - 1));
    const double x = std::log(eta), y = std::log(err(eta));
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

// integral (a - b)^2 exp(2 sign x) dx on [-40, 40]
template <class A, class B>
double weighted_l2_diff(A a, B b, double sign) {
  const ModeWindow w;
  double s = 0.0;
  for (std::size_t j = 0; j < w.n; ++j) {
    const double x = w.x(j);
    const double d = a(x) - b(x);
    s += d * d * std::exp(2.0 * sign * x);
  }
  return std::sqrt(s * w.dx());
}

}  // namespace

TEST_CASE("resonance parameters") {
  CHECK(beta(0.0) == cplx(1.0));
  CHECK(lambda_res(0.0) == cplx(0.0));
  for (double eta : {0.1, -0.1, 0.5, -0.5, 1.0, -1.0}) {
    CHECK(lambda_res(eta).real() < 0.0);
    CHECK(beta(eta).real() > 0.0);
    CHECK(std::abs(beta(eta) * beta(eta) - cplx(1.0, eta)) < 1e-14);
  }
  for (double eta = -1.0; eta <= 1.0; eta += 0.01) CHECK(beta(eta).real() - 1.0 <= eta * eta / 8.0 + 1e-14);
}

TEST_CASE("mode closed forms against finite differences") {
  const double h = 1e-4;
  for (double eta : {0.2, -0.35, 0.5}) {
    // oracle evaluated in extended precision so the stencil's roundoff stays small
    using lc = std::complex<long double>;
    const lc b = lc(beta(eta)), bs = lc(beta(-eta));
    auto e = [&](long double x) { return std::exp(-b * x) / std::cosh(x); };
    auto es = [&](long double x) { return std::exp(bs * x) / std::cosh(x); };
    double err2 = 0.0, err1 = 0.0;
    for (int i = -200; i <= 200; ++i) {
      const double x = i / 20.0;
      const long double xl = x, hl = h;
      const cplx d2 = cplx((e(xl + hl) - 2.0L * e(xl) + e(xl - hl)) / (hl * hl));
      const cplx d1 = cplx((es(xl + hl) - es(xl - hl)) / (2.0L * hl));
      err2 = std::max(err2, std::abs(mode_g(x, eta) - (-cplx(0, 1) / (2.0 * eta * beta(eta))) * d2) /
                                std::max(1.0, std::abs(mode_g(x, eta))));
      err1 = std::max(err1, std::abs(mode_gstar(x, eta) - d1) / std::max(1.0, std::abs(d1)));
    }
    CHECK(err2 < 1e-6);
    CHECK(err1 < 1e-6);
  }
  CHECK(mode_gstar(0.0, 0.0) == cplx(1.0));
  CHECK_THROWS_AS(mode_g(0.3, 0.0), InvalidArgument);
  // no overflow far out
  CHECK(std::isfinite(std::abs(mode_g(700.0, 0.3))));
  CHECK(std::isfinite(std::abs(mode_gstar(-700.0, 0.3))));
}

TEST_CASE("decay rate of g") {
  const double eta = 0.2;
  const double expected = -(1.0 + beta(eta).real());
  const double x1 = 15.0, x2 = 30.0;
  const double slope = (std::log(std::abs(mode_g(x2, eta))) - std::log(std::abs(mode_g(x1, eta)))) / (x2 - x1);
  CHECK(std::abs(slope / expected - 1.0) < 0.05);
}

TEST_CASE("symmetry in eta") {
  for (double eta : {0.05, 0.3}) {
    for (double x = -8.0; x <= 8.0; x += 0.25) {
      const cplx a = mode_g(x, eta), b = mode_g(x, -eta);
      CHECK(std::abs(a - std::conj(b)) <= 1e-12 * std::abs(a));
      const cplx c = mode_gstar(x, eta), d = mode_gstar(x, -eta);
      CHECK(std::abs(c - std::conj(d)) <= 1e-12 * std::abs(c));
    }
  }
}

TEST_CASE("zero-eta limits") {
  const auto phi2 = [](double x) { return phi(x, 2.0); };
  const auto dphi2 = [](double x) { return phi_prime(x, 2.0); };
  for (double x = -10.0; x <= 10.0; x += 0.1) {
    const auto d = duals_g12(x, 0.0);
    CHECK(std::abs(d.g2 + 0.5 * dphi2(x)) < 1e-6);
    CHECK(std::abs(d.g1 - (0.25 * dphi2(x) + 0.25 * x * dphi2(x) + 0.5 * phi2(x))) < 1e-6);
    CHECK(std::abs(d.g1s - 0.5 * phi2(x)) < 1e-12);
    CHECK(std::abs(d.g2s - phi_c_derivative_integral(x, 2.0)) < 1e-12);
    // the eta = 0 branch is the limit of the general one
    const auto n = duals_g12(x, 1e-5);
    CHECK(std::abs(n.g1 - d.g1) < 1e-6);
    CHECK(std::abs(n.g2 - d.g2) < 1e-6);
    CHECK(std::abs(n.g1s - d.g1s) < 1e-6);
    CHECK(std::abs(n.g2s - d.g2s) < 1e-6);
  }
}

TEST_CASE("small-eta expansions are second order") {
  auto field = [](int which) {
    return [which](double eta) {
      const double sign = which < 2 ? 1.0 : -1.0;
      return weighted_l2_diff(
          [&](double x) {
            const auto d = duals_g12(x, eta);
            return which == 0 ? d.g1 : which == 1 ? d.g2 : which == 2 ? d.g1s : d.g2s;
          },
          [&](double x) {
            const auto d = duals_g12(x, 0.0);
            return which == 0 ? d.g1 : which == 1 ? d.g2 : which == 2 ? d.g1s : d.g2s;
          },
          sign);
    };
  };
  for (int which = 0; which < 4; ++which) {
    CAPTURE(which);
    const double p = loglog_slope(field(which), 0.01, 0.2);
    CHECK(std::abs(p - 2.0) < 0.1);
  }
}

TEST_CASE("eigen relations") {
  for (double eta : {0.05, 0.1, 0.3, -0.3}) {
    const auto p = make_mode_pair(eta);
    CAPTURE(eta);
    CHECK(p.residual < 1e-6);
    CHECK(p.adjoint_residual < 1e-6);
    CHECK(p.certified);
    CHECK(p.g.size() == ModeWindow{}.n);
  }
  CHECK_THROWS_AS(make_mode_pair(0.0), InvalidArgument);

  SUBCASE("translation mode at eta = 0") {
    const ModeWindow w;
    std::vector<cplx> f(w.n);
    for (std::size_t j = 0; j < w.n; ++j) f[j] = phi_prime(w.x(j), 2.0);
    const auto r = apply_L_eta(f, 0.0, w);
    CHECK(weighted_norm(r, w, +1) < 1e-8);
  }
  SUBCASE("translation mode for other amplitudes") {
    // phi_c' decays like exp(-sqrt(2c) x); the weight must stay below that rate
    ModeWindow w;
    w.alpha = 0.5;
    std::vector<cplx> f(w.n);
    for (std::size_t j = 0; j < w.n; ++j) f[j] = phi_prime(w.x(j), 1.5);
    CHECK(weighted_norm(apply_L_eta(f, 0.0, w, 1.5), w, +1) < 1e-8);
  }
  SUBCASE("transpose identity for the bilinear pairing") {
    const ModeWindow w;
    std::vector<cplx> f(w.n), g(w.n);
    for (std::size_t j = 0; j < w.n; ++j) {
      const double x = w.x(j);
      f[j] = std::exp(-x * x) * cplx(1.0 + x, 0.5);
      g[j] = std::exp(-(x - 1) * (x - 1) / 2) * cplx(x * x, -1.0);
    }
    const auto lf = apply_L_eta(f, 0.4, w);
    const auto lg = apply_L_eta_adjoint(g, 0.4, w);
    cplx a = 0, b = 0;
    for (std::size_t j = 0; j < w.n; ++j) {
      a += lf[j] * g[j];
      b += f[j] * lg[j];
    }
    CHECK(std::abs(a - b) < 1e-9 * std::abs(a));
  }
  SUBCASE("undecayed input") {
    std::vector<cplx> ones(ModeWindow{}.n, 1.0);
    CHECK_THROWS_AS(apply_L_eta(ones, 0.1), TailNotDecayed);
  }
}

TEST_CASE("eta grids") {
  auto u = EtaGrid::uniform(0.5, 5);
  CHECK(u.samples.size() == 11);
  CHECK(u.samples[5] == 0.0);
  CHECK(u.samples.front() == doctest::Approx(-0.5));
  const auto g = Grid2D::make(64, 64, 10.0, 20.0 * pi);
  auto f = EtaGrid::from_grid(g, 0.5);
  CHECK(f.samples.size() == 11);
  CHECK(f.samples[6] == doctest::Approx(0.1));
  EtaGrid bad{0.5, {0.1, 0.2}};
  CHECK_THROWS_AS(bad.validate(), InvalidArgument);
}

TEST_CASE("projection onto the resonant modes") {
  const auto g = Grid2D::make(512, 128, 80.0, 160.0);
  const double sigma = 10.0;
  auto prof = [&](double y) { return std::exp(-y * y / (2 * sigma * sigma)); };

  SUBCASE("amplitude mode recovers the transverse transform") {
    auto f = Field2D::sample(g, [&](double x, double y) { return duals_g12(x, 0.0).g1 * prof(y); });
    auto p = project_P0(f, EtaGrid::uniform(0.5, 4));
    const auto& B = p.biorthogonality[4];
    const cplx a1 = p.coefficient(1, 0.0) / B[0][0];
    CHECK(std::abs(a1 - sigma) < 0.02 * sigma);
    CHECK(std::abs(p.coefficient(2, 0.0)) < 1e-6 * sigma);
    CHECK(!p.offdiagonal_flag);
    CHECK(p.coefficient(1, 0.7) == cplx(0.0));
  }
  SUBCASE("oscillatory data is invisible") {
    auto f = Field2D::sample(g, [&](double x, double y) { return std::cos(20 * x) * std::exp(-x * x / 4) * prof(y); });
    auto p = project_P0(f, EtaGrid::uniform(0.5, 4));
    for (std::size_t e = 0; e < p.a1.size(); ++e) {
      CHECK(std::abs(p.a1[e]) < 1e-6);
      CHECK(std::abs(p.a2[e]) < 1e-6);
    }
  }
  SUBCASE("band-limited combinations reconstruct") {
    const auto etas = EtaGrid::from_grid(g, 0.5);
    auto f = Field2D::sample(g, [&](double x, double y) {
      double s = 0.0;
      for (double eta : etas.samples) {
        if (std::abs(eta) > 0.25) continue;
        const auto d = duals_g12(x, eta);
        s += (std::cos(3 * eta) * d.g1 + std::sin(5 * eta + 0.3) * d.g2) * std::cos(eta * y + 0.2 * eta);
      }
      return s;
    });
    auto p = project_P0(f, etas);
    auto r = reconstruct_P0(p, g);
    double err = 0.0, peak = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) {
      err = std::max(err, std::abs(r.values()[i] - f.values()[i]));
      peak = std::max(peak, std::abs(f.values()[i]));
    }
    CHECK(err < 1e-8 * peak);
  }
}

TEST_CASE("mode table export") {
  auto path = std::filesystem::temp_directory_path() / "kp2_modes.csv";
  const std::vector<double> etas{0.0, 0.1};
  write_mode_table(path, etas, ModeWindow{}, 64);
  std::ifstream is(path);
  std::string header;
  std::getline(is, header);
  CHECK(header == "eta,x,Re g,Im g,Re g*,Im g*");
  int rows = 0;
  for (std::string line; std::getline(is, line);) ++rows;
  CHECK(rows == 64);
  std::filesystem::remove(path);
}
