#include "resonant.hpp"

#include <cmath>
#include <fstream>
#include <numbers>

#include "error.hpp"
#include "soliton.hpp"

namespace kp2 {

namespace {

constexpr cplx I{0.0, 1.0};

// exp(b x) sech x, written so that neither factor overflows.
cplx exp_sech(cplx b, double x) {
  if (x >= 0.0) return 2.0 * std::exp((b - 1.0) * x) / (1.0 + std::exp(-2.0 * x));
  return 2.0 * std::exp((b + 1.0) * x) / (1.0 + std::exp(2.0 * x));
}

}  // namespace

cplx beta(double eta) { return std::sqrt(cplx(1.0, eta)); }

cplx lambda_res(double eta) { return 4.0 * I * eta * beta(eta); }

cplx mode_g(double x, double eta) {
  if (eta == 0.0) throw InvalidArgument("g(x, eta) is singular at eta = 0; use duals_g12");
  const cplx b = beta(eta);
  const double t = std::tanh(x);
  const cplx d2 = exp_sech(-b, x) * (b * b + 2.0 * b * t + 2.0 * t * t - 1.0);
  return -I / (2.0 * eta * b) * d2;
}

cplx mode_gstar(double x, double eta) {
  const cplx b = beta(-eta);
  return exp_sech(b, x) * (b - std::tanh(x));
}

ModeDuals duals_g12(double x, double eta) {
  if (eta == 0.0) {
    const double t = std::tanh(x);
    const double ch = std::cosh(x);
    const double s = std::isfinite(ch) ? 1.0 / (ch * ch) : 0.0;
    return {s - (1.0 + x) * s * t, 2.0 * s * t, s, 0.5 * (1.0 + t + x * s)};
  }
  const cplx g = mode_g(x, eta);
  const cplx gs = mode_gstar(x, eta);
  return {2.0 * g.real(), -2.0 * eta * g.imag(), gs.real(), -gs.imag() / eta};
}

std::vector<double> ModeWindow::points() const {
  std::vector<double> out(n);
  for (std::size_t j = 0; j < n; ++j) out[j] = x(j);
  return out;
}

namespace {

void check_window(const ModeWindow& w) {
  if (!(w.half_width > 0.0) || w.n < 64 || (w.n & (w.n - 1)) != 0 || !(w.alpha > 0.0)) {
    throw InvalidArgument("mode window needs half_width > 0, power-of-two n >= 64, alpha > 0");
  }
}

// sign = +1: operator L(eta) with weight exp(alpha x); sign = -1: transpose
// with weight exp(-alpha x). In the weighted variable d becomes (ik - sign alpha).
std::vector<cplx> apply_weighted(std::span<const cplx> f, double eta, const ModeWindow& w, double c, int sign) {
  check_window(w);
  if (f.size() != w.n) throw InvalidArgument("sample count does not match the mode window");
  if (!(c > 0.0)) throw InvalidArgument("soliton amplitude must be positive");
  const std::size_t n = w.n;
  const double a = sign * w.alpha;
  std::vector<cplx> wf(n), pot(n);
  double peak = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    const double x = w.x(j);
    wf[j] = std::exp(a * x) * f[j];
    peak = std::max(peak, std::abs(wf[j]));
  }
  const double tail = std::max(std::abs(wf.front()), std::abs(wf.back()));
  if (peak > 0.0 && tail > 1e-10 * peak) throw TailNotDecayed(tail / peak);

  ComplexFft1D fft(n);
  std::vector<cplx> hat(n), out(n), tmp(n);
  fft.forward(wf, hat);
  auto symbol = [&](std::size_t j) {
    const long jj = j < n / 2 ? static_cast<long>(j) : static_cast<long>(j) - static_cast<long>(n);
    const double k = (j == n / 2) ? 0.0 : 2.0 * std::numbers::pi * static_cast<double>(jj) / (2.0 * w.half_width);
    return cplx(-a, k);
  };

  if (sign > 0) {
    // -d^3 + 2c d + 3 eta^2 d^{-1} on w, then -6 d(phi w)
    for (std::size_t j = 0; j < n; ++j) {
      const cplx D = symbol(j);
      out[j] = (-D * D * D + 2.0 * c * D + 3.0 * eta * eta / D) * hat[j];
    }
    for (std::size_t j = 0; j < n; ++j) pot[j] = phi(w.x(j), c) * wf[j];
    fft.forward(pot, tmp);
    for (std::size_t j = 0; j < n; ++j) out[j] -= 6.0 * symbol(j) * tmp[j];
  } else {
    // d^3 - 2c d - 3 eta^2 d_L^{-1} on w, then +6 phi dw
    for (std::size_t j = 0; j < n; ++j) {
      const cplx D = symbol(j);
      out[j] = (D * D * D - 2.0 * c * D - 3.0 * eta * eta / D) * hat[j];
      tmp[j] = D * hat[j];
    }
    std::vector<cplx> dw(n);
    fft.inverse(tmp, dw);
    for (std::size_t j = 0; j < n; ++j) pot[j] = phi(w.x(j), c) * dw[j];
    fft.forward(pot, tmp);
    for (std::size_t j = 0; j < n; ++j) out[j] += 6.0 * tmp[j];
  }
  std::vector<cplx> res(n);
  fft.inverse(out, res);
  for (std::size_t j = 0; j < n; ++j) res[j] *= std::exp(-a * w.x(j));
  return res;
}

}  // namespace

std::vector<cplx> apply_L_eta(std::span<const cplx> f, double eta, const ModeWindow& w, double c) {
  return apply_weighted(f, eta, w, c, +1);
}

std::vector<cplx> apply_L_eta_adjoint(std::span<const cplx> f, double eta, const ModeWindow& w, double c) {
  return apply_weighted(f, eta, w, c, -1);
}

double weighted_norm(std::span<const cplx> f, const ModeWindow& w, double sign) {
  double s = 0.0;
  for (std::size_t j = 0; j < f.size(); ++j) s += std::norm(f[j]) * std::exp(2.0 * sign * w.alpha * w.x(j));
  return std::sqrt(s * w.dx());
}

ModePair make_mode_pair(double eta, const ModeWindow& w) {
  if (eta == 0.0) throw InvalidArgument("mode pairs need eta != 0 (the eta = 0 modes are the limits in duals_g12)");
  check_window(w);
  ModePair p;
  p.eta = eta;
  p.lambda = lambda_res(eta);
  p.g.resize(w.n);
  p.g_star.resize(w.n);
  for (std::size_t j = 0; j < w.n; ++j) {
    p.g[j] = mode_g(w.x(j), eta);
    p.g_star[j] = mode_gstar(w.x(j), eta);
  }
  auto lg = apply_L_eta(p.g, eta, w);
  for (std::size_t j = 0; j < w.n; ++j) lg[j] -= p.lambda * p.g[j];
  p.residual = weighted_norm(lg, w, +1) / weighted_norm(p.g, w, +1);
  auto ls = apply_L_eta_adjoint(p.g_star, eta, w);
  const cplx lam_adj = lambda_res(-eta);
  for (std::size_t j = 0; j < w.n; ++j) ls[j] -= lam_adj * p.g_star[j];
  p.adjoint_residual = weighted_norm(ls, w, -1) / weighted_norm(p.g_star, w, -1);
  p.certified = p.residual < ModePair::tolerance && p.adjoint_residual < ModePair::tolerance;
  return p;
}

EtaGrid EtaGrid::uniform(double eta0, std::size_t half_count) {
  EtaGrid g;
  g.eta0 = eta0;
  const long h = static_cast<long>(half_count);
  for (long i = -h; i <= h; ++i) {
    g.samples.push_back(h == 0 ? 0.0 : eta0 * static_cast<double>(i) / static_cast<double>(h));
  }
  g.validate();
  return g;
}

EtaGrid EtaGrid::from_grid(const Grid2D& grid, double eta0) {
  EtaGrid g;
  g.eta0 = eta0;
  const double dk = 2.0 * std::numbers::pi / grid.ly;
  const long h = static_cast<long>(std::floor(eta0 / dk + 1e-12));
  for (long i = -h; i <= h; ++i) g.samples.push_back(dk * static_cast<double>(i));
  g.validate();
  return g;
}

void EtaGrid::validate() const {
  if (!(eta0 > 0.0)) throw InvalidArgument("eta0 must be positive");
  if (samples.empty()) throw InvalidArgument("eta grid is empty");
  bool has_zero = false;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (std::abs(samples[i]) > eta0 * (1.0 + 1e-12)) throw InvalidArgument("eta sample outside [-eta0, eta0]");
    if (std::abs(samples[i] + samples[samples.size() - 1 - i]) > 1e-12) {
      throw InvalidArgument("eta grid must be symmetric about 0");
    }
    if (samples[i] == 0.0) has_zero = true;
  }
  if (!has_zero) throw InvalidArgument("eta grid must contain 0");
}

cplx Projection::coefficient(int k, double eta) const {
  if (std::abs(eta) > etas.eta0) return 0.0;
  for (std::size_t i = 0; i < etas.samples.size(); ++i) {
    if (std::abs(etas.samples[i] - eta) < 1e-12) return k == 1 ? a1[i] : a2[i];
  }
  throw InvalidArgument("eta is not one of the projection samples");
}

Projection project_P0(const Field2D& f, const EtaGrid& etas) {
  etas.validate();
  const Grid2D& g = f.grid();
  Projection p;
  p.etas = etas;
  const std::size_t ne = etas.samples.size();
  p.a1.resize(ne);
  p.a2.resize(ne);
  p.biorthogonality.resize(ne);
  const double inv_sqrt_2pi = 1.0 / std::sqrt(2.0 * std::numbers::pi);
  std::vector<cplx> fy(g.nx);
  for (std::size_t e = 0; e < ne; ++e) {
    const double eta = etas.samples[e];
    std::fill(fy.begin(), fy.end(), cplx{});
    for (std::size_t m = 0; m < g.ny; ++m) {
      const cplx ph = std::exp(-I * eta * g.y(m)) * g.dy() * inv_sqrt_2pi;
      auto row = f.row(m);
      for (std::size_t j = 0; j < g.nx; ++j) fy[j] += row[j] * ph;
    }
    cplx a1 = 0.0, a2 = 0.0;
    std::array<std::array<double, 2>, 2> B{};
    for (std::size_t j = 0; j < g.nx; ++j) {
      const auto d = duals_g12(g.x(j), eta);
      a1 += fy[j] * d.g1s;
      a2 += fy[j] * d.g2s;
      B[0][0] += d.g1 * d.g1s;
      B[0][1] += d.g1 * d.g2s;
      B[1][0] += d.g2 * d.g1s;
      B[1][1] += d.g2 * d.g2s;
    }
    for (auto& r : B)
      for (auto& v : r) v *= g.dx();
    p.a1[e] = a1 * g.dx();
    p.a2[e] = a2 * g.dx();
    p.biorthogonality[e] = B;
    const double scale = std::sqrt(std::abs(B[0][0] * B[1][1]));
    const double off = std::max(std::abs(B[0][1]), std::abs(B[1][0])) / scale;
    p.max_offdiagonal = std::max(p.max_offdiagonal, off);
  }
  p.offdiagonal_flag = p.max_offdiagonal > 0.05;
  return p;
}

Field2D reconstruct_P0(const Projection& p, const Grid2D& grid) {
  const auto& s = p.etas.samples;
  const std::size_t ne = s.size();
  std::vector<double> weight(ne, 0.0);
  for (std::size_t e = 0; e + 1 < ne; ++e) {
    const double h = s[e + 1] - s[e];
    weight[e] += 0.5 * h;
    weight[e + 1] += 0.5 * h;
  }
  const double inv_sqrt_2pi = 1.0 / std::sqrt(2.0 * std::numbers::pi);
  std::vector<double> out(grid.size(), 0.0);
  std::vector<double> g1(grid.nx), g2(grid.nx);
  for (std::size_t e = 0; e < ne; ++e) {
    for (std::size_t j = 0; j < grid.nx; ++j) {
      const auto d = duals_g12(grid.x(j), s[e]);
      g1[j] = d.g1;
      g2[j] = d.g2;
    }
    for (std::size_t m = 0; m < grid.ny; ++m) {
      const cplx ph = std::exp(I * s[e] * grid.y(m)) * weight[e] * inv_sqrt_2pi;
      const cplx c1 = p.a1[e] * ph, c2 = p.a2[e] * ph;
      for (std::size_t j = 0; j < grid.nx; ++j) out[m * grid.nx + j] += (c1 * g1[j] + c2 * g2[j]).real();
    }
  }
  return Field2D::from_values(grid, std::move(out));
}

void write_mode_table(const std::filesystem::path& path, std::span<const double> etas, const ModeWindow& w,
                      std::size_t stride) {
  std::ofstream os(path);
  if (!os) throw IoError("cannot open " + path.string());
  os.precision(17);
  os << "eta,x,Re g,Im g,Re g*,Im g*\n";
  for (double eta : etas) {
    if (eta == 0.0) continue;  // g is singular there
    for (std::size_t j = 0; j < w.n; j += std::max<std::size_t>(stride, 1)) {
      const double x = w.x(j);
      const cplx g = mode_g(x, eta);
      const cplx gs = mode_gstar(x, eta);
      os << eta << ',' << x << ',' << g.real() << ',' << g.imag() << ',' << gs.real() << ',' << gs.imag() << '\n';
    }
  }
  if (!os) throw IoError("failed writing " + path.string());
}

}  // namespace kp2
