#include "modulation.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>

#include <boost/math/distributions/students_t.hpp>

#include "error.hpp"

namespace kp2 {

namespace {

constexpr double pi = std::numbers::pi;

// sin(x) / x
double sinc(double x) {
  if (std::abs(x) < 1e-4) return 1.0 - x * x / 6.0;
  return std::sin(x) / x;
}

// Signed FFT frequency 2 pi k' / L for index k of an n-point transform.
double freq(std::size_t k, std::size_t n, double length) {
  const double kk = k < n / 2 ? static_cast<double>(k) : static_cast<double>(k) - static_cast<double>(n);
  return 2.0 * pi * kk / length;
}

std::size_t next_pow2(double v) {
  std::size_t n = 1;
  while (static_cast<double>(n) < v) n <<= 1;
  return n;
}

}  // namespace

double ModulationConstants::chi1(double eta) const {
  const double a = std::abs(eta);
  const double lo = 0.5 * eta0, hi = 0.75 * eta0;
  if (a <= lo) return 1.0;
  if (a >= hi) return 0.0;
  const double s = (hi - a) / (hi - lo);  // 1 at lo, 0 at hi
  if (cutoff == CutoffKind::Quintic) return s * s * s * (10.0 + s * (-15.0 + 6.0 * s));
  const double p = std::exp(-1.0 / s), q = std::exp(-1.0 / (1.0 - s));
  return p / (p + q);
}

void ModulationConstants::validate() const {
  if (!(eta0 > 0.0) || !std::isfinite(eta0)) throw InvalidArgument("eta0 must be positive");
  if (!std::isfinite(mu3) || 8.0 * mu3 - 1.0 <= 0.0) throw InvalidArgument("mu3 must exceed 1/8");
}

double omega(double eta, const ModulationConstants& k) {
  return std::sqrt(16.0 + (8.0 * k.mu3 - 1.0) * eta * eta);
}

double omega_tilde(double eta, const ModulationConstants& k) {
  const double b = (8.0 * k.mu3 - 1.0) * eta * eta;
  return b / (omega(eta, k) + 4.0);
}

Mat2 A_star(double eta, const ModulationConstants& k) {
  const double e2 = eta * eta;
  return {{{-3.0 * e2, -8.0 * e2}, {2.0 + k.mu3 * e2, -e2}}};
}

CMat2 P_star(double eta, const ModulationConstants& k) {
  if (std::abs(eta) < 1e-12) throw SingularP(eta);
  const double w = omega(eta, k);
  const double s = 1.0 / (4.0 * eta);
  return {{{cplx(8.0 * eta * s), cplx(8.0 * eta * s)},
           {cplx(-eta, -w) * s, cplx(-eta, w) * s}}};
}

std::array<cplx, 2> lambda_star(double eta, const ModulationConstants& k) {
  const double w = omega(eta, k);
  return {cplx(-2.0 * eta * eta, eta * w), cplx(-2.0 * eta * eta, -eta * w)};
}

Mat2 exp_tA(double eta, double t, const ModulationConstants& k) {
  const double w = omega(eta, k);
  const double theta = t * eta * w;
  const double c = std::cos(theta);
  const double sw = t * sinc(theta);  // sin(theta) / (eta omega)
  const double d = std::exp(-2.0 * t * eta * eta);
  Mat2 a = A_star(eta, k);
  const double shift = 2.0 * eta * eta;
  return {{{d * (c + sw * (a[0][0] + shift)), d * sw * a[0][1]},
           {d * sw * a[1][0], d * (c + sw * (a[1][1] + shift))}}};
}

Mat2 matmul(const Mat2& a, const Mat2& b) {
  Mat2 r{};
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) r[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
  return r;
}

double operator_norm(const Mat2& m) {
  // largest singular value from the eigenvalues of m^T m
  const double p = m[0][0] * m[0][0] + m[1][0] * m[1][0];
  const double q = m[0][1] * m[0][1] + m[1][1] * m[1][1];
  const double r = m[0][0] * m[0][1] + m[1][0] * m[1][1];
  const double tr = p + q, det = p * q - r * r;
  return std::sqrt(0.5 * tr + std::sqrt(std::max(0.0, 0.25 * tr * tr - det)));
}

double KernelTable::l1() const {
  double s = 0.0;
  for (double v : values) s += std::abs(v);
  return s * dy;
}

double KernelTable::l2() const {
  double s = 0.0;
  for (double v : values) s += v * v;
  return std::sqrt(s * dy);
}

double KernelTable::linf() const {
  double s = 0.0;
  for (double v : values) s = std::max(s, std::abs(v));
  return s;
}

double KernelTable::value_at(double yy) const {
  const std::size_t n = symbol.size();
  const double length = dy * static_cast<double>(n);
  cplx s = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    if (symbol[k] == cplx{}) continue;
    s += symbol[k] * std::exp(cplx(0.0, freq(k, n, length) * yy));
  }
  return s.real() / length;
}

namespace {

using SymbolFn = std::function<cplx(double)>;

KernelTable make_table(std::size_t n, double length, const SymbolFn& m, const ComplexFft1D& fft) {
  KernelTable tab;
  tab.dy = length / static_cast<double>(n);
  tab.symbol.resize(n);
  std::vector<cplx> coeff(n), out(n);
  for (std::size_t k = 0; k < n; ++k) {
    if (k == n / 2) continue;  // band-limited, Nyquist left empty
    const double eta = freq(k, n, length);
    tab.symbol[k] = m(eta);
    // y_j = (j - n/2) dy shifts the phase by (-1)^k
    coeff[k] = tab.symbol[k] * ((k % 2) ? -1.0 : 1.0) / length;
  }
  fft.inverse(coeff, out);
  tab.y.resize(n);
  tab.values.resize(n);
  for (std::size_t j = 0; j < n; ++j) {
    tab.y[j] = (static_cast<double>(j) - static_cast<double>(n / 2)) * tab.dy;
    tab.values[j] = out[j].real();
  }
  return tab;
}

KernelNorms norms_of(const KernelTable& t) { return {t.l1(), t.l2(), t.linf()}; }

KernelSample sample_kernels(double t, const ModulationConstants& k, std::size_t n, double length) {
  ComplexFft1D fft(n);
  auto damp = [&](double eta) { return k.chi1(eta) * std::exp(-2.0 * t * eta * eta); };
  KernelSample s;
  s.t = t;
  s.points = n;
  s.length = length;
  s.K1 = make_table(n, length, [&](double e) { return cplx(damp(e) * std::cos(t * e * omega(e, k))); }, fft);
  s.K2 = make_table(
      n, length,
      [&](double e) {
        const double w = omega(e, k);
        return cplx(damp(e) * (e / w) * std::sin(t * e * w));
      },
      fft);
  s.K3 = make_table(
      n, length,
      [&](double e) {
        const double w = omega(e, k);
        return cplx(damp(e) * w * w * t * sinc(t * e * w));
      },
      fft);
  s.dyK3 = make_table(
      n, length,
      [&](double e) {
        const double w = omega(e, k);
        return cplx(0.0, damp(e) * w * std::sin(t * e * w));
      },
      fft);
  for (int sign : {1, -1}) {
    auto tab = make_table(
        n, length,
        [&](double e) {
          return 0.5 * damp(e) * std::exp(cplx(0.0, -sign * e * omega_tilde(e, k) * t));
        },
        fft);
    (sign > 0 ? s.K1p : s.K1m) = std::move(tab);
  }
  s.K31 = make_table(
      n, length, [&](double e) { return cplx(0.5 * damp(e) * omega(e, k) * std::cos(t * e * omega_tilde(e, k))); },
      fft);
  s.K32 = make_table(
      n, length,
      [&](double e) {
        const double wt = omega_tilde(e, k);
        return cplx(0.5 * damp(e) * omega(e, k) * t * wt * sinc(t * e * wt));
      },
      fft);
  s.n1 = norms_of(s.K1);
  s.n2 = norms_of(s.K2);
  s.n3 = norms_of(s.K3);
  s.n3y = norms_of(s.dyK3);
  return s;
}

double max_rel_change(const KernelSample& a, const KernelSample& b) {
  double r = 0.0;
  auto cmp = [&](const KernelNorms& x, const KernelNorms& y) {
    for (auto [u, v] : {std::pair{x.l1, y.l1}, std::pair{x.l2, y.l2}, std::pair{x.linf, y.linf}}) {
      r = std::max(r, std::abs(u - v) / std::max(std::abs(v), 1e-300));
    }
  };
  cmp(a.n1, b.n1);
  cmp(a.n2, b.n2);
  cmp(a.n3, b.n3);
  cmp(a.n3y, b.n3y);
  return r;
}

}  // namespace

KernelSample kernels_at(double t, const ModulationConstants& k, const KernelOptions& opt) {
  k.validate();
  if (!(t >= 0.0) || !std::isfinite(t)) throw InvalidArgument("kernel time must be non-negative");
  const double eta_max = 0.75 * k.eta0;
  // power-of-two spacing so that shifts by 4t land on grid points for integer t
  double dy = std::exp2(std::floor(std::log2(pi / (4.0 * eta_max))));
  double length = std::max({256.0, opt.points_per_period * t * omega(eta_max, k), 8.0 * t + 40.0 * std::sqrt(t) + 64.0});
  std::size_t n = next_pow2(length / dy);
  length = static_cast<double>(n) * dy;
  if (n > opt.max_points) throw ResolutionExceeded("kernel grid exceeds max_points before refinement");
  KernelSample prev = sample_kernels(t, k, n, length);
  while (true) {
    if (4 * n > opt.max_points) {
      throw ResolutionExceeded("kernel norms did not settle within max_points = " + std::to_string(opt.max_points));
    }
    // halve dy and double the window
    KernelSample next = sample_kernels(t, k, 4 * n, 2.0 * length);
    const double change = max_rel_change(next, prev);
    n *= 4;
    length *= 2.0;
    prev = std::move(next);
    if (change < opt.rel_tol) return prev;
  }
}

SlopeFit decay_exponent_fit(std::span<const double> t, std::span<const double> values) {
  if (t.size() != values.size()) throw InvalidArgument("time and value arrays differ in length");
  if (t.size() < 3) throw InvalidArgument("slope fit needs at least three samples");
  const std::size_t n = t.size();
  std::vector<double> x(n), y(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (!(t[i] > 0.0) || !(values[i] > 0.0) || !std::isfinite(values[i])) {
      throw InvalidArgument("slope fit needs positive finite samples");
    }
    x[i] = std::log(t[i]);
    y[i] = std::log(values[i]);
  }
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (sxx <= 0.0) throw InvalidArgument("slope fit needs distinct times");
  SlopeFit f;
  f.samples = n;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  double rss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = y[i] - f.intercept - f.slope * x[i];
    rss += r * r;
  }
  const double dof = static_cast<double>(n - 2);
  f.stderr_ = std::sqrt(rss / dof / sxx);
  const boost::math::students_t dist(dof);
  const double q = boost::math::quantile(dist, 0.975);
  f.ci_lo = f.slope - q * f.stderr_;
  f.ci_hi = f.slope + q * f.stderr_;
  return f;
}

double heat_H(double t, double y) {
  if (!(t > 0.0)) throw InvalidArgument("heat kernel needs t > 0");
  return std::exp(-y * y / (4.0 * t)) / std::sqrt(4.0 * pi * t);
}

double box_W(double t, double y) { return std::abs(y) <= t ? 0.5 : 0.0; }

ProfilePair make_profile_pair(std::size_t n, double ly, const std::function<cplx(double)>& f1_hat,
                              const std::function<cplx(double)>& f2_hat, double cutoff) {
  if (n < 8 || (n & (n - 1)) != 0) throw InvalidArgument("profile size must be a power of two >= 8");
  if (!(ly > 0.0)) throw InvalidArgument("profile window must be positive");
  ComplexFft1D fft(n);
  // unitary transform: f(y) = (2 pi)^{-1/2} int f_hat e^{i y eta} d eta ~ sqrt(2 pi) / L sum
  const double scale = std::sqrt(2.0 * pi) / ly;
  ProfilePair p;
  p.ly = ly;
  for (int which = 0; which < 2; ++which) {
    const auto& fh = which == 0 ? f1_hat : f2_hat;
    std::vector<cplx> c(n), out(n);
    for (std::size_t k = 0; k < n; ++k) {
      if (k == n / 2) continue;
      const double eta = freq(k, n, ly);
      if (std::abs(eta) > cutoff) continue;
      c[k] = fh(eta) * scale * ((k % 2) ? -1.0 : 1.0);
    }
    fft.inverse(c, out);
    auto& dst = which == 0 ? p.f1 : p.f2;
    dst.resize(n);
    for (std::size_t j = 0; j < n; ++j) dst[j] = out[j].real();
  }
  return p;
}

ProfilePair comparator_profile(const ModulationConstants& k, std::size_t n, double ly) {
  k.validate();
  const double a = 0.3 * k.eta0, b = 0.5 * k.eta0;
  auto bump = [a, b](double eta) {
    const double x = std::abs(eta);
    if (x <= a) return 1.0;
    if (x >= b) return 0.0;
    const double s = (b - x) / (b - a);
    const double p = std::exp(-1.0 / s), q = std::exp(-1.0 / (1.0 - s));
    return p / (p + q);
  };
  return make_profile_pair(
      n, ly, [&](double eta) { return cplx(bump(eta)); }, [&](double eta) { return bump(eta) * cplx(1.0, 0.5 * eta); },
      b);
}

ComparatorResiduals asymptotic_comparators(double t, const ProfilePair& f, const ModulationConstants& k) {
  if (!(t > 0.0)) throw InvalidArgument("comparator time must be positive");
  const std::size_t n = f.f1.size();
  if (n == 0 || f.f2.size() != n) throw InvalidArgument("profile pair is empty or mismatched");
  ComplexFft1D fft(n);
  std::vector<cplx> a(n), b(n), h1(n), h2(n);
  for (std::size_t j = 0; j < n; ++j) {
    a[j] = f.f1[j];
    b[j] = f.f2[j];
  }
  fft.forward(a, h1);
  fft.forward(b, h2);

  ComparatorResiduals r;
  r.t = t;
  const double unit = f.ly / std::sqrt(2.0 * pi);
  for (std::size_t q = 0; q < n; ++q) r.profile_norm = std::max({r.profile_norm, std::abs(h1[q]) * unit, std::abs(h2[q]) * unit});

  // residual spectra, one per output component
  enum { A1a, A1b, A2a, A2b, A3a, A3b, P1, P2, P3, COUNT };
  std::vector<std::vector<cplx>> res(COUNT, std::vector<cplx>(n));
  for (std::size_t q = 0; q < n; ++q) {
    const double eta = freq(q, n, f.ly);
    const cplx f1 = h1[q], f2 = h2[q];
    const cplx i_eta(0.0, eta);
    const Mat2 m = exp_tA(eta, t, k);
    const double heat = std::exp(-2.0 * t * eta * eta);
    const double box = 4.0 * t * sinc(4.0 * t * eta);  // sin(4 t eta) / eta
    const cplx hp = heat * std::exp(cplx(0.0, 4.0 * t * eta));
    const cplx hm = heat * std::exp(cplx(0.0, -4.0 * t * eta));
    const cplx u1 = m[0][0] * f1 + m[0][1] * f2;
    const cplx u2 = m[1][0] * f1 + m[1][1] * f2;
    res[A1a][q] = u1;
    res[A1b][q] = u2 - 0.5 * heat * box * f1;
    res[A2a][q] = u1 - 0.5 * (hp + hm) * f1;
    res[A2b][q] = i_eta * u2 - 0.25 * (hp - hm) * f1;
    res[A3a][q] = m[0][0] * i_eta * f1 + m[0][1] * f2;
    res[A3b][q] = m[1][0] * i_eta * f1 + m[1][1] * f2 - 0.25 * (hp * (2.0 * f2 + f1) + hm * (2.0 * f2 - f1));

    const double w = omega(eta, k);
    const double damp = k.chi1(eta) * heat;
    res[P1][q] = damp * std::cos(t * eta * w) * f1 - 0.5 * (hp + hm) * f1;
    res[P2][q] = cplx(0.0, damp * w * std::sin(t * eta * w)) * f1 - 2.0 * (hp - hm) * f1;
    res[P3][q] = damp * w * w * t * sinc(t * eta * w) * f1 - 4.0 * heat * box * f1;
  }
  std::vector<double> sup(COUNT);
  std::vector<cplx> out(n);
  for (int c = 0; c < COUNT; ++c) {
    fft.inverse(res[c], out);
    for (const auto& v : out) sup[c] = std::max(sup[c], std::abs(v));
  }
  r.asymp1 = std::max(sup[A1a], sup[A1b]);
  r.asymp2 = std::max(sup[A2a], sup[A2b]);
  r.asymp3 = std::max(sup[A3a], sup[A3b]);
  r.pf1 = sup[P1];
  r.pf2 = sup[P2];
  r.pf3 = sup[P3];
  return r;
}

PhaseLimitResult phase_limit_integral(const std::function<double(double, double)>& f, double t,
                                      std::span<const double> ys, const PhaseLimitOptions& opt) {
  if (!(t > 0.0)) throw InvalidArgument("phase integral needs t > 0");
  if (opt.ns < 2 || opt.ns % 2 != 0) throw InvalidArgument("Simpson needs an even, positive interval count");
  if (opt.ny < 8 || !(opt.ly > 0.0)) throw InvalidArgument("phase integral grid is too small");
  const std::size_t n = opt.ny;
  const double dy = opt.ly / static_cast<double>(n);
  const std::size_t nk = n / 2 + 1;
  RealFft1D fft(n);
  std::vector<double> row(n);
  std::vector<cplx> coeff(nk), acc(nk);
  const double ds = t / static_cast<double>(opt.ns);
  const std::size_t edge = std::max<std::size_t>(1, n / 40);  // 2.5% on each side
  double mass = 0.0, abs_total = 0.0, abs_edge = 0.0;
  for (std::size_t i = 0; i <= opt.ns; ++i) {
    const double s = static_cast<double>(i) * ds;
    const double w = (i == 0 || i == opt.ns) ? 1.0 : (i % 2 ? 4.0 : 2.0);
    const double tau = t - s;
    double row_mass = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      const double y = (static_cast<double>(j) - static_cast<double>(n / 2)) * dy;
      row[j] = f(s, y);
      if (!std::isfinite(row[j])) throw NonFinite("phase integrand");
      row_mass += row[j];
      abs_total += w * std::abs(row[j]);
      if (j < edge || j >= n - edge) abs_edge += w * std::abs(row[j]);
    }
    mass += w * row_mass * dy;
    fft.forward(row, coeff);
    for (std::size_t q = 0; q < nk; ++q) {
      const double eta = 2.0 * pi * static_cast<double>(q) / opt.ly;
      const double sym = std::exp(-2.0 * tau * eta * eta) * 4.0 * tau * sinc(4.0 * tau * eta);
      acc[q] += w * sym * coeff[q];
    }
  }
  PhaseLimitResult out;
  out.sampled_mass = mass * ds / 3.0;
  out.edge_fraction = abs_total > 0.0 ? abs_edge / abs_total : 0.0;
  for (auto& c : acc) c *= ds / 3.0;
  // f(y) = sum_k c_k (-1)^k e^{i eta_k y}, real form over the half spectrum
  out.values.reserve(ys.size());
  for (double y : ys) {
    double v = acc[0].real();
    for (std::size_t q = 1; q < nk; ++q) {
      const double eta = 2.0 * pi * static_cast<double>(q) / opt.ly;
      const cplx term = acc[q] * ((q % 2) ? -1.0 : 1.0) * std::exp(cplx(0.0, eta * y));
      v += (q == n / 2 ? 1.0 : 2.0) * term.real();
    }
    out.values.push_back(v);
  }
  return out;
}

double high_freq_decay_check(double t, const ModulationConstants& k) {
  k.validate();
  if (!(t >= 0.0)) throw InvalidArgument("time must be non-negative");
  const double lo = 0.5 * k.eta0;
  const double hi = lo + std::max(10.0, 10.0 / std::sqrt(std::max(t, 1e-3)));
  const std::size_t samples = 20000;
  double sup = 0.0;
  for (std::size_t i = 0; i <= samples; ++i) {
    const double eta = lo + (hi - lo) * static_cast<double>(i) / samples;
    sup = std::max(sup, k.chi2(eta) * operator_norm(exp_tA(eta, t, k)));
  }
  return sup / std::exp(-k.eta0 * k.eta0 * t / 2.0);
}

void write_kernel_norms(const std::filesystem::path& path, std::span<const KernelSample> samples) {
  std::ofstream os(path);
  if (!os) throw IoError("cannot open " + path.string());
  os.precision(12);
  os << "t,kernel,L1,L2,Linf\n";
  for (const auto& s : samples) {
    const std::pair<const char*, const KernelNorms*> rows[] = {
        {"K1", &s.n1}, {"K2", &s.n2}, {"K3", &s.n3}, {"dyK3", &s.n3y}};
    for (const auto& [name, nm] : rows) {
      os << s.t << ',' << name << ',' << nm->l1 << ',' << nm->l2 << ',' << nm->linf << '\n';
    }
  }
  if (!os) throw IoError("write failed: " + path.string());
}

void write_slope_report(const std::filesystem::path& path, std::span<const SlopeRow> rows) {
  std::ofstream os(path);
  if (!os) throw IoError("cannot open " + path.string());
  os.precision(8);
  os << "kernel,claimed_exponent,fitted,ci_lo,ci_hi\n";
  for (const auto& r : rows) {
    os << r.kernel << ',' << r.claimed << ',' << r.fit.slope << ',' << r.fit.ci_lo << ',' << r.fit.ci_hi << '\n';
  }
  if (!os) throw IoError("write failed: " + path.string());
}

}  // namespace kp2
