#include "burgers.hpp"

#include <cmath>
#include <fstream>
#include <numbers>

#include "error.hpp"
#include "fft.hpp"

namespace kp2 {

void BurgersProfile::validate() const {
  if (sign != 1 && sign != -1) throw InvalidArgument("Burgers sign must be +1 or -1");
  if (!(std::abs(m) < 2.0)) throw InvalidArgument("Burgers profile needs |m| < 2, got " + std::to_string(m));
}

double BurgersProfile::operator()(double t, double y) const { return u_B(t, y, *this); }

double u_B(double t, double y, const BurgersProfile& p) {
  p.validate();
  if (!(t > 0.0)) throw InvalidArgument("Burgers profile needs t > 0");
  const double h = std::exp(-y * y / (8.0 * t)) / std::sqrt(8.0 * std::numbers::pi * t);
  const double phi = 0.5 * std::erf(y / std::sqrt(8.0 * t));
  return p.sign * p.m * h / (2.0 * (1.0 + p.m * phi));
}

double m_from_mass(double mass, int sign) {
  if (!std::isfinite(mass)) throw InvalidArgument("mass must be finite");
  if (sign != 1 && sign != -1) throw InvalidArgument("Burgers sign must be +1 or -1");
  return sign * 2.0 * std::tanh(mass);
}

std::vector<double> burgers_solve(std::span<const double> u0, double ly, int sign, double t_end, double dt) {
  const std::size_t n = u0.size();
  if (n < 4 || n % 2 != 0) throw InvalidArgument("Burgers grid must have even length >= 4");
  if (!(ly > 0.0)) throw InvalidArgument("Burgers period must be positive");
  if (sign != 1 && sign != -1) throw InvalidArgument("Burgers sign must be +1 or -1");
  if (!(t_end >= 0.0) || !(dt > 0.0)) throw InvalidArgument("Burgers times must be non-negative, dt positive");
  std::vector<double> u(u0.begin(), u0.end());
  if (t_end == 0.0) return u;
  const auto steps = static_cast<std::size_t>(std::ceil(t_end / dt - 1e-9));
  const double h = t_end / static_cast<double>(steps);

  RealFft1D fft(n);
  const std::size_t nk = n / 2 + 1;
  std::vector<double> k(nk), e(nk), e2(nk);
  for (std::size_t q = 0; q < nk; ++q) {
    k[q] = (q == n / 2) ? 0.0 : 2.0 * std::numbers::pi * static_cast<double>(q) / ly;
    const double lin = -2.0 * std::pow(2.0 * std::numbers::pi * static_cast<double>(q) / ly, 2);
    e[q] = std::exp(lin * h);
    e2[q] = std::exp(lin * h / 2.0);
  }
  std::vector<cplx> v(nk), k1(nk), k2(nk), k3(nk), k4(nk), w(nk);
  std::vector<double> phys(n);
  fft.forward(u, v);
  const double coef = 4.0 * sign;
  auto nonlinear = [&](const std::vector<cplx>& in, std::vector<cplx>& out) {
    fft.inverse(in, phys);
    for (double& x : phys) x *= x;
    fft.forward(phys, out);
    for (std::size_t q = 0; q < nk; ++q) out[q] *= cplx(0.0, coef * k[q]);
  };
  for (std::size_t s = 0; s < steps; ++s) {
    nonlinear(v, k1);
    for (std::size_t q = 0; q < nk; ++q) w[q] = e2[q] * (v[q] + 0.5 * h * k1[q]);
    nonlinear(w, k2);
    for (std::size_t q = 0; q < nk; ++q) w[q] = e2[q] * v[q] + 0.5 * h * k2[q];
    nonlinear(w, k3);
    for (std::size_t q = 0; q < nk; ++q) w[q] = e[q] * v[q] + h * e2[q] * k3[q];
    nonlinear(w, k4);
    for (std::size_t q = 0; q < nk; ++q) {
      v[q] = e[q] * v[q] + h / 6.0 * (e[q] * k1[q] + 2.0 * e2[q] * (k2[q] + k3[q]) + k4[q]);
      if (!std::isfinite(v[q].real()) || !std::isfinite(v[q].imag())) throw NonFinite("Burgers step");
    }
  }
  fft.inverse(v, u);
  return u;
}

ProfileDeviation profile_comparator(const ModulationTrack& track, double m_plus, double m_minus, double t,
                                    double c_ref) {
  const std::size_t k = track.index_of(t);
  const BurgersProfile up{m_plus, 1}, um{m_minus, -1};
  up.validate();
  um.validate();
  const auto xy = track.x_y(k);
  const double ly = track.ly;
  auto wrap = [ly](double y) { return y - ly * std::floor(y / ly + 0.5); };
  const double dy = ly / static_cast<double>(track.ny);
  double sum = 0.0;
  for (std::size_t m = 0; m < track.ny; ++m) {
    const double y = track.y(m);
    const double p = (m_plus == 0.0 || t <= 0.0) ? 0.0 : up(t, wrap(y + 4.0 * t));
    const double q = (m_minus == 0.0 || t <= 0.0) ? 0.0 : um(t, wrap(y - 4.0 * t));
    const double a = track.c[k][m] - c_ref - 2.0 * (p + q);
    const double b = xy[m] - (p - q);
    sum += a * a + b * b;
  }
  ProfileDeviation d;
  d.t = t;
  d.dev_l2 = std::sqrt(sum * dy);
  d.dev_normalized = d.dev_l2 * std::pow(std::max(t, 0.0), 0.25);
  return d;
}

void write_burgers_profiles(const std::filesystem::path& path, std::span<const double> times,
                            std::span<const double> ys, double m_plus, double m_minus) {
  const BurgersProfile up{m_plus, 1}, um{m_minus, -1};
  std::ofstream os(path);
  if (!os) throw IoError("cannot open " + path.string());
  os.precision(12);
  os << "t,y,uB_plus,uB_minus\n";
  for (double t : times) {
    for (double y : ys) os << t << ',' << y << ',' << up(t, y) << ',' << um(t, y) << '\n';
  }
  if (!os) throw IoError("write failed: " + path.string());
}

void write_profile_report(const std::filesystem::path& path, std::span<const ProfileDeviation> rows) {
  std::ofstream os(path);
  if (!os) throw IoError("cannot open " + path.string());
  os.precision(12);
  os << "t,dev_L2,dev_normalized\n";
  for (const auto& r : rows) os << r.t << ',' << r.dev_l2 << ',' << r.dev_normalized << '\n';
  if (!os) throw IoError("write failed: " + path.string());
}

}  // namespace kp2
