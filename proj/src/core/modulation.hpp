#pragma once

#include <array>
#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "fft.hpp"

namespace kp2 {

using Mat2 = std::array<std::array<double, 2>, 2>;
using CMat2 = std::array<std::array<cplx, 2>, 2>;

enum class CutoffKind { Quintic, Smooth };

/// Constants of the linearized modulation system and the low-frequency cutoff.
struct ModulationConstants {
  double mu3 = 0.5 + 3.14159265358979323846 * 3.14159265358979323846 / 24.0;
  double eta0 = 0.5;
  CutoffKind cutoff = CutoffKind::Quintic;

  /// 1 on |eta| <= eta0/2, 0 on |eta| >= 3 eta0/4, monotone in between.
  /// Quintic uses 6s^5 - 15s^4 + 10s^3 (C^2); Smooth uses the C^inf ratio
  /// e^{-1/s} / (e^{-1/s} + e^{-1/(1-s)}).
  double chi1(double eta) const;
  double chi2(double eta) const { return 1.0 - chi1(eta); }
  void validate() const;
};

/// sqrt(16 + (8 mu3 - 1) eta^2).
double omega(double eta, const ModulationConstants& k = {});
/// omega - 4, evaluated without cancellation.
double omega_tilde(double eta, const ModulationConstants& k = {});

/// [[-3 eta^2, -8 eta^2], [2 + mu3 eta^2, -eta^2]].
Mat2 A_star(double eta, const ModulationConstants& k = {});
/// (1 / (4 eta)) [[8 eta, 8 eta], [-eta - i omega, -eta + i omega]]; SingularP for |eta| < 1e-12.
CMat2 P_star(double eta, const ModulationConstants& k = {});
/// -2 eta^2 +- i eta omega.
std::array<cplx, 2> lambda_star(double eta, const ModulationConstants& k = {});

/// Closed-form exp(t A_star(eta)) = e^{-2 t eta^2} [cos(theta) I + sin(theta)/(eta omega) (A + 2 eta^2 I)],
/// theta = t eta omega, continuous at eta = 0.
Mat2 exp_tA(double eta, double t, const ModulationConstants& k = {});

Mat2 matmul(const Mat2& a, const Mat2& b);
double operator_norm(const Mat2& m);

/// A kernel K(y) = (1/2pi) integral m(eta) e^{i y eta} d eta sampled on the
/// periodic grid y_j = (j - n/2) dy, with the band-limited symbol kept so the
/// kernel can be evaluated between samples.
struct KernelTable {
  double dy = 0.0;
  std::vector<double> y;
  std::vector<double> values;
  std::vector<cplx> symbol;  // m(eta_k) at FFT frequencies 2 pi k / (n dy)

  double l1() const;
  double l2() const;
  double linf() const;
  /// Trigonometric interpolant between samples.
  double value_at(double yy) const;
};

struct KernelNorms {
  double l1 = 0.0, l2 = 0.0, linf = 0.0;
};

struct KernelSample {
  double t = 0.0;
  KernelTable K1, K2, K3, dyK3;
  // proof kernels
  KernelTable K1p, K1m, K31, K32;
  KernelNorms n1, n2, n3, n3y;
  std::size_t points = 0;  // final sample count after refinement
  double length = 0.0;     // periodic window length
};

struct KernelOptions {
  double rel_tol = 1e-3;        // refinement stops when all norms move by less than this
  std::size_t max_points = 1u << 20;
  double points_per_period = 16.0;  // phase t eta omega resolved in eta
};

/// K1, K2, K3, d_y K3 and the auxiliary kernels at time t by trapezoid
/// quadrature in eta (FFT). Starts from dy = pi / (4 eta_max) and a window
/// that resolves the phase t eta omega, then doubles both until the norms
/// settle. ResolutionExceeded when max_points is reached first.
KernelSample kernels_at(double t, const ModulationConstants& k = {}, const KernelOptions& opt = {});

/// Least-squares slope of log(value) against log(t) with a 95% Student-t band.
struct SlopeFit {
  double slope = 0.0, intercept = 0.0, stderr_ = 0.0, ci_lo = 0.0, ci_hi = 0.0;
  std::size_t samples = 0;
};
SlopeFit decay_exponent_fit(std::span<const double> t, std::span<const double> values);

/// (4 pi t)^{-1/2} exp(-y^2 / 4t).
double heat_H(double t, double y);
/// 1/2 on [-t, t], else 0.
double box_W(double t, double y);

/// Band-limited test profile pair on a periodic y grid.
struct ProfilePair {
  double ly = 0.0;
  std::vector<double> f1, f2;  // samples at y_j = (j - n/2) dy
};
/// Builds real profiles from their transforms (eta -> f_hat(eta), with
/// f_hat(-eta) = conj f_hat(eta)), zeroed for |eta| > cutoff.
ProfilePair make_profile_pair(std::size_t n, double ly, const std::function<cplx(double)>& f1_hat,
                              const std::function<cplx(double)>& f2_hat, double cutoff);
/// Smooth flat-top pair supported where chi1 = 1: f1_hat = b(eta), f2_hat = b(eta)(1 + i eta / 2),
/// with b = 1 on |eta| <= 0.3 eta0 and b = 0 on |eta| >= eta0 / 2 (C^inf taper).
ProfilePair comparator_profile(const ModulationConstants& k, std::size_t n = 8192, double ly = 8192.0);

/// Sup-norm residuals of the large-time approximations of exp(t A_star(D)):
///   asymp1: e^{tA}(f1,f2) - (1/2) H_2t * W_4t * f1 e2
///   asymp2: diag(1, d_y) e^{tA}(f1,f2) - (1/4)[[2,2],[1,-1]] (H_2t(.+4t), H_2t(.-4t)) * f1
///   asymp3: e^{tA} diag(d_y, 1)(f1,f2) - (1/4) sum_+- H_2t(.+-4t) * (2 f2 +- f1) e2
///   pf1:    K1 * f - (1/2) sum_+- H_2t(.+-4t) * f
///   pf2:    d_y K3 * f - 2 H_2t(.+4t) * f + 2 H_2t(.-4t) * f
///   pf3:    K3 * f - 4 H_2t * W_4t * f
/// (pf kernels applied to f1). Everything is evaluated exactly in Fourier space.
struct ComparatorResiduals {
  double t = 0.0;
  double asymp1 = 0.0, asymp2 = 0.0, asymp3 = 0.0, pf1 = 0.0, pf2 = 0.0, pf3 = 0.0;
  double profile_norm = 0.0;  // max |f_hat| over both profiles
};
ComparatorResiduals asymptotic_comparators(double t, const ProfilePair& f, const ModulationConstants& k = {});

/// I(t, y) = integral_0^t (H_{2(t-s)} * W_{4(t-s)} * f(s, .))(y) ds.
struct PhaseLimitOptions {
  double ly = 1024.0;
  std::size_t ny = 4096;
  std::size_t ns = 2000;  // Simpson intervals in s (even)
};
struct PhaseLimitResult {
  std::vector<double> values;  // at the requested y
  double sampled_mass = 0.0;   // integral of f over [0, t] x window
  double edge_fraction = 0.0;  // share of |f| mass in the outer 5% of the y window
};
PhaseLimitResult phase_limit_integral(const std::function<double(double, double)>& f, double t,
                                      std::span<const double> ys, const PhaseLimitOptions& opt = {});

/// sup over |eta| >= eta0/2 of chi2(eta) |exp(t A_star(eta))| divided by e^{-eta0^2 t / 2}.
double high_freq_decay_check(double t, const ModulationConstants& k = {});

/// CSV `t,kernel,L1,L2,Linf`.
void write_kernel_norms(const std::filesystem::path& path, std::span<const KernelSample> samples);

struct SlopeRow {
  std::string kernel;
  double claimed = 0.0;
  SlopeFit fit;
};
/// CSV `kernel,claimed_exponent,fitted,ci_lo,ci_hi`.
void write_slope_report(const std::filesystem::path& path, std::span<const SlopeRow> rows);

}  // namespace kp2
