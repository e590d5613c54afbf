#pragma once

#include <array>
#include <filesystem>
#include <span>
#include <vector>

#include "grid.hpp"

namespace kp2 {

// Resonant continuous eigenmodes of the operator linearized about phi_2,
// acting on functions of x times exp(i y eta):
//   L(eta) = -d^3 + 4 d + 3 eta^2 d^{-1} - 6 d(phi_2 .),
// with d^{-1} f(x) = -integral_x^inf f (right-anchored).

/// sqrt(1 + i eta), principal branch.
cplx beta(double eta);
/// 4 i eta beta(eta).
cplx lambda_res(double eta);

/// g(x, eta) = -i / (2 eta beta) d_x^2 (exp(-beta x) sech x); eta != 0.
cplx mode_g(double x, double eta);
/// g*(x, eta) = d_x (exp(beta(-eta) x) sech x).
cplx mode_gstar(double x, double eta);

/// Real modes and duals:
///   g1 = 2 Re g, g2 = -2 eta Im g, g1s = Re g*, g2s = -Im g* / eta,
/// with the eta -> 0 limits used at eta = 0.
struct ModeDuals {
  double g1, g2, g1s, g2s;
};
ModeDuals duals_g12(double x, double eta);

/// Truncated window [-half_width, half_width) with n equispaced points on
/// which L(eta) is applied spectrally after exponential weighting.
struct ModeWindow {
  double half_width = 40.0;
  std::size_t n = 4096;
  double alpha = 1.0;

  double dx() const noexcept { return 2.0 * half_width / static_cast<double>(n); }
  double x(std::size_t j) const noexcept { return -half_width + static_cast<double>(j) * dx(); }
  std::vector<double> points() const;
};

/// L(eta) f for samples f on the window. Works with w = exp(alpha x) f, which
/// must be negligible at both window ends (relative 1e-10, else
/// TailNotDecayed). `c` is the soliton amplitude (the operator above is the
/// c = 2 case; other c use phi_c and frame speed 2c).
std::vector<cplx> apply_L_eta(std::span<const cplx> f, double eta, const ModeWindow& w = {}, double c = 2.0);
/// Adjoint for the bilinear pairing integral f g dx:
///   L(eta)^T = d^3 - 4 d - 3 eta^2 d_L^{-1} + 6 phi_2 d,
/// d_L^{-1} left-anchored; weighting exp(-alpha x).
std::vector<cplx> apply_L_eta_adjoint(std::span<const cplx> f, double eta, const ModeWindow& w = {}, double c = 2.0);

/// Weighted L2 norm (integral |f|^2 exp(2 sign alpha x) dx)^{1/2} on the window.
double weighted_norm(std::span<const cplx> f, const ModeWindow& w, double sign);

struct ModePair {
  double eta = 0.0;
  cplx lambda;
  std::vector<cplx> g;       // samples on the window (empty at eta = 0)
  std::vector<cplx> g_star;  // samples on the window
  double residual = 0.0;          // |L g - lambda g| / |g| in L2(exp(2 alpha x))
  double adjoint_residual = 0.0;  // |L^T g* - lambda(-eta) g*| / |g*| in L2(exp(-2 alpha x))
  bool certified = false;         // both residuals below tolerance

  static constexpr double tolerance = 1e-6;
};

/// Samples g, g* on the window and certifies the eigen relations.
ModePair make_mode_pair(double eta, const ModeWindow& w = {});

/// Symmetric set of eta samples in [-eta0, eta0] that contains 0.
struct EtaGrid {
  double eta0 = 0.5;
  std::vector<double> samples;

  /// 2 * half_count + 1 equispaced samples.
  static EtaGrid uniform(double eta0, std::size_t half_count);
  /// The transverse wavenumbers of `grid` with |ky| <= eta0, in increasing order.
  static EtaGrid from_grid(const Grid2D& grid, double eta0);
  void validate() const;
};

struct Projection {
  EtaGrid etas;
  std::vector<cplx> a1, a2;  // one per eta sample
  /// B(eta)[j][k] = integral g_{j+1} g*_{k+1} dx.
  std::vector<std::array<std::array<double, 2>, 2>> biorthogonality;
  /// Largest |B_jk| / sqrt(|B_jj B_kk|) over j != k and all etas.
  double max_offdiagonal = 0.0;
  bool offdiagonal_flag = false;  // max_offdiagonal > 0.05

  /// a_k(eta) at a sample; zero for |eta| > eta0.
  cplx coefficient(int k, double eta) const;
};

/// (F_y f)(x, eta) = (2 pi)^{-1/2} integral f(x, y) exp(-i y eta) dy by the
/// rectangle rule on the field's grid, then a_k(eta) = integral F_y f g_k* dx.
/// The soliton crest is taken at x = 0.
Projection project_P0(const Field2D& f, const EtaGrid& etas);

/// P_0 f = (2 pi)^{-1/2} sum_k integral a_k(eta) g_k(x, eta) exp(i y eta) d eta
/// by the trapezoid rule over the eta samples.
Field2D reconstruct_P0(const Projection& p, const Grid2D& grid);

/// CSV `eta,x,Re g,Im g,Re g*,Im g*` for the given etas on the window
/// (every `stride`-th sample). eta = 0 is skipped because g is singular there.
void write_mode_table(const std::filesystem::path& path, std::span<const double> etas, const ModeWindow& w,
                      std::size_t stride = 8);

}  // namespace kp2
