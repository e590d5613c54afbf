#pragma once

#include <vector>

#include "grid.hpp"

namespace kp2 {

/// Line-soliton slice: amplitude c, crest position x0, and the offset L of the
/// mass-correcting bump behind it.
struct SolitonParams {
  double c = 2.0;
  double x0 = 0.0;
  double L = 0.0;

  /// Throws InvalidArgument unless c > 0 and L >= 0.
  void validate() const;
};

// phi_c(x) = c sech^2(sqrt(c/2) x) and its closed-form derivatives.
double phi(double x, double c);
double phi_prime(double x, double c);
double phi_second(double x, double c);
double phi_third(double x, double c);
/// d/dc phi_c(x).
double phi_c_derivative(double x, double c);
/// d^2/dc^2 phi_c(x).
double phi_c2_derivative(double x, double c);
/// integral_{-inf}^{x} d/dc phi_c.
double phi_c_derivative_integral(double x, double c);
/// integral of phi_c over the line, 2 sqrt(2c).
double phi_mass(double c);

enum class BumpKind { Smooth, Cosine };

/// Unit-mass bump supported in [-1, 1]. Smooth is N exp(-1/(1 - x^2)); Cosine
/// is (1 + cos(pi x)) / 2 and is kept to check that results do not depend on
/// the particular bump.
double bump(double x, BumpKind kind = BumpKind::Smooth);
double bump_prime(double x, BumpKind kind = BumpKind::Smooth);

/// psi_{c,L}(x) = 2 (sqrt(2c) - 2) bump(x + L). Its mass equals the mass
/// difference between phi_c and phi_2.
double psi_cL(double x, double c, double L, BumpKind kind = BumpKind::Smooth);
/// d/dc psi_{c,L}(x).
double psi_cL_c_derivative(double x, double c, double L, BumpKind kind = BumpKind::Smooth);

/// Maps x into [-period/2, period/2).
double wrap_periodic(double x, double period);

/// Smallest periodic window that keeps the sech^2 tails of phi_c below 1e-14
/// at the boundary when the crest sits at the center.
double min_window_for(double c);

/// y-independent soliton phi_c(x - x0) on the grid (nearest periodic image).
Field2D soliton_field(const Grid2D& grid, double c, double x0 = 0.0);

struct InitialDecomposition {
  std::vector<double> c1;  // one amplitude per y sample
  Field2D v_star;          // zero x-mean remainder
};

/// Splits phi_{c0} + v0 into an amplified soliton phi_{c1(y)} plus a remainder
/// with zero mean along every x-line:
///   c1(y) = (sqrt(c0) + (1/(2 sqrt 2)) int v0(x, y) dx)^2,
///   v_star = v0 + phi_{c0} - phi_{c1(y)}.
/// Throws AmplitudeCollapse when the bracket is non-positive for some y.
InitialDecomposition initial_decomposition(const Field2D& v0, double c0);

}  // namespace kp2
