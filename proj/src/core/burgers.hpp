#pragma once

#include <filesystem>
#include <span>
#include <vector>

#include "track.hpp"

namespace kp2 {

// Self-similar solutions of u_t = 2 u_yy + sign * 4 (u^2)_y:
//   u(t, y) = sign * m H_2t(y) / (2 (1 + m Phi(t, y))),  Phi = int_0^y H_2t.
// By Cole-Hopf, u = sign * d_y log(1 + m Phi) / 2, so the mass is
// sign * (1/2) log((1 + m/2) / (1 - m/2)) and |m| < 2 keeps 1 + m Phi > 0.
struct BurgersProfile {
  double m = 0.0;
  int sign = 1;  // +1 or -1

  /// InvalidArgument unless |m| < 2 and sign = +-1.
  void validate() const;
  double operator()(double t, double y) const;
};

/// Closed form above; t > 0.
double u_B(double t, double y, const BurgersProfile& p);

/// m such that the profile with this sign carries mass M: sign * 2 tanh(M).
double m_from_mass(double mass, int sign = 1);

/// Periodic Fourier spectral solution of u_t = 2 u_yy + sign * 4 (u^2)_y on
/// y_j = (j - n/2) ly / n by fourth-order integrating-factor Runge-Kutta
/// (diffusion integrated exactly). The step is shortened so that it divides
/// t_end. NonFinite on blow-up.
std::vector<double> burgers_solve(std::span<const double> u0, double ly, int sign, double t_end, double dt = 0.01);

struct ProfileDeviation {
  double t = 0.0;
  double dev_l2 = 0.0;
  double dev_normalized = 0.0;  // dev_l2 * t^{1/4}
};

/// L2(y) norm of (c - 2, x_y) - [[2, 2], [1, -1]] (u+(t, y + 4t), u-(t, y - 4t))
/// at the track sample with time t (profiles evaluated at the nearest
/// periodic image). The amplitude reference is `c_ref` (2 by default).
ProfileDeviation profile_comparator(const ModulationTrack& track, double m_plus, double m_minus, double t,
                                    double c_ref = 2.0);

/// CSV `t,y,uB_plus,uB_minus` (profiles in their own frames, unshifted).
void write_burgers_profiles(const std::filesystem::path& path, std::span<const double> times,
                            std::span<const double> ys, double m_plus, double m_minus);
/// CSV `t,dev_L2,dev_normalized`.
void write_profile_report(const std::filesystem::path& path, std::span<const ProfileDeviation> rows);

}  // namespace kp2
