#pragma once

#include <functional>
#include <string>
#include <vector>

#include "grid.hpp"

namespace kp2 {

/// KP-II written in a frame moving with speed `frame_speed` along x:
///   u_t = -u_xxx - 3 (u^2)_x - 3 d_x^{-1} u_yy + frame_speed u_x.
struct SolverConfig {
  Grid2D grid;
  double dt = 0.01;
  double frame_speed = 4.0;
  double t_end = 0.0;
  int snapshot_stride = 1;  // steps between stored snapshots
  bool dealias = true;
  bool keep_snapshots = true;
  // Optional absorbing layer -sponge_strength * s(x) u with s = cos^2(pi d / (2 w)) for
  // d = lx/2 - |x| < w = sponge_width (seam of the periodic x-window); 0 disables it.
  double sponge_width = 0.0;
  double sponge_strength = 1.0;

  void validate() const;
};

struct ConservedSample {
  double t = 0.0;
  double l2 = 0.0;
  double hamiltonian = 0.0;
};

struct Trajectory {
  std::vector<double> times;
  std::vector<Field2D> snapshots;  // empty when keep_snapshots is false
  std::vector<ConservedSample> conserved;
  std::vector<std::string> warnings;
  Field2D final_state;
};

/// i (kx^3 - 3 ky^2 / kx + frame_speed kx); zero on the kx = 0 line.
cplx linear_symbol(double kx, double ky, double frame_speed);

/// phi_k(z) for k = 1, 2, 3 (phi_0 = e^z, phi_{k+1} = (phi_k - 1/k!) / z).
/// Small |z| uses a truncated Taylor series.
struct PhiFunctions {
  cplx e, phi1, phi2, phi3;
};
PhiFunctions phi_functions(cplx z);

/// Fourth-order exponential time differencing (Cox-Matthews) on the spectral
/// coefficients, with per-mode coefficients precomputed for a fixed dt.
class EtdStepper {
 public:
  explicit EtdStepper(const SolverConfig& cfg);

  const SolverConfig& config() const noexcept { return cfg_; }
  /// One step; throws NonFinite when a coefficient becomes NaN or Inf.
  Field2D step(const Field2D& state) const;
  /// In-place variant working directly on the half-complex coefficients.
  void step_spectral(std::vector<cplx>& coeffs) const;
  /// Largest |symbol| on the grid.
  double max_symbol() const noexcept { return max_symbol_; }

 private:
  void nonlinear(const std::vector<cplx>& v, std::vector<cplx>& out) const;

  SolverConfig cfg_;
  std::vector<cplx> e_, e2_, q_, f1_, f2_, f3_;
  std::vector<double> dx_;  // -3 kx, or 0 for dealiased modes
  std::vector<unsigned char> keep_;
  double max_symbol_ = 0.0;
  // scratch
  std::vector<double> sponge_;  // per x sample; empty without a layer
  mutable std::vector<double> phys_, damp_;
  mutable std::vector<cplx> tmp_, nv_, na_, nb_, nc_, a_, b_, c_;
};

Field2D step_etdrk4(const Field2D& state, const SolverConfig& cfg);

/// Called after every stored snapshot; return false to stop early.
using SnapshotObserver = std::function<bool(double t, const Field2D& u)>;

/// Integrates from t = 0 to t_end. The number of steps is ceil(t_end / dt);
/// when t_end is not a multiple of dt the step is shortened uniformly and a
/// warning is recorded. Snapshot 0 is the initial state and the final state is
/// always stored. kx = 0, ky != 0 coefficients of u0 are projected out.
Trajectory simulate(const Field2D& u0, const SolverConfig& cfg, const SnapshotObserver& observer = {});

/// Time at which a transverse front leaving y = 0 at speed sqrt(8 c0) first
/// meets its own periodic image inside the cone |y| <= sqrt(8 c0) t.
double first_reentry_time(const Grid2D& grid, double c0);

}  // namespace kp2
