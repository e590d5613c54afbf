#pragma once

#include <span>
#include <string>
#include <vector>

#include "grid.hpp"
#include "soliton.hpp"
#include "track.hpp"

namespace kp2 {

struct CrestFit {
  double c = 0.0;
  double x0 = 0.0;
  int iterations = 0;
  double residual = 0.0;  // RMS misfit on the window
};

/// Least-squares fit of phi_c(x - x0) to one x-slice sampled at
/// x_j = (j - n/2) lx / n on a periodic line. Gauss-Newton from (peak, argmax)
/// on the window |x - argmax| <= 6 / sqrt(c/2); converged when the step is
/// below 1e-10. NoCrest when peak - median < 0.5 c_ref; NoConvergence after
/// `max_iter` steps.
CrestFit extract_fit(std::span<const double> slice, double lx, double c_ref = 2.0, int max_iter = 50);

/// Duals of the two neutral modes at eta = 0 for amplitude c:
///   g1*(z) = phi_c(z),  g2*(z) = (c/2) (1 + tanh(k z) + k z sech^2(k z)) / 2,  k = sqrt(c/2).
double dual_g1_zero(double z, double c);
double dual_g2_zero(double z, double c);

struct ProjectOptions {
  double t = 0.0;        // time, places the trailing bump at z = -(3t + L)
  double L = 20.0;       // bump offset
  BumpKind bump = BumpKind::Smooth;
  double tol = 1e-8;     // on both pairings
  int max_iter = 30;
  double reach = 0.0;    // g2* is tapered to 0 over [reach - 6, reach] ahead of the crest; 0 = lx/2 - 2
};

/// Position of the trailing bump relative to the crest on a periodic line of
/// length lx: -(3t + L), clamped to stay behind the crest (>= -(lx/2 - 2)).
double tail_offset(double t, double L, double lx);

/// v = u - phi_c(z) + psi_{c,L}(z + 3t) on one slice, z = x - x0 (nearest image).
std::vector<double> slice_remainder(std::span<const double> slice, double lx, double c, double x0,
                                    const ProjectOptions& opt);

struct ProjectedRow {
  double c = 0.0, x0 = 0.0;
  int iterations = 0;
  double p1 = 0.0, p2 = 0.0;  // final pairings
};

/// Newton iteration (finite-difference Jacobian) on (c, x0) for one slice
/// until |<v, g1*>|, |<v, g2*>| < tol.
ProjectedRow project_slice(std::span<const double> slice, double lx, double c_guess, double x_guess,
                           const ProjectOptions& opt = {});

/// Per-row projection of a field; `c_guess`, `x_guess` hold one value per y.
struct ProjectedField {
  std::vector<double> c, x;
  int max_iterations = 0;
};
ProjectedField extract_project(const Field2D& u, std::span<const double> c_guess, std::span<const double> x_guess,
                               const ProjectOptions& opt = {});

/// Nearest-branch continuation of crest positions around the periodic line,
/// anchored at the row with the tallest crest.
std::vector<double> unwrap_positions(std::span<const double> x, std::span<const double> c, double lx);

enum class ExtractMethod { Fit, Project };

/// Track from a sequence of snapshots. Project uses the fit of the same
/// snapshot as its starting guess. Positions are unwrapped in y and, across
/// time, continued to the branch nearest the previous sample.
ModulationTrack extract_track(std::span<const Field2D> snapshots, std::span<const double> times, double frame_speed,
                              ExtractMethod method = ExtractMethod::Fit, const ProjectOptions& opt = {});

/// f(x + s(y), y) for each row by spectral interpolation (Nyquist mode
/// dropped); rows with a zero shift are copied unchanged.
Field2D shift_rows(const Field2D& f, std::span<const double> shifts);

struct Decomposition {
  Field2D v;   // u(x(t,y) + z, y) - phi_c(z) + psi_{c,L}(z + 3t)
  Field2D v1;  // v1_traj shifted to the crest frame
  Field2D v2;  // v - v1
};
/// `v1_field` is the auxiliary linear flow in the simulation frame (may be
/// default-constructed for v1 = 0).
Decomposition build_decomposition(const Field2D& u, std::span<const double> c, std::span<const double> x,
                                  const Field2D& v1_field, const ProjectOptions& opt);

struct PhaseDiagnostics {
  double sup_shift = 0.0;
  double plateau_h = 0.0;
  double inside_dev = 0.0;
  double outside_sup = 0.0;
  std::size_t inside_samples = 0, outside_samples = 0;
};
/// Phase shift x~ = x + (frame_speed - 2 c0) t is compared inside the cone
/// |y| <= (sqrt(8 c0) - delta) t and outside |y| >= (sqrt(8 c0) + delta) t over
/// the final third of the track. ConeEmpty when no inside sample exists.
PhaseDiagnostics phase_diagnostics(const ModulationTrack& track, double c0, double delta);

/// k(y) = (1/2) P{ integral v1(z, y) phi_{c(y)}(z) dz }, P the band limit to |eta| <= eta0.
std::vector<double> k_kernel(const Field2D& v1, std::span<const double> c, double eta0);

/// Per-sample max |x~| over |y| >= (sqrt(8 c0) + delta) t; NaN where that
/// region holds no grid point.
std::vector<double> outside_cone_series(const ModulationTrack& track, double c0, double delta);

/// JSON object with the four phase numbers and the sample counts.
std::string format_phase_report(const PhaseDiagnostics& d);

}  // namespace kp2
