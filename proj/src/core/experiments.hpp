#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "config.hpp"
#include "extract.hpp"
#include "grid.hpp"
#include "modulation.hpp"
#include "resonant.hpp"
#include "solver.hpp"

namespace kp2 {

enum class PerturbationKind { None, Gaussian, Random, AmplitudeBump };

/// Initial perturbation of the line soliton phi_{c0}(x).
///   Gaussian:      eps * D G(x - x0, y),  G = exp(-x^2/wx^2 - y^2/wy^2)
///   Random:        sum of `count` such terms with seeded centers and weights
///   AmplitudeBump: phi_{c0 + a(y)}(x) - psi_{c0 + a(y), L}(x),  a = eps F^{-1}[zeta],
///                  zeta a C-infinity cutoff equal to 1 near 0 and supported in |eta| < 3 eta0 / 4
/// D is d/dx when `derivative` is set, else the identity.
struct PerturbationSpec {
  PerturbationKind kind = PerturbationKind::Gaussian;
  double epsilon = 0.01;
  double wx = 1.0, wy = 16.0;
  double x0 = 0.7;
  bool derivative = true;
  bool hypothesis = false;  // require the x-derivative form
  std::size_t count = 4;
};

struct ExperimentConfig {
  std::string name = "experiment";
  std::uint64_t seed = 20240611;

  Grid2D grid = Grid2D::make(512, 512, 80.0, 320.0);
  double dt = 0.01;
  double t_end = 20.0;
  double sample_every = 0.5;
  bool dealias = true;
  double sponge_width = 0.0;  // absorbing layer at the x seam; 0 = none
  double sponge_strength = 1.0;

  double c0 = 2.0;
  double L = 20.0;
  BumpKind bump = BumpKind::Smooth;
  PerturbationSpec perturbation;

  ModulationConstants modulation;
  double alpha = 1.0;

  // kernels
  double t_min = 10.0, t_max = 200.0;
  std::size_t t_samples = 12;
  double comparator_eta0 = 1.0;

  // verify-eigen
  std::vector<double> etas{0.05, 0.1, 0.3};
  ModeWindow window;

  // extraction and phase
  ExtractMethod method = ExtractMethod::Project;
  double reach = 14.0;
  double delta = 1.0;
  bool refine = true;

  bool save_snapshots = false;
  std::size_t threads = 0;  // 0 = hardware concurrency

  double frame_speed() const noexcept { return 2.0 * c0; }
  void validate() const;

  /// Typed view of a flat config; unknown keys are rejected.
  static ExperimentConfig from(const Config& c);
  /// Every key `from` understands, as `section.key`.
  static const std::vector<std::string>& known_keys();
};

/// The perturbed initial state u(0) on the configured grid.
Field2D initial_field(const ExperimentConfig& cfg, std::uint64_t seed);
/// a(y) for the amplitude bump (without the factor eps) at the samples ys.
std::vector<double> bump_profile(std::span<const double> ys, double eta0);

/// Full pipeline: evolve u (and optionally the auxiliary flow from v_star),
/// extract both tracks and the decomposition diagnostics.
struct PipelineResult {
  Trajectory u;
  ModulationTrack fit, project;
  std::vector<double> max_dc, max_dx;  // fit vs projection per snapshot
  std::vector<double> v_l2, v2_l2, k_l2;  // empty without the auxiliary flow
  double shape_error = 0.0;  // max over snapshots of |u(t) - u(0)| / |u(0)| in L2
  double l2_drift = 0.0, h_drift = 0.0;
  std::vector<double> c1;  // initial decomposition amplitude

  const ModulationTrack& track(ExtractMethod m) const { return m == ExtractMethod::Fit ? fit : project; }
};
PipelineResult run_pipeline(const ExperimentConfig& cfg, std::uint64_t seed, bool auxiliary_flow);

/// Burgers comparison of a track: masses from c(0, .), deviations per sample,
/// Pearson correlation on the final third, mean normalized deviation per third.
struct ProfileStudy {
  double mass = 0.0, m_plus = 0.0, m_minus = 0.0;
  std::vector<double> times, dev_l2, dev_normalized;
  double pearson = 0.0;
  std::array<double, 3> third_means{};
  bool thirds_nonincreasing = false;
};
ProfileStudy profile_study(const ModulationTrack& track, double c0, double t_end);

/// Pearson correlation of two equally long samples (NaN when either is constant).
double pearson(std::span<const double> a, std::span<const double> b);

struct Check {
  std::string name;
  double value = 0.0;
  std::string bound;
  bool pass = false;
};

struct CommandResult {
  std::string command;
  std::vector<Check> checks;
  std::string report;  // text written to report.txt
  bool passed() const;
};

/// Commands: verify-eigen, kernels, simulate, compare-profile, phase.
/// Writes CSVs and report.txt under `out`.
CommandResult run_command(const std::string& command, const ExperimentConfig& cfg, const std::filesystem::path& out,
                          std::uint64_t seed);
const std::vector<std::string>& command_names();

}  // namespace kp2
