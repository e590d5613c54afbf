#include "solver.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "error.hpp"

namespace kp2 {

void SolverConfig::validate() const {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw InvalidArgument("dt must be positive");
  if (!(t_end >= 0.0) || !std::isfinite(t_end)) throw InvalidArgument("t_end must be non-negative");
  if (snapshot_stride < 1) throw InvalidArgument("snapshot_stride must be >= 1");
  if (!std::isfinite(frame_speed)) throw InvalidArgument("frame_speed must be finite");
  if (!(sponge_width >= 0.0) || !(sponge_width < 0.5 * grid.lx))
    throw InvalidArgument("sponge_width must lie in [0, lx/2)");
  if (sponge_width > 0.0 && !(sponge_strength > 0.0 && sponge_strength * dt < 1.0))
    throw InvalidArgument("sponge_strength must be positive with sponge_strength * dt < 1");
  Grid2D::make(grid.nx, grid.ny, grid.lx, grid.ly);
}

cplx linear_symbol(double kx, double ky, double frame_speed) {
  if (kx == 0.0) return 0.0;
  return {0.0, kx * kx * kx - 3.0 * ky * ky / kx + frame_speed * kx};
}

PhiFunctions phi_functions(cplx z) {
  PhiFunctions p;
  p.e = std::exp(z);
  if (std::abs(z) < 0.1) {
    // phi_k(z) = sum_n z^n / (n + k)!
    auto series = [&](int k) {
      cplx sum = 0.0, term = 1.0;
      double fact = 1.0;
      for (int i = 1; i <= k; ++i) fact *= i;
      for (int n = 0; n < 8; ++n) {
        sum += term / fact;
        term *= z;
        fact *= static_cast<double>(n + k + 1);
      }
      return sum;
    };
    p.phi1 = series(1);
    p.phi2 = series(2);
    p.phi3 = series(3);
  } else {
    p.phi1 = (p.e - 1.0) / z;
    p.phi2 = (p.phi1 - 1.0) / z;
    p.phi3 = (p.phi2 - 0.5) / z;
  }
  return p;
}

EtdStepper::EtdStepper(const SolverConfig& cfg) : cfg_(cfg) {
  cfg_.validate();
  const Grid2D& g = cfg_.grid;
  const std::size_t n = g.spectral_size();
  e_.resize(n);
  e2_.resize(n);
  q_.resize(n);
  f1_.resize(n);
  f2_.resize(n);
  f3_.resize(n);
  dx_.resize(n);
  keep_.resize(n);
  const double h = cfg_.dt;
  for (std::size_t m = 0; m < g.ny; ++m) {
    for (std::size_t j = 0; j < g.nkx(); ++j) {
      const std::size_t i = m * g.nkx() + j;
      const bool kept = !cfg_.dealias || dealias_keep(g, j, m);
      keep_[i] = kept ? 1 : 0;
      // The kx = 0 line carries no dynamics (frozen mean, projected ky != 0);
      // the kx Nyquist column is held fixed to stay real.
      const bool active = j != 0 && !g.kx_nyquist(j);
      dx_[i] = (kept && active) ? -3.0 * g.kx(j) : 0.0;
      const cplx L = active ? linear_symbol(g.kx(j), g.ky(m), cfg_.frame_speed) : cplx{};
      max_symbol_ = std::max(max_symbol_, std::abs(L));
      const auto full = phi_functions(h * L);
      const auto half = phi_functions(0.5 * h * L);
      e_[i] = full.e;
      e2_[i] = half.e;
      q_[i] = 0.5 * h * half.phi1;
      f1_[i] = h * (full.phi1 - 3.0 * full.phi2 + 4.0 * full.phi3);
      f2_[i] = h * (2.0 * full.phi2 - 4.0 * full.phi3);
      f3_[i] = h * (4.0 * full.phi3 - full.phi2);
    }
  }
  phys_.resize(g.size());
  if (cfg_.sponge_width > 0.0) {
    sponge_.resize(g.nx);
    for (std::size_t j = 0; j < g.nx; ++j) {
      const double d = 0.5 * g.lx - std::abs(g.x(j));
      const double c = d < cfg_.sponge_width ? std::cos(0.5 * std::numbers::pi * d / cfg_.sponge_width) : 0.0;
      sponge_[j] = cfg_.sponge_strength * c * c;
    }
    damp_.resize(g.size());
  }
  for (auto* v : {&tmp_, &nv_, &na_, &nb_, &nc_, &a_, &b_, &c_}) v->resize(n);
}

void EtdStepper::nonlinear(const std::vector<cplx>& v, std::vector<cplx>& out) const {
  const Grid2D& g = cfg_.grid;
  RealFft2D fft(g.nx, g.ny);
  if (cfg_.dealias) {
    for (std::size_t i = 0; i < v.size(); ++i) tmp_[i] = keep_[i] ? v[i] : cplx{};
    fft.inverse(tmp_, phys_);
  } else {
    fft.inverse(v, phys_);
  }
  if (!sponge_.empty()) {
    for (std::size_t i = 0; i < phys_.size(); ++i) damp_[i] = -sponge_[i % g.nx] * phys_[i];
  }
  for (double& u : phys_) u *= u;
  fft.forward(phys_, out);
  // -3 i kx (u^2)^
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = cplx(0.0, dx_[i]) * out[i];
  if (!sponge_.empty()) {
    fft.forward(damp_, tmp_);
    for (std::size_t i = 0; i < out.size(); ++i)
      if (dx_[i] != 0.0) out[i] += tmp_[i];
  }
}

void EtdStepper::step_spectral(std::vector<cplx>& v) const {
  const std::size_t n = v.size();
  nonlinear(v, nv_);
  for (std::size_t i = 0; i < n; ++i) a_[i] = e2_[i] * v[i] + q_[i] * nv_[i];
  nonlinear(a_, na_);
  for (std::size_t i = 0; i < n; ++i) b_[i] = e2_[i] * v[i] + q_[i] * na_[i];
  nonlinear(b_, nb_);
  for (std::size_t i = 0; i < n; ++i) c_[i] = e2_[i] * a_[i] + q_[i] * (2.0 * nb_[i] - nv_[i]);
  nonlinear(c_, nc_);
  for (std::size_t i = 0; i < n; ++i) {
    v[i] = e_[i] * v[i] + f1_[i] * nv_[i] + f2_[i] * (na_[i] + nb_[i]) + f3_[i] * nc_[i];
    if (!std::isfinite(v[i].real()) || !std::isfinite(v[i].imag())) throw NonFinite("ETDRK4 step");
  }
}

Field2D EtdStepper::step(const Field2D& state) const {
  if (!(state.grid() == cfg_.grid)) throw InvalidArgument("state grid differs from solver grid");
  std::vector<cplx> v(state.spectrum().begin(), state.spectrum().end());
  step_spectral(v);
  return Field2D::from_spectrum(cfg_.grid, std::move(v));
}

Field2D step_etdrk4(const Field2D& state, const SolverConfig& cfg) { return EtdStepper(cfg).step(state); }

namespace {

ConservedSample conserved_at(double t, const Field2D& u) {
  const auto r = energy_density_integrals(u);
  return {t, r.l2, r.hamiltonian};
}

}  // namespace

Trajectory simulate(const Field2D& u0, const SolverConfig& cfg_in, const SnapshotObserver& observer) {
  cfg_in.validate();
  if (!(u0.grid() == cfg_in.grid)) throw InvalidArgument("initial state grid differs from solver grid");
  Trajectory out;
  SolverConfig cfg = cfg_in;
  std::size_t steps = 0;
  if (cfg.t_end > 0.0) {
    steps = static_cast<std::size_t>(std::ceil(cfg.t_end / cfg.dt - 1e-9));
    const double dt = cfg.t_end / static_cast<double>(steps);
    if (std::abs(dt - cfg.dt) > 1e-12 * cfg.dt) {
      std::ostringstream os;
      os << "t_end is not a multiple of dt; using dt = " << dt;
      out.warnings.push_back(os.str());
    }
    cfg.dt = dt;
  }

  const Field2D start = project_x_mean(u0);
  double stray = 0.0;
  for (std::size_t m = 1; m < cfg.grid.ny; ++m) stray = std::max(stray, std::abs(u0.spectrum()[m * cfg.grid.nkx()]));
  if (stray > 1e-8) {
    out.warnings.push_back("initial data had nonzero x-mean on some transverse lines; projected out");
  }
  auto record = [&](double t, const Field2D& u) {
    out.times.push_back(t);
    out.conserved.push_back(conserved_at(t, u));
    if (cfg.keep_snapshots) out.snapshots.push_back(u);
    return observer ? observer(t, u) : true;
  };
  if (!record(0.0, start) || steps == 0) {
    out.final_state = start;
    return out;
  }

  EtdStepper stepper(cfg);
  if (cfg.dt > 0.4 / stepper.max_symbol()) {
    std::ostringstream os;
    os << "dt exceeds 0.4 / max|symbol| = " << 0.4 / stepper.max_symbol()
       << " (the linear part is integrated exactly)";
    out.warnings.push_back(os.str());
  }
  std::vector<cplx> v(start.spectrum().begin(), start.spectrum().end());
  Field2D current = start;
  for (std::size_t s = 1; s <= steps; ++s) {
    stepper.step_spectral(v);
    const bool store = s % static_cast<std::size_t>(cfg.snapshot_stride) == 0 || s == steps;
    if (!store) continue;
    current = Field2D::from_spectrum(cfg.grid, v);
    const double t = (s == steps) ? cfg.t_end : static_cast<double>(s) * cfg.dt;
    if (!record(t, current)) break;
  }
  out.final_state = current;
  return out;
}

double first_reentry_time(const Grid2D& grid, double c0) { return grid.ly / (2.0 * std::sqrt(8.0 * c0)); }

}  // namespace kp2
