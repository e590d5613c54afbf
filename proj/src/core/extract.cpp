#include "extract.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <limits>

#include "json.hpp"

#include "error.hpp"
#include "fft.hpp"

namespace kp2 {

namespace {

double sech2(double x) {
  const double e = std::exp(-2.0 * std::abs(x));
  return 4.0 * e / ((1.0 + e) * (1.0 + e));
}

// 1 up to reach - 6, smoothly down to 0 at reach (default lx/2 - 2); keeps
// the g2* pairing continuous in x0 on the periodic line.
double seam_taper(double z, double lx, double reach) {
  const double b = reach > 0.0 ? std::min(reach, 0.5 * lx - 2.0) : 0.5 * lx - 2.0, a = b - 6.0;
  if (z <= a) return 1.0;
  if (z >= b) return 0.0;
  const double s = (b - z) / (b - a);
  return s * s * s * (10.0 - 15.0 * s + 6.0 * s * s);
}

double slice_x(std::size_t j, std::size_t n, double lx) {
  return (static_cast<double>(j) - static_cast<double>(n / 2)) * lx / static_cast<double>(n);
}

}  // namespace

CrestFit extract_fit(std::span<const double> slice, double lx, double c_ref, int max_iter) {
  const std::size_t n = slice.size();
  if (n < 8 || !(lx > 0.0)) throw InvalidArgument("slice too short or period not positive");
  const double dx = lx / static_cast<double>(n);
  const auto peak_it = std::max_element(slice.begin(), slice.end());
  const auto jstar = static_cast<std::size_t>(peak_it - slice.begin());
  const double peak = *peak_it;
  std::vector<double> sorted(slice.begin(), slice.end());
  std::nth_element(sorted.begin(), sorted.begin() + static_cast<long>(n / 2), sorted.end());
  const double median = sorted[n / 2];
  if (!std::isfinite(peak) || peak - median < 0.5 * c_ref) throw NoCrest(peak - median);

  const double kappa0 = std::sqrt(peak / 2.0);
  const auto half = static_cast<long>(std::ceil(6.0 / kappa0 / dx));
  if (2 * half + 1 > static_cast<long>(n)) throw InvalidArgument("fit window exceeds the slice");
  const double xc = slice_x(jstar, n, lx);

  CrestFit f;
  f.c = peak;
  f.x0 = xc;
  for (int it = 1; it <= max_iter; ++it) {
    double a11 = 0, a12 = 0, a22 = 0, b1 = 0, b2 = 0;
    for (long d = -half; d <= half; ++d) {
      const auto j = static_cast<std::size_t>((static_cast<long>(jstar) + d + static_cast<long>(n)) % static_cast<long>(n));
      const double z = xc + static_cast<double>(d) * dx - f.x0;
      const double r = phi(z, f.c) - slice[j];
      const double jc = phi_c_derivative(z, f.c);
      const double jx = -phi_prime(z, f.c);
      a11 += jc * jc;
      a12 += jc * jx;
      a22 += jx * jx;
      b1 -= jc * r;
      b2 -= jx * r;
    }
    const double det = a11 * a22 - a12 * a12;
    if (!(std::abs(det) > 0.0)) throw NoConvergence(it);
    const double dc = (b1 * a22 - b2 * a12) / det;
    const double dxx = (a11 * b2 - a12 * b1) / det;
    f.c += dc;
    f.x0 += dxx;
    f.iterations = it;
    if (!(f.c > 0.0) || !std::isfinite(f.x0)) throw NoConvergence(it);
    if (std::hypot(dc, dxx) < 1e-10) {
      double ss = 0.0;
      for (long d = -half; d <= half; ++d) {
        const auto j = static_cast<std::size_t>((static_cast<long>(jstar) + d + static_cast<long>(n)) % static_cast<long>(n));
        const double r = phi(xc + static_cast<double>(d) * dx - f.x0, f.c) - slice[j];
        ss += r * r;
      }
      f.residual = std::sqrt(ss / static_cast<double>(2 * half + 1));
      f.x0 = wrap_periodic(f.x0, lx);
      return f;
    }
  }
  throw NoConvergence(max_iter);
}

double dual_g1_zero(double z, double c) { return phi(z, c); }

double dual_g2_zero(double z, double c) {
  const double k = std::sqrt(c / 2.0);
  const double kz = k * z;
  return 0.25 * c * (1.0 + std::tanh(kz) + kz * sech2(kz));
}

double tail_offset(double t, double L, double lx) { return -std::min(3.0 * t + L, 0.5 * lx - 2.0); }

std::vector<double> slice_remainder(std::span<const double> slice, double lx, double c, double x0,
                                    const ProjectOptions& opt) {
  const std::size_t n = slice.size();
  const double zb = tail_offset(opt.t, opt.L, lx);
  std::vector<double> v(n);
  for (std::size_t j = 0; j < n; ++j) {
    const double z = wrap_periodic(slice_x(j, n, lx) - x0, lx);
    v[j] = slice[j] - phi(z, c) + psi_cL(wrap_periodic(z - zb, lx), c, 0.0, opt.bump);
  }
  return v;
}

namespace {

std::array<double, 2> pairings(std::span<const double> slice, double lx, double c, double x0, const ProjectOptions& opt) {
  const std::size_t n = slice.size();
  const double dx = lx / static_cast<double>(n);
  const auto v = slice_remainder(slice, lx, c, x0, opt);
  double p1 = 0.0, p2 = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    const double z = wrap_periodic(slice_x(j, n, lx) - x0, lx);
    p1 += v[j] * dual_g1_zero(z, c);
    p2 += v[j] * dual_g2_zero(z, c) * seam_taper(z, lx, opt.reach);
  }
  return {p1 * dx, p2 * dx};
}

}  // namespace

ProjectedRow project_slice(std::span<const double> slice, double lx, double c_guess, double x_guess,
                           const ProjectOptions& opt) {
  if (!(c_guess > 0.0)) throw InvalidArgument("amplitude guess must be positive");
  ProjectedRow r{c_guess, x_guess, 0, 0.0, 0.0};
  for (int it = 0;; ++it) {
    const auto p = pairings(slice, lx, r.c, r.x0, opt);
    r.p1 = p[0];
    r.p2 = p[1];
    r.iterations = it;
    if (std::abs(p[0]) < opt.tol && std::abs(p[1]) < opt.tol) break;
    if (it >= opt.max_iter) throw NoConvergence(it);
    const double hc = 1e-6 * std::max(1.0, r.c), hx = 1e-6;
    const auto pcp = pairings(slice, lx, r.c + hc, r.x0, opt), pcm = pairings(slice, lx, r.c - hc, r.x0, opt);
    const auto pxp = pairings(slice, lx, r.c, r.x0 + hx, opt), pxm = pairings(slice, lx, r.c, r.x0 - hx, opt);
    const double j11 = (pcp[0] - pcm[0]) / (2 * hc), j21 = (pcp[1] - pcm[1]) / (2 * hc);
    const double j12 = (pxp[0] - pxm[0]) / (2 * hx), j22 = (pxp[1] - pxm[1]) / (2 * hx);
    const double det = j11 * j22 - j12 * j21;
    if (!(std::abs(det) > 0.0)) throw NoConvergence(it);
    r.c -= (p[0] * j22 - p[1] * j12) / det;
    r.x0 -= (j11 * p[1] - j21 * p[0]) / det;
    if (!(r.c > 0.0) || !std::isfinite(r.x0)) throw NoConvergence(it);
  }
  return r;
}

ProjectedField extract_project(const Field2D& u, std::span<const double> c_guess, std::span<const double> x_guess,
                               const ProjectOptions& opt) {
  const Grid2D& g = u.grid();
  if (c_guess.size() != g.ny || x_guess.size() != g.ny) throw InvalidArgument("guess length differs from ny");
  ProjectedField out;
  out.c.resize(g.ny);
  out.x.resize(g.ny);
  for (std::size_t m = 0; m < g.ny; ++m) {
    const auto r = project_slice(u.row(m), g.lx, c_guess[m], x_guess[m], opt);
    out.c[m] = r.c;
    out.x[m] = r.x0;
    out.max_iterations = std::max(out.max_iterations, r.iterations);
  }
  return out;
}

std::vector<double> unwrap_positions(std::span<const double> x, std::span<const double> c, double lx) {
  const std::size_t n = x.size();
  if (c.size() != n) throw InvalidArgument("position and amplitude rows differ in length");
  std::vector<double> out(x.begin(), x.end());
  if (n == 0) return out;
  const auto anchor = static_cast<std::size_t>(std::max_element(c.begin(), c.end()) - c.begin());
  for (std::size_t s = 1; s < n; ++s) {
    const std::size_t m = (anchor + s) % n, prev = (anchor + s - 1) % n;
    out[m] = x[m] + lx * std::round((out[prev] - x[m]) / lx);
  }
  return out;
}

ModulationTrack extract_track(std::span<const Field2D> snapshots, std::span<const double> times, double frame_speed,
                              ExtractMethod method, const ProjectOptions& opt) {
  if (snapshots.size() != times.size() || snapshots.empty()) throw InvalidArgument("snapshots and times differ");
  const Grid2D& g = snapshots.front().grid();
  ModulationTrack tr;
  tr.ly = g.ly;
  tr.ny = g.ny;
  tr.frame_speed = frame_speed;
  for (std::size_t k = 0; k < snapshots.size(); ++k) {
    if (!(snapshots[k].grid() == g)) throw InvalidArgument("snapshots use different grids");
    std::vector<double> c(g.ny), x(g.ny);
    for (std::size_t m = 0; m < g.ny; ++m) {
      const auto f = extract_fit(snapshots[k].row(m), g.lx);
      c[m] = f.c;
      x[m] = f.x0;
    }
    if (method == ExtractMethod::Project) {
      ProjectOptions o = opt;
      o.t = times[k];
      // start from the unwrapped fit so that each Newton solve stays on its branch
      const auto p = extract_project(snapshots[k], c, x, o);
      c = p.c;
      x = p.x;
    }
    x = unwrap_positions(x, c, g.lx);
    if (!tr.x.empty()) {
      double mp = 0, mc = 0;
      for (std::size_t m = 0; m < g.ny; ++m) {
        mp += tr.x.back()[m];
        mc += x[m];
      }
      const double jump = g.lx * std::round((mp - mc) / static_cast<double>(g.ny) / g.lx);
      for (double& v : x) v += jump;
    }
    tr.append(times[k], std::move(c), std::move(x));
  }
  return tr;
}

Field2D shift_rows(const Field2D& f, std::span<const double> shifts) {
  const Grid2D& g = f.grid();
  if (shifts.size() != g.ny) throw InvalidArgument("one shift per row expected");
  RealFft1D fft(g.nx);
  std::vector<double> out(g.size());
  std::vector<cplx> c(g.nkx());
  std::vector<double> row(g.nx);
  for (std::size_t m = 0; m < g.ny; ++m) {
    const auto r = f.row(m);
    if (shifts[m] == 0.0) {
      std::copy(r.begin(), r.end(), out.begin() + static_cast<long>(m * g.nx));
      continue;
    }
    fft.forward(r, c);
    for (std::size_t j = 0; j < g.nkx(); ++j) {
      c[j] = g.kx_nyquist(j) ? cplx{} : c[j] * std::exp(cplx(0.0, g.kx(j) * shifts[m]));
    }
    fft.inverse(c, row);
    std::copy(row.begin(), row.end(), out.begin() + static_cast<long>(m * g.nx));
  }
  return Field2D::from_values(g, std::move(out));
}

Decomposition build_decomposition(const Field2D& u, std::span<const double> c, std::span<const double> x,
                                  const Field2D& v1_field, const ProjectOptions& opt) {
  const Grid2D& g = u.grid();
  if (c.size() != g.ny || x.size() != g.ny) throw InvalidArgument("track row length differs from ny");
  const Field2D us = shift_rows(u, x);
  const double zb = tail_offset(opt.t, opt.L, g.lx);
  std::vector<double> v(g.size());
  for (std::size_t m = 0; m < g.ny; ++m) {
    for (std::size_t j = 0; j < g.nx; ++j) {
      const double z = g.x(j);
      v[m * g.nx + j] = us.at(j, m) - phi(z, c[m]) + psi_cL(wrap_periodic(z - zb, g.lx), c[m], 0.0, opt.bump);
    }
  }
  Decomposition d;
  d.v = Field2D::from_values(g, std::move(v));
  if (v1_field.grid().size() == 0) {
    d.v1 = Field2D(g);
  } else {
    if (!(v1_field.grid() == g)) throw InvalidArgument("v1 grid differs from field grid");
    d.v1 = shift_rows(v1_field, x);
  }
  d.v2 = d.v - d.v1;
  return d;
}

PhaseDiagnostics phase_diagnostics(const ModulationTrack& track, double c0, double delta) {
  track.validate();
  if (track.size() == 0) throw ConeEmpty();
  if (!(c0 > 0.0) || !(delta >= 0.0)) throw InvalidArgument("c0 must be positive and delta non-negative");
  const double speed = std::sqrt(8.0 * c0);
  const double drift = track.frame_speed - 2.0 * c0;
  const double t0 = track.times.front(), t1 = track.times.back();
  const double late = t0 + 2.0 * (t1 - t0) / 3.0;
  PhaseDiagnostics d;
  std::vector<double> inside;
  std::vector<std::pair<std::size_t, std::size_t>> inside_idx;
  for (std::size_t k = 0; k < track.size(); ++k) {
    const double t = track.times[k];
    for (std::size_t m = 0; m < track.ny; ++m) {
      const double xt = track.x[k][m] + drift * t;
      d.sup_shift = std::max(d.sup_shift, std::abs(xt));
      if (t < late - 1e-12) continue;
      const double ay = std::abs(track.y(m));
      const double r_in = (speed - delta) * t;
      if (r_in > 0.0 && ay <= r_in) {
        inside.push_back(xt);
      } else if (ay >= (speed + delta) * t) {
        d.outside_sup = std::max(d.outside_sup, std::abs(xt));
        ++d.outside_samples;
      }
    }
  }
  if (inside.empty()) throw ConeEmpty();
  d.inside_samples = inside.size();
  std::vector<double> sorted = inside;
  std::sort(sorted.begin(), sorted.end());
  const std::size_t n = sorted.size();
  d.plateau_h = n % 2 ? sorted[n / 2] : 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]);
  for (double v : inside) d.inside_dev = std::max(d.inside_dev, std::abs(v - d.plateau_h));
  return d;
}

std::vector<double> k_kernel(const Field2D& v1, std::span<const double> c, double eta0) {
  const Grid2D& g = v1.grid();
  if (c.size() != g.ny) throw InvalidArgument("amplitude row length differs from ny");
  std::vector<double> row(g.ny);
  for (std::size_t m = 0; m < g.ny; ++m) {
    double s = 0.0;
    for (std::size_t j = 0; j < g.nx; ++j) s += v1.at(j, m) * phi(g.x(j), c[m]);
    row[m] = 0.5 * s * g.dx();
  }
  return band_limit(row, g.ly, eta0);
}

std::vector<double> outside_cone_series(const ModulationTrack& track, double c0, double delta) {
  track.validate();
  if (!(c0 > 0.0) || !(delta >= 0.0)) throw InvalidArgument("c0 must be positive and delta non-negative");
  const double speed = std::sqrt(8.0 * c0);
  const double drift = track.frame_speed - 2.0 * c0;
  std::vector<double> out(track.size(), std::numeric_limits<double>::quiet_NaN());
  for (std::size_t k = 0; k < track.size(); ++k) {
    const double t = track.times[k];
    for (std::size_t m = 0; m < track.ny; ++m) {
      if (std::abs(track.y(m)) < (speed + delta) * t) continue;
      const double v = std::abs(track.x[k][m] + drift * t);
      out[k] = std::isnan(out[k]) ? v : std::max(out[k], v);
    }
  }
  return out;
}

std::string format_phase_report(const PhaseDiagnostics& d) {
  nlohmann::ordered_json j;
  j["sup_shift"] = d.sup_shift;
  j["plateau_h"] = d.plateau_h;
  j["inside_dev"] = d.inside_dev;
  j["outside_sup"] = d.outside_sup;
  j["inside_samples"] = d.inside_samples;
  j["outside_samples"] = d.outside_samples;
  return j.dump(2) + "\n";
}

}  // namespace kp2
