#include "experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <fstream>
#include <future>
#include <iomanip>
#include <limits>
#include <numbers>
#include <sstream>
#include <thread>

#include "burgers.hpp"
#include "error.hpp"
#include "rng.hpp"
#include "soliton.hpp"

namespace kp2 {

namespace {

constexpr double nan_v = std::numeric_limits<double>::quiet_NaN();

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char ch) { return std::tolower(ch); });
  return s;
}

std::size_t worker_count(std::size_t requested, std::size_t jobs) {
  std::size_t w = requested ? requested : std::max(1u, std::thread::hardware_concurrency());
  return std::max<std::size_t>(1, std::min(w, jobs));
}

// Runs f(0..n-1) on a small pool; the first exception is rethrown after join.
template <class F>
void parallel_for(std::size_t n, std::size_t threads, F&& f) {
  if (n == 0) return;
  const std::size_t w = worker_count(threads, n);
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(w);
  std::vector<std::thread> pool;
  pool.reserve(w);
  for (std::size_t i = 0; i < w; ++i) {
    pool.emplace_back([&, i] {
      try {
        for (std::size_t k = next++; k < n; k = next++) f(k);
      } catch (...) {
        errors[i] = std::current_exception();
        next = n;
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

std::ofstream open_csv(const std::filesystem::path& path) {
  std::ofstream os(path);
  if (!os) throw IoError("cannot open " + path.string());
  os.precision(12);
  return os;
}

void finish(std::ofstream& os, const std::filesystem::path& path) {
  if (!os) throw IoError("write failed: " + path.string());
}

double ls_slope(std::span<const double> t, std::span<const double> v) {
  const double n = static_cast<double>(t.size());
  double st = 0, sv = 0, stt = 0, stv = 0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    st += t[i];
    sv += v[i];
    stt += t[i] * t[i];
    stv += t[i] * v[i];
  }
  const double den = n * stt - st * st;
  return den > 0.0 ? (n * stv - st * sv) / den : nan_v;
}

std::vector<double> log_times(double lo, double hi, std::size_t n) {
  std::vector<double> ts(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double s = n == 1 ? 0.0 : static_cast<double>(i) / static_cast<double>(n - 1);
    ts[i] = lo * std::pow(hi / lo, s);
  }
  return ts;
}

double simpson(const std::function<double(double)>& f, double a, double b, std::size_t n) {
  const double h = (b - a) / static_cast<double>(n);
  double s = f(a) + f(b);
  for (std::size_t i = 1; i < n; ++i) s += (i % 2 ? 4.0 : 2.0) * f(a + static_cast<double>(i) * h);
  return s * h / 3.0;
}

Check make_check(std::string name, double value, std::string bound, bool pass) {
  return {std::move(name), value, std::move(bound), pass};
}

std::string fmt(double v) {
  std::ostringstream os;
  os << std::setprecision(6) << v;
  return os.str();
}

std::string compose_report(const std::string& command, const ExperimentConfig& cfg, std::uint64_t seed,
                           const std::vector<std::string>& info, const std::vector<Check>& checks) {
  std::ostringstream os;
  os << "command: " << command << '\n' << "experiment: " << cfg.name << '\n' << "seed: " << seed << "\n\n";
  for (const auto& line : info) os << line << '\n';
  if (!info.empty()) os << '\n';
  bool ok = true;
  for (const auto& c : checks) {
    os << (c.pass ? "PASS " : "FAIL ") << c.name << " = " << fmt(c.value) << "  (" << c.bound << ")\n";
    ok = ok && c.pass;
  }
  os << "\nresult: " << (ok ? "PASS" : "FAIL") << '\n';
  return os.str();
}

// Gaussian bump G(x, y) = exp(-x^2/wx^2 - y^2/wy^2), or its x-derivative.
double gaussian_term(double x, double y, const PerturbationSpec& p) {
  const double g = std::exp(-x * x / (p.wx * p.wx) - y * y / (p.wy * p.wy));
  return p.derivative ? -2.0 * x / (p.wx * p.wx) * g : g;
}

double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b, double period) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = period > 0.0 ? wrap_periodic(a[i] - b[i], period) : a[i] - b[i];
    m = std::max(m, std::abs(d));
  }
  return m;
}

double sup_shift(const ModulationTrack& track, double c0) {
  double s = 0.0;
  for (std::size_t k = 0; k < track.size(); ++k) {
    const double drift = (track.frame_speed - 2.0 * c0) * track.times[k];
    for (double x : track.x[k]) s = std::max(s, std::abs(x + drift));
  }
  return s;
}

void write_track_pair(const std::filesystem::path& out, const PipelineResult& r, const ExperimentConfig& cfg) {
  write_track_csv(out / "track.csv", r.track(cfg.method), cfg.modulation.eta0);
  write_track_csv(out / "track_fit.csv", r.fit, cfg.modulation.eta0);
  write_track_csv(out / "track_project.csv", r.project, cfg.modulation.eta0);
}

// ---------------------------------------------------------------- commands

CommandResult cmd_verify_eigen(const ExperimentConfig& cfg, const std::filesystem::path& out, std::uint64_t seed) {
  std::vector<ModePair> pairs(cfg.etas.size());
  parallel_for(pairs.size(), cfg.threads, [&](std::size_t i) { pairs[i] = make_mode_pair(cfg.etas[i], cfg.window); });

  std::vector<Check> checks;
  std::vector<std::string> info{"eta,residual,adjoint_residual,Re lambda,Im lambda"};
  const auto path = out / "eigen_residuals.csv";
  auto os = open_csv(path);
  os << "eta,residual,adjoint_residual,lambda_re,lambda_im,certified\n";
  for (const auto& p : pairs) {
    os << p.eta << ',' << p.residual << ',' << p.adjoint_residual << ',' << p.lambda.real() << ','
       << p.lambda.imag() << ',' << (p.certified ? 1 : 0) << '\n';
    info.push_back(fmt(p.eta) + "," + fmt(p.residual) + "," + fmt(p.adjoint_residual) + "," +
                   fmt(p.lambda.real()) + "," + fmt(p.lambda.imag()));
    checks.push_back(make_check("residual eta=" + fmt(p.eta), p.residual, "< 1e-6", p.residual < 1e-6));
    checks.push_back(make_check("adjoint residual eta=" + fmt(p.eta), p.adjoint_residual, "< 1e-6",
                                p.adjoint_residual < 1e-6));
  }
  finish(os, path);

  // translation mode: L(0) phi' = 0
  std::vector<cplx> dphi(cfg.window.n);
  for (std::size_t j = 0; j < dphi.size(); ++j) dphi[j] = phi_prime(cfg.window.x(j), cfg.c0);
  const auto r = apply_L_eta(dphi, 0.0, cfg.window, cfg.c0);
  const double tr = weighted_norm(r, cfg.window, 1.0);
  checks.push_back(make_check("translation mode |L(0) phi'|", tr, "< 1e-8", tr < 1e-8));

  write_mode_table(out / "modes.csv", cfg.etas, cfg.window);

  CommandResult res{"verify-eigen", std::move(checks), {}};
  res.report = compose_report(res.command, cfg, seed, info, res.checks);
  return res;
}

CommandResult cmd_kernels(const ExperimentConfig& cfg, const std::filesystem::path& out, std::uint64_t seed) {
  const auto ts = log_times(cfg.t_min, cfg.t_max, cfg.t_samples);
  ModulationConstants cmp = cfg.modulation;
  cmp.eta0 = cfg.comparator_eta0;
  const auto profile = comparator_profile(cmp);

  std::vector<KernelSample> samples(ts.size());
  std::vector<ComparatorResiduals> resid(ts.size());
  parallel_for(ts.size(), cfg.threads, [&](std::size_t i) {
    auto s = kernels_at(ts[i], cfg.modulation);
    // only the norms are kept
    s.K1 = s.K2 = s.K3 = s.dyK3 = s.K1p = s.K1m = s.K31 = s.K32 = KernelTable{};
    samples[i] = std::move(s);
    resid[i] = asymptotic_comparators(ts[i], profile, cmp);
  });
  write_kernel_norms(out / "kernel_norms.csv", samples);

  auto column = [&](auto get) {
    std::vector<double> v;
    for (const auto& s : samples) v.push_back(get(s));
    return v;
  };
  auto rcolumn = [&](auto get) {
    std::vector<double> v;
    for (const auto& r : resid) v.push_back(get(r));
    return v;
  };

  std::vector<SlopeRow> rows{
      {"K2_L1", -0.5, decay_exponent_fit(ts, column([](auto& s) { return s.n2.l1; }))},
      {"K1_L2", -0.25, decay_exponent_fit(ts, column([](auto& s) { return s.n1.l2; }))},
      {"K2_L2", -0.75, decay_exponent_fit(ts, column([](auto& s) { return s.n2.l2; }))},
      {"K1_L1", 0.0, decay_exponent_fit(ts, column([](auto& s) { return s.n1.l1; }))},
      {"dyK3_L1", 0.0, decay_exponent_fit(ts, column([](auto& s) { return s.n3y.l1; }))},
      {"asymp1", -0.5, decay_exponent_fit(ts, rcolumn([](auto& r) { return r.asymp1; }))},
      {"asymp2", -1.0, decay_exponent_fit(ts, rcolumn([](auto& r) { return r.asymp2; }))},
      {"asymp3", -1.0, decay_exponent_fit(ts, rcolumn([](auto& r) { return r.asymp3; }))},
      {"pf1", -1.0, decay_exponent_fit(ts, rcolumn([](auto& r) { return r.pf1; }))},
      {"pf2", -1.0, decay_exponent_fit(ts, rcolumn([](auto& r) { return r.pf2; }))},
      {"pf3", -0.5, decay_exponent_fit(ts, rcolumn([](auto& r) { return r.pf3; }))},
  };
  write_slope_report(out / "slope_report.csv", rows);

  std::vector<Check> checks;
  std::vector<std::string> info{"t samples: " + std::to_string(ts.size()) + " log-spaced in [" + fmt(cfg.t_min) +
                                ", " + fmt(cfg.t_max) + "]"};
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& r = rows[i];
    info.push_back(r.kernel + ": fitted " + fmt(r.fit.slope) + ", claimed " + fmt(r.claimed) + ", 95% CI [" +
                   fmt(r.fit.ci_lo) + ", " + fmt(r.fit.ci_hi) + "]");
    if (i < 5) {
      checks.push_back(make_check("slope " + r.kernel, r.fit.slope, "within 0.1 of " + fmt(r.claimed),
                                  std::abs(r.fit.slope - r.claimed) <= 0.1));
    }
  }
  checks.push_back(make_check("slope pf3", rows[10].fit.slope, "<= -0.4", rows[10].fit.slope <= -0.4));
  checks.push_back(make_check("slope asymp2", rows[6].fit.slope, "<= -0.8", rows[6].fit.slope <= -0.8));

  // phase-limit integral with a unit-mass separable source
  const double tp = 50.0;
  const std::vector<double> ys{0.0, 4.5 * tp, -4.5 * tp};
  const auto pl = phase_limit_integral(
      [](double s, double y) { return std::exp(-s) * std::exp(-y * y) / std::sqrt(std::numbers::pi); }, tp, ys);
  const double rel = std::abs(pl.values[0] - 0.5) / 0.5;
  const double ext = std::max(std::abs(pl.values[1]), std::abs(pl.values[2]));
  checks.push_back(make_check("phase limit interior rel. error", rel, "<= 0.05", rel <= 0.05));
  checks.push_back(make_check("phase limit exterior", ext, "< 0.02", ext < 0.02));

  double worst = 0.0;
  for (double t : {0.0, 1.0, 10.0, 50.0}) worst = std::max(worst, high_freq_decay_check(t, cfg.modulation));
  checks.push_back(make_check("high-frequency ratio sup", worst, "< 2", std::isfinite(worst) && worst < 2.0));

  CommandResult res{"kernels", std::move(checks), {}};
  res.report = compose_report(res.command, cfg, seed, info, res.checks);
  return res;
}

CommandResult cmd_simulate(const ExperimentConfig& cfg, const std::filesystem::path& out, std::uint64_t seed) {
  const auto r = run_pipeline(cfg, seed, true);
  const auto& tr = r.track(cfg.method);
  const double eps = std::abs(cfg.perturbation.epsilon);
  const bool unperturbed = cfg.perturbation.kind == PerturbationKind::None || eps == 0.0;

  {
    const auto path = out / "conserved.csv";
    auto os = open_csv(path);
    os << "t,l2,hamiltonian\n";
    for (const auto& s : r.u.conserved) os << s.t << ',' << s.l2 << ',' << s.hamiltonian << '\n';
    finish(os, path);
  }
  write_track_pair(out, r, cfg);
  {
    const auto path = out / "extraction_agreement.csv";
    auto os = open_csv(path);
    os << "t,max_dc,max_dx\n";
    for (std::size_t k = 0; k < r.max_dc.size(); ++k)
      os << r.u.times[k] << ',' << r.max_dc[k] << ',' << r.max_dx[k] << '\n';
    finish(os, path);
  }
  {
    const auto path = out / "decomposition.csv";
    auto os = open_csv(path);
    os << "t,v_L2,v2_L2,k_L2\n";
    for (std::size_t k = 0; k < r.v_l2.size(); ++k)
      os << r.u.times[k] << ',' << r.v_l2[k] << ',' << r.v2_l2[k] << ',' << r.k_l2[k] << '\n';
    finish(os, path);
  }

  std::vector<Check> checks;
  std::vector<std::string> info;
  for (const auto& w : r.u.warnings) info.push_back("warning: " + w);
  info.push_back("snapshots: " + std::to_string(r.u.times.size()));
  info.push_back("first re-entry time: " + fmt(first_reentry_time(cfg.grid, cfg.c0)));

  if (cfg.save_snapshots) {
    const auto dir = out / "snapshots";
    std::filesystem::create_directories(dir);
    bool exact = true;
    for (std::size_t k = 0; k < r.u.snapshots.size(); ++k) {
      std::ostringstream name;
      name << "u_" << std::setw(4) << std::setfill('0') << k << ".bin";
      write_snapshot(dir / name.str(), r.u.snapshots[k]);
      const auto back = read_snapshot(dir / name.str());
      const auto a = back.values(), b = r.u.snapshots[k].values();
      exact = exact && back.grid() == r.u.snapshots[k].grid() && std::equal(a.begin(), a.end(), b.begin(), b.end());
    }
    checks.push_back(make_check("snapshot roundtrip", exact ? 0.0 : 1.0, "bit-exact", exact));
  }

  if (cfg.sponge_width > 0.0) {
    // the absorbing layer removes radiation, so L2 and H are not conserved
    info.push_back("absorbing layer active: L2 drift " + fmt(r.l2_drift) + ", Hamiltonian drift " + fmt(r.h_drift));
  } else {
    checks.push_back(make_check("L2 relative drift", r.l2_drift, "< 1e-7", r.l2_drift < 1e-7));
    checks.push_back(make_check("Hamiltonian relative drift", r.h_drift, "< 1e-5", r.h_drift < 1e-5));
  }

  double agree = 0.0;
  for (std::size_t k = 0; k < r.max_dc.size(); ++k) agree = std::max({agree, r.max_dc[k], r.max_dx[k]});
  checks.push_back(make_check("fit vs projection, every snapshot", agree, "<= 1e-3", agree <= 1e-3));

  const double shift = sup_shift(tr, cfg.c0);
  if (unperturbed) {
    double dev = shift;
    for (const auto& row : tr.c)
      for (double c : row) dev = std::max(dev, std::abs(c - cfg.c0));
    checks.push_back(make_check("soliton shape error", r.shape_error, "< 1e-6", r.shape_error < 1e-6));
    checks.push_back(make_check("track deviation", dev, "< 1e-6", dev < 1e-6));
  } else {
    checks.push_back(make_check("sup |phase shift|", shift, "<= 10 eps = " + fmt(10.0 * eps), shift <= 10.0 * eps));
  }

  CommandResult res{"simulate", std::move(checks), {}};
  res.report = compose_report(res.command, cfg, seed, info, res.checks);
  return res;
}

CommandResult cmd_compare_profile(const ExperimentConfig& cfg, const std::filesystem::path& out, std::uint64_t seed) {
  const auto r = run_pipeline(cfg, seed, false);
  const auto& tr = r.track(cfg.method);
  const auto st = profile_study(tr, cfg.c0, cfg.t_end);

  std::vector<ProfileDeviation> rows;
  for (std::size_t i = 0; i < st.times.size(); ++i) rows.push_back({st.times[i], st.dev_l2[i], st.dev_normalized[i]});
  write_profile_report(out / "profile_report.csv", rows);
  std::vector<double> ys(tr.ny);
  for (std::size_t m = 0; m < tr.ny; ++m) ys[m] = tr.y(m);
  write_burgers_profiles(out / "burgers_profiles.csv", st.times, ys, st.m_plus, st.m_minus);
  write_track_pair(out, r, cfg);

  std::vector<std::string> info{
      "mass M = " + fmt(st.mass),
      "m_plus = " + fmt(st.m_plus),
      "m_minus = " + fmt(st.m_minus),
      "mean normalized deviation per third: " + fmt(st.third_means[0]) + ", " + fmt(st.third_means[1]) + ", " +
          fmt(st.third_means[2]),
  };
  std::vector<Check> checks{
      make_check("Pearson correlation, final third", st.pearson, ">= 0.8", st.pearson >= 0.8),
      make_check("normalized deviation non-increasing over thirds", st.thirds_nonincreasing ? 1.0 : 0.0,
                 "third means non-increasing", st.thirds_nonincreasing),
  };

  CommandResult res{"compare-profile", std::move(checks), {}};
  res.report = compose_report(res.command, cfg, seed, info, res.checks);
  return res;
}

CommandResult cmd_phase(const ExperimentConfig& cfg, const std::filesystem::path& out, std::uint64_t seed) {
  ExperimentConfig fine = cfg;
  fine.grid = Grid2D::make(2 * cfg.grid.nx, 2 * cfg.grid.ny, cfg.grid.lx, cfg.grid.ly);
  const bool refine = cfg.refine;

  // The base and refined runs are independent; each half of the pool goes to one.
  ExperimentConfig base = cfg;
  if (refine) {
    const std::size_t w = worker_count(cfg.threads, 1u << 10);
    base.threads = std::max<std::size_t>(1, w / 2);
    fine.threads = std::max<std::size_t>(1, w - base.threads);
  }
  auto fine_future = refine ? std::async(std::launch::async, [&] { return run_pipeline(fine, seed, false); })
                            : std::future<PipelineResult>{};
  const auto rb = run_pipeline(base, seed, false);
  const PipelineResult rf = refine ? fine_future.get() : PipelineResult{};

  const auto& tb = rb.track(cfg.method);
  const auto db = phase_diagnostics(tb, cfg.c0, cfg.delta);
  const double eps = cfg.perturbation.epsilon;

  auto write_json = [](const std::filesystem::path& path, const PhaseDiagnostics& d) {
    std::ofstream os(path);
    if (!os) throw IoError("cannot open " + path.string());
    os << format_phase_report(d);
    if (!os) throw IoError("write failed: " + path.string());
  };
  write_json(out / "phase_report.json", db);
  write_track_pair(out, rb, cfg);

  const auto outside = outside_cone_series(tb, cfg.c0, cfg.delta);
  std::vector<double> ot, ov;
  {
    const auto path = out / "outside_cone.csv";
    auto os = open_csv(path);
    os << "t,outside_sup\n";
    for (std::size_t k = 0; k < outside.size(); ++k) {
      if (!std::isfinite(outside[k])) continue;
      os << tb.times[k] << ',' << outside[k] << '\n';
      if (tb.times[k] > 0.0) {
        ot.push_back(tb.times[k]);
        ov.push_back(outside[k]);
      }
    }
    finish(os, path);
  }

  std::vector<std::string> info{
      "plateau h = " + fmt(db.plateau_h),
      "sup |x~| = " + fmt(db.sup_shift),
      "inside deviation = " + fmt(db.inside_dev) + " over " + std::to_string(db.inside_samples) + " samples",
      "outside sup = " + fmt(db.outside_sup) + " over " + std::to_string(db.outside_samples) + " samples",
  };
  std::vector<Check> checks;
  if (eps == 0.0) {
    checks.push_back(make_check("plateau h at eps = 0", db.plateau_h, "|h| <= 1e-9", std::abs(db.plateau_h) <= 1e-9));
  } else {
    const double ratio = db.plateau_h / eps;
    info.push_back("h / eps = " + fmt(ratio));
    checks.push_back(make_check("h / eps (sign of the bump)", ratio, "> 0", ratio > 0.0));
    if (refine) {
      const auto df = phase_diagnostics(rf.track(cfg.method), cfg.c0, cfg.delta);
      write_json(out / "phase_report_refined.json", df);
      const double rf_ratio = df.plateau_h / eps;
      const double change = std::abs(rf_ratio - ratio) / std::abs(ratio);
      info.push_back("refined grid " + std::to_string(fine.grid.nx) + "x" + std::to_string(fine.grid.ny) +
                     ": h / eps = " + fmt(rf_ratio));
      checks.push_back(make_check("h / eps change under refinement", change, "<= 0.2", change <= 0.2));
    }
    const double slope = ot.size() >= 2 ? ls_slope(ot, ov) : nan_v;
    checks.push_back(make_check("outside-cone sup trend (slope)", slope, "<= 0", ot.size() >= 2 && slope <= 0.0));
  }

  CommandResult res{"phase", std::move(checks), {}};
  res.report = compose_report(res.command, cfg, seed, info, res.checks);
  return res;
}

}  // namespace

// ---------------------------------------------------------------- config

const std::vector<std::string>& ExperimentConfig::known_keys() {
  static const std::vector<std::string> keys{
      "experiment.name",       "experiment.seed",         "grid.nx",
      "grid.ny",               "grid.lx",                 "grid.ly",
      "solver.dt",             "solver.t_end",            "solver.sample_every",
      "solver.dealias",        "solver.sponge_width",     "solver.sponge_strength",
      "soliton.c0",              "soliton.L",
      "soliton.bump",          "perturbation.kind",       "perturbation.epsilon",
      "perturbation.wx",       "perturbation.wy",         "perturbation.x0",
      "perturbation.derivative", "perturbation.hypothesis", "perturbation.count",
      "modulation.eta0",       "modulation.alpha",        "modulation.cutoff",
      "kernels.t_min",         "kernels.t_max",           "kernels.samples",
      "kernels.comparator_eta0", "eigen.etas",            "eigen.half_width",
      "eigen.points",          "extract.method",          "extract.reach",
      "phase.delta",           "phase.refine",            "output.snapshots",
      "run.threads",
  };
  return keys;
}

ExperimentConfig ExperimentConfig::from(const Config& c) {
  c.require_known(known_keys());
  ExperimentConfig e;
  auto count = [&](const std::string& key, std::size_t fallback) {
    const long v = c.get_long(key, static_cast<long>(fallback));
    if (v < 0) throw InvalidArgument("config key '" + key + "' must be non-negative");
    return static_cast<std::size_t>(v);
  };

  e.name = c.get_string("experiment.name", e.name);
  e.seed = count("experiment.seed", e.seed);

  e.grid = Grid2D::make(count("grid.nx", e.grid.nx), count("grid.ny", e.grid.ny), c.get_double("grid.lx", e.grid.lx),
                        c.get_double("grid.ly", e.grid.ly));
  e.dt = c.get_double("solver.dt", e.dt);
  e.t_end = c.get_double("solver.t_end", e.t_end);
  e.sample_every = c.get_double("solver.sample_every", e.sample_every);
  e.dealias = c.get_bool("solver.dealias", e.dealias);
  e.sponge_width = c.get_double("solver.sponge_width", e.sponge_width);
  e.sponge_strength = c.get_double("solver.sponge_strength", e.sponge_strength);

  e.c0 = c.get_double("soliton.c0", e.c0);
  e.L = c.get_double("soliton.L", e.L);
  const std::string bump = lower(c.get_string("soliton.bump", "smooth"));
  if (bump == "smooth") e.bump = BumpKind::Smooth;
  else if (bump == "cosine") e.bump = BumpKind::Cosine;
  else throw InvalidArgument("soliton.bump must be smooth or cosine, got '" + bump + "'");

  auto& p = e.perturbation;
  const std::string kind = lower(c.get_string("perturbation.kind", "gaussian"));
  if (kind == "none") p.kind = PerturbationKind::None;
  else if (kind == "gaussian") p.kind = PerturbationKind::Gaussian;
  else if (kind == "random") p.kind = PerturbationKind::Random;
  else if (kind == "bump") p.kind = PerturbationKind::AmplitudeBump;
  else throw InvalidArgument("perturbation.kind must be none, gaussian, random or bump, got '" + kind + "'");
  p.epsilon = c.get_double("perturbation.epsilon", p.epsilon);
  p.wx = c.get_double("perturbation.wx", p.wx);
  p.wy = c.get_double("perturbation.wy", p.wy);
  p.x0 = c.get_double("perturbation.x0", p.x0);
  p.derivative = c.get_bool("perturbation.derivative", p.derivative);
  p.hypothesis = c.get_bool("perturbation.hypothesis", p.hypothesis);
  p.count = count("perturbation.count", p.count);

  e.modulation.eta0 = c.get_double("modulation.eta0", e.modulation.eta0);
  e.alpha = c.get_double("modulation.alpha", e.alpha);
  const std::string cut = lower(c.get_string("modulation.cutoff", "quintic"));
  if (cut == "quintic") e.modulation.cutoff = CutoffKind::Quintic;
  else if (cut == "smooth") e.modulation.cutoff = CutoffKind::Smooth;
  else throw InvalidArgument("modulation.cutoff must be quintic or smooth, got '" + cut + "'");

  e.t_min = c.get_double("kernels.t_min", e.t_min);
  e.t_max = c.get_double("kernels.t_max", e.t_max);
  e.t_samples = count("kernels.samples", e.t_samples);
  e.comparator_eta0 = c.get_double("kernels.comparator_eta0", e.comparator_eta0);

  e.etas = c.get_list("eigen.etas", e.etas);
  e.window.half_width = c.get_double("eigen.half_width", e.window.half_width);
  e.window.n = count("eigen.points", e.window.n);
  e.window.alpha = e.alpha;

  const std::string method = lower(c.get_string("extract.method", "project"));
  if (method == "fit") e.method = ExtractMethod::Fit;
  else if (method == "project") e.method = ExtractMethod::Project;
  else throw InvalidArgument("extract.method must be fit or project, got '" + method + "'");
  e.reach = c.get_double("extract.reach", e.reach);

  e.delta = c.get_double("phase.delta", e.delta);
  e.refine = c.get_bool("phase.refine", e.refine);
  e.save_snapshots = c.get_bool("output.snapshots", e.save_snapshots);
  e.threads = count("run.threads", e.threads);

  e.validate();
  return e;
}

void ExperimentConfig::validate() const {
  const auto& p = perturbation;
  if (!(std::abs(p.epsilon) <= 0.1)) throw InvalidArgument("perturbation.epsilon must satisfy |eps| <= 0.1");
  if (p.hypothesis && !p.derivative)
    throw InvalidArgument("perturbation.hypothesis requires the x-derivative form (derivative = true)");
  if (p.hypothesis && p.kind == PerturbationKind::AmplitudeBump)
    throw InvalidArgument("perturbation.hypothesis applies to gaussian or random perturbations only");
  if (!(p.wx > 0.0) || !(p.wy > 0.0)) throw InvalidArgument("perturbation widths must be positive");
  if (p.kind == PerturbationKind::Random && p.count == 0) throw InvalidArgument("perturbation.count must be >= 1");
  if (!(c0 > 0.0)) throw InvalidArgument("soliton.c0 must be positive");
  if (!(L > 0.0)) throw InvalidArgument("soliton.L must be positive");
  if (p.kind == PerturbationKind::AmplitudeBump && !(L + 1.0 < 0.5 * grid.lx))
    throw InvalidArgument("soliton.L + 1 must stay inside the half window lx / 2");
  if (!(dt > 0.0)) throw InvalidArgument("solver.dt must be positive");
  if (!(t_end >= 0.0)) throw InvalidArgument("solver.t_end must be non-negative");
  if (!(sample_every >= dt)) throw InvalidArgument("solver.sample_every must be at least solver.dt");
  const double steps = sample_every / dt;
  if (std::abs(steps - std::round(steps)) > 1e-9 * steps)
    throw InvalidArgument("solver.sample_every must be a multiple of solver.dt");
  if (!(t_min > 0.0) || !(t_max > t_min)) throw InvalidArgument("kernels need 0 < t_min < t_max");
  if (t_samples < 8) throw InvalidArgument("kernels.samples must be >= 8");
  if (!(comparator_eta0 > 0.0)) throw InvalidArgument("kernels.comparator_eta0 must be positive");
  for (double eta : etas)
    if (!(eta != 0.0 && std::isfinite(eta))) throw InvalidArgument("eigen.etas must be finite and nonzero");
  if (!(window.half_width > 0.0) || window.n < 16) throw InvalidArgument("eigen window too small");
  if (!(delta > 0.0)) throw InvalidArgument("phase.delta must be positive");
  if (!(reach >= 0.0)) throw InvalidArgument("extract.reach must be non-negative");
  if (!(sponge_width >= 0.0) || !(sponge_width < 0.5 * grid.lx))
    throw InvalidArgument("solver.sponge_width must lie in [0, lx/2)");
  if (sponge_width > 0.0 && !(sponge_strength > 0.0 && sponge_strength * dt < 1.0))
    throw InvalidArgument("solver.sponge_strength must be positive with sponge_strength * dt < 1");
  modulation.validate();
}

// ---------------------------------------------------------------- fields

std::vector<double> bump_profile(std::span<const double> ys, double eta0) {
  ModulationConstants k;
  k.eta0 = eta0;
  k.cutoff = CutoffKind::Smooth;
  k.validate();
  const double top = 0.75 * eta0;
  std::vector<double> a(ys.size());
  for (std::size_t i = 0; i < ys.size(); ++i) {
    const double y = ys[i];
    // a(y) = (2 / sqrt(2 pi)) int_0^top zeta(eta) cos(y eta) d eta
    const std::size_t n = 2 * static_cast<std::size_t>(std::max(200.0, 8.0 * std::abs(y) * top));
    a[i] = 2.0 / std::sqrt(2.0 * std::numbers::pi) *
           simpson([&](double eta) { return k.chi1(eta) * std::cos(y * eta); }, 0.0, top, n);
  }
  return a;
}

Field2D initial_field(const ExperimentConfig& cfg, std::uint64_t seed) {
  const auto& g = cfg.grid;
  const auto& p = cfg.perturbation;
  const double eps = p.epsilon;
  const Field2D base = soliton_field(g, cfg.c0);

  switch (p.kind) {
    case PerturbationKind::None:
      return base;
    case PerturbationKind::Gaussian: {
      if (eps == 0.0) return base;
      const auto pert = Field2D::sample(g, [&](double x, double y) { return gaussian_term(x - p.x0, y, p); });
      return base + eps * pert;
    }
    case PerturbationKind::Random: {
      if (eps == 0.0) return base;
      SplitMix64 rng(seed);
      struct Term { double xc, yc, w; };
      std::vector<Term> terms(p.count);
      for (auto& t : terms) {
        t.xc = p.x0 + (2.0 * rng.uniform() - 1.0) * p.wx;
        t.yc = (rng.uniform() - 0.5) * g.ly / 4.0;
        t.w = rng.normal();
      }
      const double scale = eps / std::sqrt(static_cast<double>(p.count));
      const auto pert = Field2D::sample(g, [&](double x, double y) {
        double s = 0.0;
        for (const auto& t : terms) s += t.w * gaussian_term(x - t.xc, wrap_periodic(y - t.yc, g.ly), p);
        return s;
      });
      return base + scale * pert;
    }
    case PerturbationKind::AmplitudeBump: {
      std::vector<double> ys(g.ny);
      for (std::size_t m = 0; m < g.ny; ++m) ys[m] = g.y(m);
      const auto a = bump_profile(ys, cfg.modulation.eta0);
      std::vector<double> cy(g.ny);
      for (std::size_t m = 0; m < g.ny; ++m) {
        cy[m] = cfg.c0 + eps * a[m];
        if (!(cy[m] > 0.0)) throw AmplitudeCollapse(cy[m]);
      }
      std::vector<double> v(g.size());
      for (std::size_t m = 0; m < g.ny; ++m) {
        for (std::size_t j = 0; j < g.nx; ++j) {
          const double x = g.x(j);
          v[m * g.nx + j] = phi(x, cy[m]) - psi_cL(x, cy[m], cfg.L, cfg.bump);
        }
      }
      return Field2D::from_values(g, std::move(v));
    }
  }
  throw InvalidArgument("unknown perturbation kind");
}

// ---------------------------------------------------------------- pipeline

PipelineResult run_pipeline(const ExperimentConfig& cfg, std::uint64_t seed, bool auxiliary_flow) {
  cfg.validate();
  const auto& g = cfg.grid;
  const Field2D u0 = initial_field(cfg, seed);

  SolverConfig sc;
  sc.grid = g;
  sc.dt = cfg.dt;
  sc.frame_speed = cfg.frame_speed();
  sc.t_end = cfg.t_end;
  sc.snapshot_stride = static_cast<int>(std::llround(cfg.sample_every / cfg.dt));
  sc.dealias = cfg.dealias;
  sc.keep_snapshots = true;
  sc.sponge_width = cfg.sponge_width;
  sc.sponge_strength = cfg.sponge_strength;

  PipelineResult r;
  const auto dec = initial_decomposition(u0 - soliton_field(g, cfg.c0), cfg.c0);
  r.c1 = dec.c1;

  std::future<Trajectory> aux;
  if (auxiliary_flow) aux = std::async(std::launch::async, [&] { return simulate(dec.v_star, sc); });
  r.u = simulate(u0, sc);

  ProjectOptions po;
  po.L = cfg.L;
  po.bump = cfg.bump;
  po.reach = cfg.reach;
  auto fit = std::async(std::launch::async,
                        [&] { return extract_track(r.u.snapshots, r.u.times, sc.frame_speed, ExtractMethod::Fit, po); });
  r.project = extract_track(r.u.snapshots, r.u.times, sc.frame_speed, ExtractMethod::Project, po);
  r.fit = fit.get();

  for (std::size_t k = 0; k < r.u.times.size(); ++k) {
    r.max_dc.push_back(max_abs_diff(r.fit.c[k], r.project.c[k], 0.0));
    r.max_dx.push_back(max_abs_diff(r.fit.x[k], r.project.x[k], g.lx));
  }

  const auto& c0s = r.u.conserved.front();
  for (const auto& s : r.u.conserved) {
    r.l2_drift = std::max(r.l2_drift, std::abs(s.l2 - c0s.l2) / c0s.l2);
    r.h_drift = std::max(r.h_drift, std::abs(s.hamiltonian - c0s.hamiltonian) / std::abs(c0s.hamiltonian));
  }
  const double norm0 = l2_quadrature(u0);
  for (const auto& snap : r.u.snapshots)
    r.shape_error = std::max(r.shape_error, std::sqrt(l2_quadrature(snap - u0) / norm0));

  if (auxiliary_flow) {
    const Trajectory v1 = aux.get();
    const auto& tr = r.track(cfg.method);
    const std::size_t n = r.u.times.size();
    r.v_l2.assign(n, 0.0);
    r.v2_l2.assign(n, 0.0);
    r.k_l2.assign(n, 0.0);
    parallel_for(n, cfg.threads, [&](std::size_t k) {
      ProjectOptions o = po;
      o.t = r.u.times[k];
      const auto d = build_decomposition(r.u.snapshots[k], tr.c[k], tr.x[k], v1.snapshots[k], o);
      r.v_l2[k] = std::sqrt(l2_quadrature(d.v));
      r.v2_l2[k] = std::sqrt(l2_quadrature(d.v2));
      const auto kk = k_kernel(d.v1, tr.c[k], cfg.modulation.eta0);
      double s = 0.0;
      for (double v : kk) s += v * v;
      r.k_l2[k] = std::sqrt(s * g.dy());
    });
  }
  return r;
}

// ---------------------------------------------------------------- profile study

double pearson(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size() || a.empty()) throw InvalidArgument("pearson needs two equally long non-empty samples");
  const double n = static_cast<double>(a.size());
  double ma = 0, mb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ma += a[i];
    mb += b[i];
  }
  ma /= n;
  mb /= n;
  double sab = 0, saa = 0, sbb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  if (saa == 0.0 || sbb == 0.0) return nan_v;
  return sab / std::sqrt(saa * sbb);
}

ProfileStudy profile_study(const ModulationTrack& track, double c0, double t_end) {
  track.validate();
  if (track.size() == 0 || !(t_end > 0.0)) throw InvalidArgument("profile study needs samples and t_end > 0");
  ProfileStudy st;
  const double dy = track.ly / static_cast<double>(track.ny);
  for (double c : track.c[0]) st.mass += 0.25 * (c - c0) * dy;
  st.m_plus = m_from_mass(st.mass, 1);
  st.m_minus = m_from_mass(st.mass, -1);

  const BurgersProfile plus{st.m_plus, 1}, minus{st.m_minus, -1};
  auto wrap = [&](double y) { return y - track.ly * std::floor(y / track.ly + 0.5); };
  std::vector<double> a, b;
  std::array<double, 3> sums{};
  std::array<std::size_t, 3> counts{};
  for (std::size_t k = 0; k < track.size(); ++k) {
    const double t = track.times[k];
    if (!(t > 0.0)) continue;
    const auto d = profile_comparator(track, st.m_plus, st.m_minus, t, c0);
    st.times.push_back(t);
    st.dev_l2.push_back(d.dev_l2);
    st.dev_normalized.push_back(d.dev_normalized);
    const auto third = std::min<std::size_t>(2, static_cast<std::size_t>(std::ceil(3.0 * t / t_end - 1e-9)) - 1);
    sums[third] += d.dev_normalized;
    ++counts[third];

    if (t < 2.0 * t_end / 3.0 - 1e-9) continue;
    const auto xy = track.x_y(k);
    for (std::size_t m = 0; m < track.ny; ++m) {
      const double y = track.y(m);
      const double p = u_B(t, wrap(y + 4.0 * t), plus), q = u_B(t, wrap(y - 4.0 * t), minus);
      a.push_back(track.c[k][m] - c0);
      b.push_back(2.0 * (p + q));
      a.push_back(xy[m]);
      b.push_back(p - q);
    }
  }
  st.pearson = a.empty() ? nan_v : pearson(a, b);
  for (std::size_t i = 0; i < 3; ++i) st.third_means[i] = counts[i] ? sums[i] / static_cast<double>(counts[i]) : nan_v;
  st.thirds_nonincreasing = st.third_means[0] >= st.third_means[1] && st.third_means[1] >= st.third_means[2];
  return st;
}

// ---------------------------------------------------------------- dispatch

bool CommandResult::passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.pass; });
}

const std::vector<std::string>& command_names() {
  static const std::vector<std::string> names{"verify-eigen", "kernels", "simulate", "compare-profile", "phase"};
  return names;
}

CommandResult run_command(const std::string& command, const ExperimentConfig& cfg, const std::filesystem::path& out,
                          std::uint64_t seed) {
  cfg.validate();
  std::filesystem::create_directories(out);
  CommandResult r;
  if (command == "verify-eigen") r = cmd_verify_eigen(cfg, out, seed);
  else if (command == "kernels") r = cmd_kernels(cfg, out, seed);
  else if (command == "simulate") r = cmd_simulate(cfg, out, seed);
  else if (command == "compare-profile") r = cmd_compare_profile(cfg, out, seed);
  else if (command == "phase") r = cmd_phase(cfg, out, seed);
  else throw InvalidArgument("unknown command '" + command + "'");

  const auto path = out / "report.txt";
  std::ofstream os(path);
  if (!os) throw IoError("cannot open " + path.string());
  os << r.report;
  if (!os) throw IoError("write failed: " + path.string());
  return r;
}

}  // namespace kp2
