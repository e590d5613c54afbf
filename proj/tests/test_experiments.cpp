#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>

#include "burgers.hpp"
#include "error.hpp"
#include "experiments.hpp"
#include "soliton.hpp"

using namespace kp2;

namespace {

ExperimentConfig small(double eps) {
  Config c;
  c.set("grid.nx", "256");
  c.set("soliton.L", "10");
  c.set("grid.ny", "64");
  c.set("grid.lx", "40");
  c.set("grid.ly", "64");
  c.set("solver.t_end", "1");
  c.set("solver.sample_every", "0.25");
  c.set("perturbation.epsilon", std::to_string(eps));
  c.set("perturbation.wy", "4");
  c.set("run.threads", "2");
  return ExperimentConfig::from(c);
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream is(p);
  std::stringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("config validation") {
  const auto d = ExperimentConfig::from(Config{});
  CHECK(d.grid.nx == 512);
  CHECK(d.frame_speed() == 4.0);
  CHECK(d.method == ExtractMethod::Project);

  auto with = [](const std::string& k, const std::string& v) {
    Config c;
    c.set(k, v);
    return c;
  };
  CHECK_THROWS_AS(ExperimentConfig::from(with("perturbation.epsilon", "0.2")), InvalidArgument);
  CHECK_NOTHROW(ExperimentConfig::from(with("perturbation.epsilon", "0.1")));
  CHECK_THROWS_AS(ExperimentConfig::from(with("grid.nz", "1")), InvalidArgument);
  CHECK_THROWS_AS(ExperimentConfig::from(with("perturbation.kind", "wave")), InvalidArgument);
  CHECK_THROWS_AS(ExperimentConfig::from(with("solver.sample_every", "0.015")), InvalidArgument);
  CHECK_THROWS_AS(ExperimentConfig::from(with("kernels.samples", "4")), InvalidArgument);

  Config h;
  h.set("perturbation.hypothesis", "true");
  h.set("perturbation.derivative", "false");
  CHECK_THROWS_AS(ExperimentConfig::from(h), InvalidArgument);
  h.set("perturbation.derivative", "true");
  CHECK_NOTHROW(ExperimentConfig::from(h));
}

TEST_CASE("amplitude bump profile") {
  // int a dy = sqrt(2 pi) zeta(0) = sqrt(2 pi); a is even and decays.
  const double eta0 = 0.5, h = 0.5;
  std::vector<double> ys;
  for (double y = -1500.0; y <= 1500.0; y += h) ys.push_back(y);
  const auto a = bump_profile(ys, eta0);
  double mass = 0.0;
  for (double v : a) mass += v * h;
  CHECK(mass == doctest::Approx(std::sqrt(2.0 * std::numbers::pi)).epsilon(1e-6));
  CHECK(a.front() == doctest::Approx(a.back()).epsilon(1e-12));
  CHECK(std::abs(a.front()) < 1e-7);
  const std::vector<double> zero{0.0};
  CHECK(bump_profile(zero, eta0)[0] > 0.0);
}

TEST_CASE("initial fields") {
  auto cfg = small(0.01);
  const auto& g = cfg.grid;

  SUBCASE("gaussian derivative") {
    const auto u = initial_field(cfg, 1);
    CHECK(max_x_mean_coefficient(u - soliton_field(g, cfg.c0)) < 1e-12);
    const std::size_t j = g.nx / 2 + 3, m = g.ny / 2 + 1;
    const double x = g.x(j) - cfg.perturbation.x0, y = g.y(m);
    const double w = cfg.perturbation.wx, wy = cfg.perturbation.wy;
    const double want = phi(g.x(j), cfg.c0) + 0.01 * (-2.0 * x / (w * w)) * std::exp(-x * x / (w * w) - y * y / (wy * wy));
    CHECK(u.values()[m * g.nx + j] == doctest::Approx(want).epsilon(1e-12));
  }

  SUBCASE("random is seeded") {
    cfg.perturbation.kind = PerturbationKind::Random;
    const auto a = initial_field(cfg, 7), b = initial_field(cfg, 7), c = initial_field(cfg, 8);
    CHECK(std::equal(a.values().begin(), a.values().end(), b.values().begin()));
    CHECK(l2_quadrature(a - c) > 1e-4);
  }

  SUBCASE("amplitude bump keeps the row mass") {
    cfg.perturbation.kind = PerturbationKind::AmplitudeBump;
    cfg.perturbation.epsilon = 0.1;
    const auto u = initial_field(cfg, 0);
    const auto v = u.values();
    std::vector<double> mass(g.ny, 0.0);
    for (std::size_t m = 0; m < g.ny; ++m)
      for (std::size_t j = 0; j < g.nx; ++j) mass[m] += v[m * g.nx + j] * g.dx();
    // limited by the sampled compact bump (about 13 points across its support)
    for (double mm : mass) CHECK(std::abs(mm - mass[0]) < 1e-4);
    // the amplitude really varies
    CHECK(std::abs(v[(g.ny / 2) * g.nx + g.nx / 2] - v[0 * g.nx + g.nx / 2]) > 1e-3);
  }

  SUBCASE("none") {
    cfg.perturbation.kind = PerturbationKind::None;
    CHECK(l2_quadrature(initial_field(cfg, 0) - soliton_field(g, cfg.c0)) == 0.0);
  }
}

TEST_CASE("pearson") {
  const std::vector<double> a{1, 2, 3, 4}, b{2, 4, 6, 8}, c{4, 3, 2, 1}, k{1, 1, 1, 1};
  CHECK(pearson(a, b) == doctest::Approx(1.0));
  CHECK(pearson(a, c) == doctest::Approx(-1.0));
  CHECK(std::isnan(pearson(a, k)));
  CHECK_THROWS_AS(pearson(a, std::vector<double>{1.0}), InvalidArgument);
}

TEST_CASE("profile study on a track built from the Burgers pair") {
  const double ly = 512.0, M = 0.02, t_end = 12.0;
  const std::size_t ny = 1024;
  const BurgersProfile plus{m_from_mass(M, 1), 1}, minus{m_from_mass(M, -1), -1};
  ModulationTrack tr;
  tr.ly = ly;
  tr.ny = ny;
  for (int k = 0; k <= 12; ++k) {
    const double t = k == 0 ? 0.5 : k;  // first row only feeds the mass
    std::vector<double> c(ny), dx(ny);
    for (std::size_t m = 0; m < ny; ++m) {
      const double y = tr.y(m);
      const double p = u_B(t, y + 4.0 * t, plus), q = u_B(t, y - 4.0 * t, minus);
      c[m] = 2.0 + 2.0 * (p + q);
      dx[m] = p - q;
    }
    tr.append(k == 0 ? 0.0 : t, c, periodic_antiderivative(dx, ly));
  }
  const auto st = profile_study(tr, 2.0, t_end);
  CHECK(st.mass == doctest::Approx(M).epsilon(1e-6));
  CHECK(st.m_plus == doctest::Approx(plus.m).epsilon(1e-6));
  CHECK(st.m_minus == doctest::Approx(minus.m).epsilon(1e-6));
  CHECK(st.pearson > 0.999);
  CHECK(st.times.size() == 12);
  for (double d : st.dev_l2) CHECK(d < 1e-6);
}

TEST_CASE("unperturbed pipeline") {
  const auto cfg = small(0.0);
  const auto r = run_pipeline(cfg, 0, false);
  CHECK(r.u.times.size() == 5);
  CHECK(r.shape_error < 1e-6);
  CHECK(r.l2_drift < 1e-7);
  CHECK(r.h_drift < 1e-5);
  for (std::size_t k = 0; k < r.u.times.size(); ++k) {
    CHECK(r.max_dc[k] < 1e-6);
    CHECK(r.max_dx[k] < 1e-6);
    for (double c : r.project.c[k]) CHECK(c == doctest::Approx(2.0).epsilon(1e-6));
  }
  CHECK(r.v_l2.empty());
}

TEST_CASE("simulate command is deterministic") {
  const auto cfg = small(0.01);
  const auto dir = std::filesystem::temp_directory_path() / "kp2lab_test_simulate";
  std::filesystem::remove_all(dir);
  auto cfg_snap = cfg;
  cfg_snap.save_snapshots = true;
  const auto a = run_command("simulate", cfg_snap, dir / "a", 3);
  const auto b = run_command("simulate", cfg, dir / "b", 3);
  for (const char* f : {"conserved.csv", "track.csv", "track_fit.csv", "track_project.csv", "extraction_agreement.csv",
                        "decomposition.csv"}) {
    CAPTURE(f);
    REQUIRE(std::filesystem::exists(dir / "a" / f));
    CHECK(slurp(dir / "a" / f) == slurp(dir / "b" / f));
  }
  CHECK(std::filesystem::exists(dir / "a" / "snapshots" / "u_0004.bin"));
  CHECK(slurp(dir / "a" / "report.txt").find("snapshot roundtrip") != std::string::npos);
  bool roundtrip = false;
  for (const auto& c : a.checks)
    if (c.name == "snapshot roundtrip") roundtrip = c.pass;
  CHECK(roundtrip);
  CHECK(b.report.find("result:") != std::string::npos);
  std::filesystem::remove_all(dir);
}

TEST_CASE("phase command without a bump") {
  auto cfg = small(0.0);
  cfg.perturbation.kind = PerturbationKind::AmplitudeBump;
  cfg.t_end = 3.0;
  const auto dir = std::filesystem::temp_directory_path() / "kp2lab_test_phase";
  const auto r = run_command("phase", cfg, dir, 0);
  REQUIRE(r.checks.size() == 1);
  CHECK(r.passed());
  CHECK(std::filesystem::exists(dir / "phase_report.json"));
  std::filesystem::remove_all(dir);
}

TEST_CASE("verify-eigen command") {
  auto cfg = ExperimentConfig::from(Config{});
  const auto dir = std::filesystem::temp_directory_path() / "kp2lab_test_eigen";
  const auto r = run_command("verify-eigen", cfg, dir, 0);
  CHECK(r.passed());
  CHECK(r.checks.size() == 7);
  CHECK(std::filesystem::exists(dir / "modes.csv"));
  CHECK(slurp(dir / "eigen_residuals.csv").rfind("eta,residual,adjoint_residual", 0) == 0);
  CHECK_THROWS_AS(run_command("nope", cfg, dir, 0), InvalidArgument);
  std::filesystem::remove_all(dir);
}
