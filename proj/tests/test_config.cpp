#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "config.hpp"
#include "error.hpp"

using namespace kp2;

TEST_CASE("typed lookups") {
  const auto c = Config::parse(
      "top = 1\n"
      "[grid]\n"
      "nx = 256\n"
      "lx = 8.0e1\n"
      "[flags]\n"
      "a = yes\n"
      "b = Off\n"
      "[eigen]\n"
      "etas = 0.05, 0.1,0.3\n");
  CHECK(c.get_long("grid.nx", 0) == 256);
  CHECK(c.get_double("grid.lx", 0.0) == 80.0);
  CHECK(c.get_long("top", 0) == 1);
  CHECK(c.get_bool("flags.a", false));
  CHECK_FALSE(c.get_bool("flags.b", true));
  CHECK(c.get_list("eigen.etas", {}) == std::vector<double>{0.05, 0.1, 0.3});
  CHECK(c.get_double("grid.missing", 4.5) == 4.5);
  CHECK(c.get_string("grid.missing", "x") == "x");
  CHECK_FALSE(c.get("grid.missing").has_value());
}

TEST_CASE("malformed values name the key") {
  Config c;
  c.set("grid.nx", "12a");
  c.set("solver.dt", "fast");
  c.set("output.snapshots", "maybe");
  c.set("eigen.etas", " , ");
  CHECK_THROWS_AS(c.get_long("grid.nx", 0), InvalidArgument);
  CHECK_THROWS_WITH_AS(c.get_double("solver.dt", 0), doctest::Contains("solver.dt"), InvalidArgument);
  CHECK_THROWS_AS(c.get_bool("output.snapshots", false), InvalidArgument);
  CHECK_THROWS_AS(c.get_list("eigen.etas", {}), InvalidArgument);
}

TEST_CASE("unknown keys are rejected") {
  Config c;
  c.set("grid.nx", "64");
  c.set("grid.nz", "64");
  CHECK_NOTHROW(Config{}.require_known({"grid.nx"}));
  CHECK_THROWS_WITH_AS(c.require_known({"grid.nx"}), doctest::Contains("grid.nz"), InvalidArgument);
}

TEST_CASE("ini roundtrip and file loading") {
  Config c;
  c.set("grid.nx", "512");
  c.set("grid.ly", "320");
  c.set("solver.dt", "0.01");
  c.set("name", "run");
  const auto back = Config::parse(c.to_ini());
  CHECK(back.entries() == c.entries());

  const auto dir = std::filesystem::temp_directory_path() / "kp2lab_test_config";
  std::filesystem::create_directories(dir);
  {
    std::ofstream os(dir / "a.ini");
    os << c.to_ini();
  }
  CHECK(Config::load(dir / "a.ini").entries() == c.entries());
  CHECK_THROWS_AS(Config::load(dir / "missing.ini"), IoError);
  {
    std::ofstream os(dir / "bad.ini");
    os << "[grid\nnx = 1\n";
  }
  CHECK_THROWS_AS(Config::load(dir / "bad.ini"), InvalidArgument);
  std::filesystem::remove_all(dir);
}
