#include <cstdlib>
#include <string>

#include "doctest.h"
#include "vpl/config.hpp"

using namespace vpl;

namespace {
const char* kSample = R"(
# run setup
[grid]
v_max = 4.5
n_axis = 16

[solver]
mode = frozen     ; frozen coefficients
t_end = 5.0
thetas = 0, 1.5, 2
verbose = true
)";
}

TEST_CASE("parse, comments, and typed getters") {
  auto cfg = Config::parse(kSample, "sample.ini");
  CHECK(cfg.has("grid", "v_max"));
  CHECK(cfg.get_double("grid", "v_max", 0.0) == 4.5);
  CHECK(cfg.get_long("grid", "n_axis", 0) == 16);
  CHECK(cfg.get_string("solver", "mode", "") == "frozen");
  CHECK(cfg.get_bool("solver", "verbose", false));
  CHECK(cfg.get_double("solver", "missing", 7.25) == 7.25);
  auto thetas = cfg.get_list("solver", "thetas", {});
  REQUIRE(thetas.size() == 3);
  CHECK(thetas[0] == 0.0);
  CHECK(thetas[1] == 1.5);
  CHECK(thetas[2] == 2.0);
}

TEST_CASE("sections and keys are case-insensitive on input") {
  auto cfg = Config::parse("[Grid]\nV_Max = 2.0\n");
  CHECK(cfg.get_double("grid", "v_max", 0.0) == 2.0);
}

TEST_CASE("parse errors name the file, line, and offending text") {
  try {
    Config::parse("[grid]\nv_max 4.5\n", "bad.ini");
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    std::string msg = e.what();
    CHECK(msg.find("bad.ini") != std::string::npos);
    CHECK(msg.find("2") != std::string::npos);
    CHECK(msg.find("v_max") != std::string::npos);
  }

  try {
    Config::parse("orphan = 1\n", "orphan.ini");
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("orphan.ini") != std::string::npos);
  }
}

TEST_CASE("typed getter errors name section.key") {
  auto cfg = Config::parse("[solver]\nt_end = soon\n");
  try {
    cfg.get_double("solver", "t_end", 0.0);
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("solver.t_end") != std::string::npos);
  }
}

TEST_CASE("environment overrides replace parsed values") {
  auto cfg = Config::parse(kSample);
  setenv("VPL_SOLVER_T_END", "2.5", 1);
  cfg.apply_env_overrides();
  unsetenv("VPL_SOLVER_T_END");
  CHECK(cfg.get_double("solver", "t_end", 0.0) == 2.5);
}

TEST_CASE("canonical form and hash are stable and value sensitive") {
  auto a = Config::parse("[b]\ny = 2\n[a]\nx = 1\n");
  auto b = Config::parse("[a]\nx = 1\n[b]\ny = 2\n");
  CHECK(a.canonical() == b.canonical());
  CHECK(a.hash() == b.hash());
  CHECK(a.hash().size() == 16);

  auto c = Config::parse("[a]\nx = 2\n[b]\ny = 2\n");
  CHECK(a.hash() != c.hash());
}

TEST_CASE("set() inserts and overwrites") {
  Config cfg;
  cfg.set("run", "output", "out");
  CHECK(cfg.get_string("run", "output", "") == "out");
  cfg.set("run", "output", "elsewhere");
  CHECK(cfg.get_string("run", "output", "") == "elsewhere");
}
