#include <doctest.h>

#include <set>

#include "toruslab/config.hpp"
#include "toruslab/errors.hpp"

using namespace toruslab;

TEST_SUITE("config") {
  TEST_CASE("defaults round trip through JSON") {
    const RunConfig d = default_config();
    const RunConfig back = parse_config(config_to_json(d));
    CHECK(config_to_json(back) == config_to_json(d));
    CHECK(back.params.R == 5.0);
    CHECK(back.params.r == 1.0);
    CHECK(back.grid.n_phi == 128);
  }

  TEST_CASE("unknown keys are errors") {
    CHECK_THROWS_AS(parse_config(R"({"schema_version": 1, "epsilon_lst": [0.1]})"), ValidationError);
    CHECK_THROWS_AS(parse_config(R"({"torus": {"R": 5, "rr": 1}})"), ValidationError);
    CHECK_THROWS_AS(parse_config(R"({"tolerances": {"newton_tolerance": 1e-9}})"), ValidationError);
    CHECK_THROWS_AS(parse_config(R"({"probe": {"seed": 3}})"), ValidationError);
    CHECK_THROWS_AS(parse_config("{not json"), ValidationError);
    CHECK_THROWS_AS(parse_config(R"({"schema_version": 2})"), ValidationError);
  }

  TEST_CASE("invariants") {
    CHECK_THROWS_AS(parse_config(R"({"tolerances": {"newton_tol": -1}})"), ValidationError);
    CHECK_THROWS_AS(parse_config(R"({"tolerances": {"eig_tol": 0}})"), ValidationError);
    CHECK_THROWS_AS(parse_config(R"({"torus": {"R": 1.01, "r": 1}, "census_epsilon": 0.02})"), ValidationError);
    CHECK_THROWS_AS(parse_config(R"({"epsilon_list": []})"), ValidationError);
    CHECK_THROWS_AS(parse_config(R"({"grid": {"n_phi": 15, "n_theta": 32}})"), ValidationError);
    CHECK_THROWS_AS(parse_config(R"({"linear_solver": "magic"})"), ValidationError);
    const auto c = parse_config(R"({"tolerances": {"newton_tol": 1e-11}, "linear_solver": "iterative"})");
    CHECK(c.tolerances.newton_tol == 1e-11);
    CHECK(c.linear_solver == LinearSolverKind::Iterative);
  }

  TEST_CASE("tolerance registry is complete") {
    Tolerances t;
    const auto& reg = Tolerances::registry();
    std::set<std::string> names;
    for (const auto& e : reg) names.insert(e.name);
    CHECK(names.size() == reg.size());
    // Every member is reachable by name: perturb each one and compare the whole struct.
    CHECK(reg.size() * sizeof(double) == sizeof(Tolerances));
    for (const auto& e : reg) {
      Tolerances u;
      u.set(e.name, 123.5);
      CHECK(u.get(e.name) == 123.5);
      CHECK(u.*(e.member) == 123.5);
    }
    CHECK_THROWS_AS(t.get("nope"), ValidationError);
    CHECK_THROWS_AS(t.set("newton_tol", -1), ValidationError);
    // The serialized config lists every tolerance.
    const std::string js = config_to_json(default_config());
    for (const auto& n : names) CHECK(js.find("\"" + n + "\"") != std::string::npos);
  }

  TEST_CASE("grid flag") {
    const auto g = parse_grid("64x256");
    CHECK(g.n_phi == 64);
    CHECK(g.n_theta == 256);
    CHECK_THROWS_AS(parse_grid("64*256"), ValidationError);
    CHECK_THROWS_AS(parse_grid("7x256"), ValidationError);
  }
}
