#include <doctest.h>

#include <map>
#include <set>

#include "helpers.hpp"
#include "toruslab/census.hpp"

using namespace toruslab;
using testing::torus;

namespace {

// Critical set exactly {0, pi} x {theta_k}: u_phi = sin(phi)(1 - a sin(n theta)),
// u_theta = a n cos(phi) cos(n theta).
ScalarField model(const PeriodicGrid& g, int n, double a = 0.1) {
  return sample_field(g, [=](double p, double t) { return -std::cos(p) + a * std::cos(p) * std::sin(n * t); });
}

}  // namespace

TEST_SUITE("census") {
  TEST_CASE("expected set") {
    const auto e1 = expected_set(1);
    REQUIRE(e1.size() == 4);
    std::set<double> th;
    for (auto [p, t] : e1) th.insert(t);
    CHECK(th == std::set<double>{M_PI / 2, 3 * M_PI / 2});
    const auto e2 = expected_set(2);
    th.clear();
    for (auto [p, t] : e2) th.insert(t);
    CHECK(th.size() == 4);
    CHECK(*th.begin() == doctest::Approx(M_PI / 4));
    CHECK(*th.rbegin() == doctest::Approx(7 * M_PI / 4));
    CHECK(expected_set(15).size() == 60);
  }

  TEST_CASE("isolated critical points of the model field") {
    for (int n : {1, 3, 5}) {
      const PeriodicGrid g{64, 40 * n};
      const auto p = torus(0.05, n);
      const auto u = model(g, n);
      const auto rep = locate_critical_points(u, p);
      CAPTURE(n);
      CHECK(rep.count == 4 * n);
      const auto v = verify_count(rep, u, p);
      CHECK(v.ok);
      CHECK(v.margin > 0);
      CHECK(v.max_match_cells < 0.01);
      std::map<std::string, int> kinds;
      for (const auto& c : rep.points) kinds[c.kind]++;
      CHECK(kinds["saddle"] == 2 * n);
      CHECK(kinds["max"] + kinds["min"] == 2 * n);
    }
  }

  TEST_CASE("injected extra point breaks the verdict") {
    const PeriodicGrid g{64, 120};
    const auto p = torus(0.05, 3);
    const auto u = model(g, 3);
    auto rep = locate_critical_points(u, p);
    rep.points.push_back({1.0, 1.0, "saddle", 0.0});
    rep.count += 1;
    const auto v = verify_count(rep, u, p);
    CHECK_FALSE(v.ok);
    CHECK(v.count == 13);
    bool mention = false;
    for (const auto& r : v.reasons) mention = mention || r.find("count") != std::string::npos;
    CHECK(mention);
  }

  TEST_CASE("critical circles of cos(phi)") {
    const PeriodicGrid g{64, 64};
    const auto u = sample_field(g, [](double p, double) { return std::cos(p); });
    const auto rep = locate_critical_points(u, torus());
    CHECK(rep.count > 0);
    for (const auto& c : rep.points) {
      CHECK(c.kind == "degenerate");
      CHECK(std::min(std::abs(c.phi), std::abs(c.phi - M_PI)) < 1e-9);
    }
    const auto v = verify_count(rep, u, torus());
    CHECK_FALSE(v.ok);
    bool mention = false;
    for (const auto& r : v.reasons) mention = mention || r.find("degenerate circles") != std::string::npos;
    CHECK(mention);
  }

  TEST_CASE("count is stable under grid doubling") {
    const auto p = torus(0.05, 2);
    const auto r1 = locate_critical_points(model(PeriodicGrid{32, 48}, 2), p);
    const auto r2 = locate_critical_points(model(PeriodicGrid{64, 96}, 2), p);
    CHECK(r1.count == r2.count);
  }

  TEST_CASE("serialization") {
    const PeriodicGrid g{32, 48};
    const auto p = torus(0.05, 2);
    const auto u = model(g, 2);
    const auto rep = locate_critical_points(u, p);
    const auto js = census_to_json(rep, verify_count(rep, u, p));
    for (const char* key : {"\"count\"", "\"points\"", "\"verdict\"", "\"grad_norm\"", "\"kind\""})
      CHECK(js.find(key) != std::string::npos);
    const auto csv = census_to_csv(rep);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == rep.count + 1);
  }
}
