#include <doctest.h>

#include "helpers.hpp"
#include "toruslab/errors.hpp"
#include "toruslab/pattern.hpp"

using namespace toruslab;
using testing::adaptive_simpson;
using testing::torus;

namespace {

double weight(double s, const ProfileConfig& c) {
  const double x = std::cos(s) - std::cos(c.phi0);
  return std::sin(s) * std::exp(-c.steepness * x * x + c.skew * std::pow(std::cos(s), 3));
}

}  // namespace

TEST_SUITE("pattern") {
  TEST_CASE("profile endpoints and monotonicity") {
    const auto f = testing::forge();
    const auto& U = f.profile.U();
    CHECK(U.front() == 0.0);
    CHECK(U.back() == doctest::Approx(1.0).epsilon(1e-14));
    for (std::size_t i = 1; i + 1 < U.size(); ++i) REQUIRE(f.profile.U1()[i] > 0);
    CHECK(std::abs(f.profile.U1().front()) < 1e-14);
    CHECK(std::abs(f.profile.U1().back()) < 1e-14);
  }

  TEST_CASE("profile values against independent quadrature") {
    ProfileConfig c;
    const auto p = build_profile(c, torus());
    auto w = [&](double s) { return weight(s, c); };
    const double total = adaptive_simpson(w, 0, M_PI);
    for (double phi : {0.4, 1.7, 2.4, 3.0})
      CHECK(p.value(phi) == doctest::Approx(adaptive_simpson(w, 0, phi) / total).epsilon(1e-10));
    // U''(0) = height w'(0) / int w, with w'(0) = exp(-k (1 - cos phi0)^2 + skew).
    const double x = 1 - std::cos(c.phi0);
    const double w10 = std::exp(-c.steepness * x * x + c.skew);
    CHECK(p.d2(0.0) == doctest::Approx(w10 / total).epsilon(1e-10));
    CHECK(p.d2(0.0) > 0);
  }

  TEST_CASE("stas precondition on phi0") {
    ProfileConfig c;
    c.phi0 = std::acos(0.5);
    try {
      build_profile(c, torus());
      FAIL("expected a validation error");
    } catch (const ValidationError& e) {
      CHECK(std::string(e.what()).find("stas") != std::string::npos);
    }
    c = ProfileConfig{};
    c.samples = 1024;
    CHECK_THROWS_AS(build_profile(c, torus()), ValidationError);
  }

  TEST_CASE("symmetric extension") {
    const auto f = testing::forge();
    const ExtendedProfile e(f.profile);
    CHECK(e.value(2 * M_PI - M_PI / 3) == doctest::Approx(e.value(M_PI / 3)).epsilon(1e-15));
    CHECK(std::abs(e.d1(M_PI)) < 1e-13);
    CHECK(std::abs(e.d1(M_PI - 1e-9) + e.d1(M_PI + 1e-9)) < 1e-12);
    const auto v = e.sample(4096);
    CHECK(std::max_element(v.begin(), v.end()) - v.begin() == 2048);
  }

  TEST_CASE("sign facts and zero weighted integral") {
    const auto f = testing::forge(4097);
    const auto& p = f.profile;
    const double f0 = f.nl(p.U().front()), fpi = f.nl(p.U().back());
    CHECK(f0 < 0);
    CHECK(fpi > 0);
    CHECK(f0 == doctest::Approx(-p.d2(0.0)).epsilon(1e-12));
    CHECK(fpi == doctest::Approx(-p.d2(M_PI)).epsilon(1e-12));
    // Integrand along the continuous profile through the forged spline.
    auto g = [&](double phi) { return (5 + std::cos(phi)) * f.nl(p.value(phi)); };
    CHECK(std::abs(adaptive_simpson(g, 0, M_PI, 1e-12)) < 1e-8);
  }

  TEST_CASE("profile ODE residual") {
    const auto f = testing::forge(4097);
    const auto res = profile_ode_residual(f.profile, f.nl, torus());
    double m = 0;
    for (double r : res) m = std::max(m, std::abs(r));
    CHECK(m < 1e-9);
  }

  TEST_CASE("threshold N") {
    CHECK(threshold_N(2.0, torus()).N == 9);
    CHECK(threshold_N(0.0, torus()).N == 1);
    const auto f = testing::forge();
    const auto t = threshold_N(f.nl, torus());
    CHECK(double(t.N) * t.N > f.nl.max_abs_fprime() * 36);
    CHECK(double(t.N - 1) * (t.N - 1) <= f.nl.max_abs_fprime() * 36);
  }

  TEST_CASE("spline nonlinearity") {
    std::vector<double> s{0, 0.5, 1, 2, 3}, v{1, -1, 0.5, 2, 0};
    const Nonlinearity nl(s, v);
    for (std::size_t i = 0; i < s.size(); ++i) CHECK(nl(s[i]) == doctest::Approx(v[i]).epsilon(1e-14));
    CHECK(nl.antiderivative(0.0) == 0.0);
    for (double x : {-0.5, 0.3, 1.4, 2.7, 3.6}) {
      const double h = 1e-5;
      CHECK((nl.antiderivative(x + h) - nl.antiderivative(x - h)) / (2 * h) ==
            doctest::Approx(nl(x)).epsilon(1e-7));
      CHECK((nl(x + h) - nl(x - h)) / (2 * h) == doctest::Approx(nl.derivative(x)).epsilon(1e-6));
    }
    // Linear extension is C1 at the ends.
    CHECK(nl(3.0 + 1e-9) == doctest::Approx(nl(3.0 - 1e-9)).epsilon(1e-7));
    CHECK(nl.derivative(3.5) == doctest::Approx(nl.derivative(3.0 - 1e-12)).epsilon(1e-8));
  }

  TEST_CASE("nonlinearity CSV round trip") {
    const auto f = testing::forge();
    const auto back = nonlinearity_from_csv(nonlinearity_to_csv(f.nl));
    CHECK(back.s() == f.nl.s());
    CHECK(back.f() == f.nl.f());
    CHECK(nonlinearity_to_csv(back) == nonlinearity_to_csv(f.nl));
  }

  TEST_CASE("construction is deterministic") {
    const auto a = testing::forge(), b = testing::forge();
    CHECK(profile_to_json(a.profile, a.nl) == profile_to_json(b.profile, b.nl));
  }
}
