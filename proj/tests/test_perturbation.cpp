#include <doctest.h>

#include "helpers.hpp"
#include "toruslab/errors.hpp"
#include "toruslab/perturbation.hpp"

using namespace toruslab;
using testing::adaptive_simpson;
using testing::torus;

namespace {

const testing::Forged& forged() {
  static const testing::Forged f = testing::forge(4097);
  return f;
}

int threshold() { return threshold_N(forged().nl, torus()).N; }

PerturbationCoefficients plain(int m) {
  PerturbationCoefficients c;
  for (int i = 0; i < m; ++i) {
    const double phi = 2 * M_PI * i / m;
    c.phi.push_back(phi);
    c.w.push_back(5 + std::cos(phi));
    c.A.push_back(0.0);
    c.B.push_back(2 + std::cos(phi));
  }
  return c;
}

double manufactured_error(int m) {
  const auto c = plain(m);
  std::vector<double> rhs(m), exact(m);
  for (int i = 0; i < m; ++i) {
    const double p = c.phi[i];
    const double C = std::cos(p) + 0.3 * std::cos(2 * p);
    const double C1 = -std::sin(p) - 0.6 * std::sin(2 * p);
    const double C2 = -std::cos(p) - 1.2 * std::cos(2 * p);
    exact[i] = C;
    rhs[i] = C2 - std::sin(p) / c.w[i] * C1 - c.B[i] * C;
  }
  return testing::max_abs_diff(solve_periodic_ode(c, c.B, rhs, torus()), exact);
}

}  // namespace

TEST_SUITE("perturbation") {
  TEST_CASE("coefficients at the poles") {
    const int n = threshold();
    const auto c = coefficients_AB(ExtendedProfile(forged().profile), forged().nl, torus(), n, 256);
    const double f0 = forged().nl(0.0);
    CHECK(c.A[0] == doctest::Approx(-2 * f0).epsilon(1e-14));
    CHECK(c.A[0] > 0);
    CHECK(*std::min_element(c.B.begin(), c.B.end()) > 0);
  }

  TEST_CASE("weighted integral of A") {
    const auto c = coefficients_AB(ExtendedProfile(forged().profile), forged().nl, torus(), threshold(), 4096);
    std::vector<double> wa(c.A.size());
    for (std::size_t i = 0; i < wa.size(); ++i) wa[i] = c.w[i] * c.A[i];
    const double lhs = half_range_integral(wa, 4096);
    const auto& p = forged().profile;
    const double rhs = adaptive_simpson(
        [&](double x) { return 5 * std::sin(x) / (5 + std::cos(x)) * p.d1(x); }, 0, M_PI, 1e-12);
    CHECK(rhs > 0);
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-5));
  }

  TEST_CASE("manufactured periodic ODE converges at second order") {
    const double e1 = manufactured_error(64), e2 = manufactured_error(128), e3 = manufactured_error(256);
    CHECK(std::log2(e1 / e2) == doctest::Approx(2.0).epsilon(0.1));
    CHECK(std::log2(e2 / e3) == doctest::Approx(2.0).epsilon(0.1));
  }

  TEST_CASE("apply and solve are inverse") {
    const auto c = plain(96);
    std::vector<double> w(96);
    for (int i = 0; i < 96; ++i) w[i] = std::exp(std::sin(3 * c.phi[i])) - 0.2 * i / 96.0;
    const auto back = solve_periodic_ode(c, c.B, apply_periodic_ode(c, c.B, w, torus()), torus());
    CHECK(testing::max_abs_diff(back, w) < 1e-11);
  }

  TEST_CASE("singular operator is detected") {
    auto c = plain(64);
    const std::vector<double> zeroB(64, 0.0);
    try {
      solve_periodic_ode(c, zeroB, c.A, torus());
      FAIL("expected SingularSystem");
    } catch (const SolverError& e) {
      CHECK(e.code() == "SingularSystem");
    }
  }

  TEST_CASE("structure facts at n = N") {
    const auto sol = solve_perturbation(ExtendedProfile(forged().profile), forged().nl, torus(), threshold(), 128);
    const auto v = evaluate_perturbation(sol);
    CHECK(v.b_positive);
    CHECK(v.c1_vanishes);
    CHECK(v.c1_norm < 1e-10 * (1 + *std::max_element(sol.A.begin(), sol.A.end())));
    CHECK(v.c2_neumann);
    CHECK(v.c2_nonzero);
    CHECK(v.zero_integral);
    CHECK(v.negativity_integral);
    CHECK(v.c2_symmetry_defect < 1e-12);
    CHECK(v.all());
    // Discrete C2 satisfies its own equation.
    const PerturbationCoefficients c{sol.phi, sol.A, sol.B, sol.w};
    CHECK(testing::max_abs_diff(apply_periodic_ode(c, sol.B, sol.C2, torus()), sol.A) < 1e-10);
  }

  TEST_CASE("half-range trapezoid") {
    CHECK(half_range_integral(std::vector<double>(64, 1.0), 64) == doctest::Approx(M_PI).epsilon(1e-15));
  }

  TEST_CASE("cos content and first-order field") {
    const PeriodicGrid g{16, 64};
    std::vector<double> C2(16);
    for (int i = 0; i < 16; ++i) C2[i] = std::cos(g.phi(i)) + 2;
    const auto V = first_order_field(C2, 4, g);
    CHECK(V(3, 5) == doctest::Approx(C2[3] * std::sin(4 * g.theta(5))).epsilon(1e-15));
    CHECK(cos_content(V, 4) < 1e-14);
    auto W = V;
    for (int i = 0; i < 16; ++i)
      for (int j = 0; j < 64; ++j) W(i, j) += 0.25 * std::cos(4 * g.theta(j));
    CHECK(cos_content(W, 4) == doctest::Approx(0.25).epsilon(1e-13));
  }

  TEST_CASE("serialization") {
    const auto sol = solve_perturbation(ExtendedProfile(forged().profile), forged().nl, torus(), threshold(), 32);
    const auto csv = perturbation_to_csv(sol);
    CHECK(csv.rfind("phi,A,B,C1,C2\n", 0) == 0);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 33);
    CHECK(perturbation_verdict_json(sol, evaluate_perturbation(sol)).find("negativity_integral") != std::string::npos);
  }
}
