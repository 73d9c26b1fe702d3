#include <doctest.h>

#include <random>

#include "helpers.hpp"
#include "toruslab/errors.hpp"
#include "toruslab/newton.hpp"

using namespace toruslab;
using testing::torus;

namespace {

const testing::Forged& forged() {
  static const testing::Forged f = testing::forge();
  return f;
}

const PeriodicGrid kGrid{64, 64};

ScalarField profile_field(const PeriodicGrid& g) {
  const auto col = ExtendedProfile(forged().profile).sample(g.n_phi);
  ScalarField u(g);
  for (int i = 0; i < g.n_phi; ++i)
    for (int j = 0; j < g.n_theta; ++j) u(i, j) = col[i];
  return u;
}

const SteadyState& base() {
  static const SteadyState s = newton_solve(profile_field(kGrid), assemble_laplacian(torus(), kGrid), forged().nl);
  return s;
}

}  // namespace

TEST_SUITE("newton") {
  TEST_CASE("residual of constants") {
    const auto op = assemble_laplacian(torus(), kGrid);
    const auto& nl = forged().nl;
    const double c = 0.37;
    const auto r = residual(ScalarField(kGrid, c), op, nl);
    CHECK((r.values.array() - nl(c)).abs().maxCoeff() < 1e-12);
  }

  TEST_CASE("residual of the sampled profile is a discretization error") {
    auto err = [](int m) {
      const PeriodicGrid g{m, 16};
      return residual(profile_field(g), assemble_laplacian(torus(), g), forged().nl).max_abs();
    };
    const double a = err(64), b = err(128);
    CHECK(a / b > 3.0);  // O(h^2)
  }

  TEST_CASE("Newton from the profile at eps = 0") {
    const auto& s = base();
    CHECK(s.newton_iters <= 6);
    CHECK(s.residual_norm < 1e-10);
    CHECK(std::isfinite(s.quadratic_constant));
    const auto sym = symmetry_check(s.field, torus());
    CHECK(sym.max_defect() < 1e-12);
    // theta-independent
    double spread = 0;
    for (int i = 0; i < kGrid.n_phi; ++i)
      for (int j = 0; j < kGrid.n_theta; ++j) spread = std::max(spread, std::abs(s.field(i, j) - s.field(i, 0)));
    CHECK(spread < 1e-12);
  }

  TEST_CASE("continuation to a perturbed torus") {
    const auto b = continuation(base(), 0.02, 4, kGrid, forged().nl);
    REQUIRE(b.states.size() == 4);
    double prev = 0;
    for (std::size_t k = 0; k < 4; ++k) {
      CHECK(b.states[k].residual_norm < 1e-10);
      const double d = (b.states[k].field.values - base().field.values).cwiseAbs().maxCoeff();
      CHECK(d > prev);
      prev = d;
    }
    const auto& u = b.final_state();
    CHECK(symmetry_check(u.field, u.params).max_defect() <= 1e-9);
    const auto dc = derivative_conditions(u.field, u.params);
    CHECK(dc.phi_rows < 1e-9);
    CHECK(dc.theta_lines < 1e-9);
  }

  TEST_CASE("continuation edge cases") {
    const auto b0 = continuation(base(), 0.0, 3, kGrid, forged().nl);
    CHECK(b0.final_state().field.values == base().field.values);
    CHECK_THROWS_AS(continuation(base(), 4.5, 2, kGrid, forged().nl), ValidationError);
  }

  TEST_CASE("symmetry detector") {
    auto u = base().field;
    for (int i = 0; i < kGrid.n_phi; ++i)
      for (int j = 0; j < kGrid.n_theta; ++j) u(i, j) += std::cos(kGrid.theta(j));
    const auto s = symmetry_check(u, torus());
    CHECK(s.equator_defect < 1e-12);
    CHECK(s.max_defect() > 0.1);
  }

  TEST_CASE("large random initial guess never returns a wrong root silently") {
    std::mt19937_64 rng(11);
    std::normal_distribution<double> N(0, 5);
    auto u = profile_field(kGrid);
    for (int k = 0; k < kGrid.size(); ++k) u.values[k] += N(rng);
    const auto op = assemble_laplacian(torus(), kGrid);
    try {
      const auto s = newton_solve(u, op, forged().nl);
      CHECK(residual(s.field, op, forged().nl).max_abs() < 1e-9);
    } catch (const SolverError& e) {
      CHECK((e.code() == "NoConvergence" || e.code() == "SingularJacobian"));
    }
  }
}
