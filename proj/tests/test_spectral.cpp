#include <doctest.h>

#include <random>

#include "helpers.hpp"
#include "toruslab/errors.hpp"
#include "toruslab/spectral.hpp"

using namespace toruslab;
using testing::torus;

namespace {

const testing::Forged& forged() {
  static const testing::Forged f = testing::forge();
  return f;
}

const PeriodicGrid kGrid{64, 32};

struct Base {
  DiscreteOperator op;
  SteadyState state;
  Eigen::VectorXd fp;
  SpectralResult eig;
};

const Base& base() {
  static const Base b = [] {
    Base b;
    b.op = assemble_laplacian(torus(), kGrid);
    const auto col = ExtendedProfile(forged().profile).sample(kGrid.n_phi);
    ScalarField u(kGrid);
    for (int i = 0; i < kGrid.n_phi; ++i)
      for (int j = 0; j < kGrid.n_theta; ++j) u(i, j) = col[i];
    b.state = newton_solve(u, b.op, forged().nl);
    b.fp = fprime_of(b.state.field, forged().nl);
    b.eig = principal_eigpair(b.state, b.op, forged().nl);
    return b;
  }();
  return b;
}

}  // namespace

TEST_SUITE("spectral") {
  TEST_CASE("pure Laplacian: zero eigenvalue, constant eigenfield") {
    const auto op = assemble_laplacian(torus(0.1, 2), PeriodicGrid{32, 32});
    const auto r = principal_eigpair(op, Eigen::VectorXd::Zero(op.grid.size()));
    const double area = op.weights.sum() * op.grid.h_phi() * op.grid.h_theta();
    CHECK(std::abs(r.lambda1) < 1e-10);
    CHECK((r.eigenfield.values.array() - 1 / std::sqrt(area)).abs().maxCoeff() < 1e-8);
    CHECK(r.normalization == doctest::Approx(1.0).epsilon(1e-12));
  }

  TEST_CASE("constant shift") {
    const auto op = assemble_laplacian(torus(), PeriodicGrid{32, 32});
    const auto r = principal_eigpair(op, Eigen::VectorXd::Constant(op.grid.size(), 0.7), {}, -0.5);
    CHECK(r.lambda1 == doctest::Approx(-0.7).epsilon(1e-10));
  }

  TEST_CASE("principal pair of the pattern") {
    const auto& b = base();
    CHECK(b.eig.lambda1 > 0);
    CHECK(b.eig.residual < 1e-8);
    CHECK(b.eig.eigenfield.values.minCoeff() > 0);
    CHECK(std::abs(b.eig.normalization - 1) < 1e-10);
    const double rq = rayleigh_quotient(b.eig.eigenfield, b.fp, b.op);
    CHECK(std::abs(rq - b.eig.lambda1) <= 10 * b.eig.residual + 1e-12);
  }

  TEST_CASE("Rayleigh quotient bounds and stationarity") {
    const auto& b = base();
    const double lam = b.eig.lambda1;
    const ScalarField one(kGrid, 1.0);
    const double q1 = rayleigh_quotient(one, b.fp, b.op);
    const double area = quadrature(one, torus(), kGrid);
    double mean_fp = 0;
    for (int k = 0; k < kGrid.size(); ++k) mean_fp += b.op.weights[k] * b.fp[k];
    mean_fp *= kGrid.h_phi() * kGrid.h_theta() / area;
    CHECK(q1 == doctest::Approx(-mean_fp).epsilon(1e-10));
    CHECK(q1 >= lam);

    std::mt19937_64 rng(5);
    std::normal_distribution<double> N;
    for (int t = 0; t < 50; ++t) {
      ScalarField v(kGrid);
      for (int k = 0; k < kGrid.size(); ++k) v.values[k] = N(rng);
      CHECK(rayleigh_quotient(v, b.fp, b.op) >= lam - 1e-12);
    }
    // Orthogonal perturbation: quotient grows quadratically.
    ScalarField noise(kGrid);
    for (int k = 0; k < kGrid.size(); ++k) noise.values[k] = N(rng);
    const double c = weighted_inner_product(noise, b.eig.eigenfield, torus(), kGrid);
    noise.values -= c * b.eig.eigenfield.values;
    auto bump = [&](double d) {
      ScalarField w(kGrid, b.eig.eigenfield.values + d * noise.values);
      return rayleigh_quotient(w, b.fp, b.op) - lam;
    };
    const double r = bump(1e-3) / bump(5e-4);
    CHECK(r == doctest::Approx(4.0).epsilon(0.05));
    CHECK_THROWS_AS(rayleigh_quotient(ScalarField(kGrid, 0.0), b.fp, b.op), ValidationError);
  }

  TEST_CASE("one-dimensional reduction") {
    const auto& b = base();
    std::vector<double> fp(kGrid.n_phi);
    for (int i = 0; i < kGrid.n_phi; ++i) fp[i] = b.fp[kGrid.index(i, 0)];
    const auto sl = sl_reduction_eigpair(fp, torus());
    CHECK(std::abs(sl.lambda1 - b.eig.lambda1) / b.eig.lambda1 < 1e-6);
    CHECK(sl.lambda2 > sl.lambda1);
    const int m = kGrid.n_phi;
    double odd = 0;
    for (int i = 1; i < m; ++i) odd = std::max(odd, std::abs(sl.eigenprofile[i] - sl.eigenprofile[m - i]));
    CHECK(odd < 1e-10);
    const auto ht = half_torus_normalization_check(sl.eigenprofile, torus());
    CHECK(ht.ok);
    CHECK(ht.integral == doctest::Approx(1.0).epsilon(1e-8));
    CHECK(ht.lower_half == doctest::Approx(0.5).epsilon(1e-8));

    auto skew = sl.eigenprofile;
    for (int i = 0; i < m / 2; ++i) skew[i] *= 1.2;
    CHECK_FALSE(half_torus_normalization_check(skew, torus()).ok);

    const auto zero = sl_reduction_eigpair(std::vector<double>(m, 0.0), torus());
    CHECK(std::abs(zero.lambda1) < 1e-10);
  }

  TEST_CASE("fitted order") {
    CHECK(fitted_order({1, 2, 4, 8}, {3, 12, 48, 192}) == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(fitted_order({1, 2, 4}, {5, 5, 5}) == doctest::Approx(0.0).scale(1).epsilon(1e-12));
  }

  TEST_CASE("convergence study rows") {
    const auto& b = base();
    const PeriodicGrid g{64, 32};
    const auto tab = convergence_study({1e-4, 2e-4}, b.state, b.eig.lambda1, g, forged().nl, 1);
    REQUIRE(tab.rows.size() == 2);
    CHECK(tab.rows[0].gap < tab.rows[1].gap);
    CHECK(tab.rows[0].sup_diff < tab.rows[1].sup_diff);
    CHECK(tab.gap_ratios.size() == 1);
  }
}
