#include <doctest.h>

#include <array>
#include <complex>
#include <random>

#include "toruslab/errors.hpp"
#include "toruslab/geometry.hpp"

using namespace toruslab;
using cd = std::complex<double>;

namespace {

// Embedding X(phi, theta) of the perturbed torus in complex arithmetic.
struct Embedding {
  double R, r, eps;
  int n;
  cd rad(cd t) const { return r + eps * std::sin(double(n) * t); }
  std::array<cd, 3> X(cd p, cd t) const {
    const cd a = R + rad(t) * std::cos(p);
    return {a * std::cos(t), a * std::sin(t), rad(t) * std::sin(p)};
  }
};

constexpr double kStep = 1e-30;

std::array<double, 3> d_phi(const Embedding& e, double p, double t) {
  auto x = e.X(cd(p, kStep), t);
  return {x[0].imag() / kStep, x[1].imag() / kStep, x[2].imag() / kStep};
}
std::array<double, 3> d_theta(const Embedding& e, double p, double t) {
  auto x = e.X(p, cd(t, kStep));
  return {x[0].imag() / kStep, x[1].imag() / kStep, x[2].imag() / kStep};
}
double dot(const std::array<double, 3>& a, const std::array<double, 3>& b) {
  return a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
}

// Phi from the embedding, differentiated by a complex step in one variable.
cd Phi_c(const Embedding& e, cd p, cd t) {
  const cd a = e.R + e.rad(t) * std::cos(p);
  const cd dr = e.eps * double(e.n) * std::cos(double(e.n) * t);
  return std::sqrt(a * a + dr * dr);
}

}  // namespace

TEST_SUITE("geometry") {
  TEST_CASE("area element at the outer equator") {
    const auto m = metric_at({5, 1, 0, 7}, 0.0, 0.0);
    CHECK(m.sqrt_det == doctest::Approx(6.0).epsilon(1e-15));
  }

  TEST_CASE("perturbed metric at phi = pi/2") {
    const auto m = metric_at({5, 1, 0.2, 15}, M_PI / 2, 0.0);
    CHECK(m.r_eps == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(m.dr_eps == doctest::Approx(3.0).epsilon(1e-15));
    CHECK(m.Phi == doctest::Approx(std::sqrt(34.0)).epsilon(1e-14));
  }

  TEST_CASE("unperturbed degeneracy") {
    for (double phi : {0.0, 0.7, 2.0, M_PI}) {
      const auto m = metric_at({5, 1, 0, 3}, phi, 1.3);
      CHECK(m.dr_eps == 0.0);
      CHECK(m.Phi == doctest::Approx(5 + std::cos(phi)).epsilon(1e-15));
      const auto c = laplace_coefficients({5, 1, 0, 3}, phi, 1.3);
      CHECK(c.c_t == 0.0);
      CHECK(c.c_p == doctest::Approx(-std::sin(phi) / (5 + std::cos(phi))).epsilon(1e-14));
    }
    CHECK(std::abs(laplace_coefficients({5, 1, 0, 1}, M_PI, 0.0).c_p) < 1e-16);
  }

  TEST_CASE("metric agrees with the embedding") {
    const Embedding e{5, 1, 0.1, 3};
    const TorusParams p{5, 1, 0.1, 3};
    for (double phi : {0.3, 1.9, 4.4})
      for (double th : {0.1, 2.2, 5.0}) {
        const auto xp = d_phi(e, phi, th), xt = d_theta(e, phi, th);
        const auto m = metric_at(p, phi, th);
        CHECK(m.g11 == doctest::Approx(dot(xp, xp)).epsilon(1e-13));
        CHECK(m.g22 == doctest::Approx(dot(xt, xt)).epsilon(1e-13));
        CHECK(std::abs(dot(xp, xt)) < 1e-13);
      }
  }

  TEST_CASE("closed-form derivatives against complex-step oracle") {
    const Embedding e{5, 1, 0.1, 3};
    const TorusParams p{5, 1, 0.1, 3};
    const double phi = M_PI / 4, th = M_PI / 7;
    const double Pp = Phi_c(e, cd(phi, kStep), th).imag() / kStep;
    const double Pt = Phi_c(e, phi, cd(th, kStep)).imag() / kStep;
    CHECK(Phi_dphi(p, phi, th) == doctest::Approx(Pp).epsilon(1e-12));
    CHECK(Phi_dtheta(p, phi, th) == doctest::Approx(Pt).epsilon(1e-12));

    // Divergence form: c_p = d_phi(Phi / r_eps) / sqrt g, c_t = d_theta(r_eps / Phi) / sqrt g.
    auto a = [&](cd x, cd y) { return Phi_c(e, x, y) / e.rad(y); };
    auto b = [&](cd x, cd y) { return e.rad(y) / Phi_c(e, x, y); };
    const double sg = std::real(e.rad(th) * Phi_c(e, phi, th));
    const double cp = a(cd(phi, kStep), th).imag() / kStep / sg;
    const double ct = b(phi, cd(th, kStep)).imag() / kStep / sg;
    const auto c = laplace_coefficients(p, phi, th);
    const double r = std::real(e.rad(th)), P = std::real(Phi_c(e, phi, th));
    CHECK(c.c_p == doctest::Approx(cp).epsilon(1e-12));
    CHECK(c.c_t == doctest::Approx(ct).epsilon(1e-12));
    CHECK(c.c_pp == doctest::Approx(1 / (r * r)).epsilon(1e-14));
    CHECK(c.c_tt == doctest::Approx(1 / (P * P)).epsilon(1e-14));
  }

  TEST_CASE("gradient norm") {
    const auto m0 = metric_at({5, 1, 0, 1}, 0.0, 0.0);
    CHECK(gradient_norm_sq(0, 0, m0) == 0.0);
    MetricPoint unit{1, 1, 1, 1, 1, 0};
    CHECK(gradient_norm_sq(1, 0, unit) == 1.0);
    CHECK(gradient_norm_sq(1, 2, m0) == doctest::Approx(1 + 4.0 / 36).epsilon(1e-15));
  }

  TEST_CASE("stas indicator") {
    const TorusParams p{5, 1, 0, 1};
    CHECK(stas_indicator(p, M_PI) == doctest::Approx(0.25).epsilon(1e-15));
    CHECK(stas_indicator(p, 0.0) == doctest::Approx(-6.0 / 36).epsilon(1e-15));
    CHECK(std::abs(stas_indicator(p, std::acos(-0.2))) < 1e-15);
    // (psi'/psi)' in arc length, by finite differences of the torus generatrix.
    const auto s = SurfaceProfile::torus(5, 1);
    const double rho = 2.0, h = 1e-4;
    auto q = [&](double x) { return s.dpsi(x) / s.psi(x); };
    CHECK((q(rho + h) - q(rho - h)) / (2 * h) == doctest::Approx(stas_indicator(p, rho)).epsilon(1e-7));
  }

  TEST_CASE("metric positivity over random valid parameters") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> U(0, 1);
    for (int t = 0; t < 200; ++t) {
      const double r = 0.1 + U(rng), eps = (U(rng) - 0.5) * 1.8 * r, R = r + std::abs(eps) + 0.05 + 3 * U(rng);
      const TorusParams p{R, r, eps, 1 + int(10 * U(rng))};
      REQUIRE_NOTHROW(p.validate());
      for (int i = 0; i < 16; ++i)
        for (int j = 0; j < 16; ++j) {
          const auto m = metric_at(p, 2 * M_PI * i / 16, 2 * M_PI * j / 16);
          CHECK(m.sqrt_det > 0);
          CHECK(m.g11 > 0);
          CHECK(m.g22 > 0);
        }
    }
  }

  TEST_CASE("parameter validation") {
    CHECK_THROWS_AS(TorusParams({1.02, 1, 0.02, 1}).validate(), ValidationError);
    CHECK_THROWS_AS(TorusParams({5, 1, 1.0, 1}).validate(), ValidationError);
    CHECK_THROWS_AS(TorusParams({5, 0, 0, 1}).validate(), ValidationError);
    CHECK_THROWS_AS(TorusParams({5, 1, 0, 0}).validate(), ValidationError);
    CHECK_NOTHROW(TorusParams({5, 1, 0.2, 15}).validate());
  }
}
