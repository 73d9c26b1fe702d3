#pragma once

#include <cmath>
#include <complex>
#include <functional>
#include <vector>

#include "toruslab/pattern.hpp"

namespace testing {

// Adaptive Simpson, independent of the library quadrature.
inline double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                               double tol = 1e-13, int depth = 40) {
  std::function<double(double, double, double, double, double, double, int)> rec =
      [&](double a, double b, double fa, double fm, double fb, double whole, int d) {
        const double m = 0.5 * (a + b), lm = 0.5 * (a + m), rm = 0.5 * (m + b);
        const double flm = f(lm), frm = f(rm);
        const double left = (b - a) / 12 * (fa + 4 * flm + fm);
        const double right = (b - a) / 12 * (fm + 4 * frm + fb);
        if (d <= 0 || std::abs(left + right - whole) < 15 * tol)
          return left + right + (left + right - whole) / 15;
        return rec(a, m, fa, flm, fm, left, d - 1) + rec(m, b, fm, frm, fb, right, d - 1);
      };
  const double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
  return rec(a, b, fa, fm, fb, (b - a) / 6 * (fa + 4 * fm + fb), depth);
}

inline toruslab::TorusParams torus(double eps = 0.0, int n = 2) {
  return toruslab::TorusParams{5.0, 1.0, eps, n};
}

struct Forged {
  toruslab::Profile profile;
  toruslab::Nonlinearity nl;
};

inline Forged forge(int samples = 1025) {
  toruslab::ProfileConfig pc;
  pc.samples = samples;
  const auto p = toruslab::build_profile(pc, torus());
  auto nl = toruslab::forge_nonlinearity(p, torus());
  return {p, nl};
}

inline double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double m = 0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

}  // namespace testing
