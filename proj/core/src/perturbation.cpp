#include "toruslab/perturbation.hpp"

#include <Eigen/LU>
#include <algorithm>
#include <cmath>
#include <iomanip>
#include <json.hpp>
#include <sstream>

#include "toruslab/errors.hpp"
#include "toruslab/spectral.hpp"

namespace toruslab {

PerturbationCoefficients coefficients_AB(const ExtendedProfile& U, const Nonlinearity& nl,
                                         const TorusParams& params, int n, int n_phi) {
  if (n < 1) throw ValidationError("n must be >= 1");
  if (n_phi < 4 || n_phi % 2) throw ValidationError("n_phi must be even and >= 4");
  const double R = params.R, r = params.r;
  const std::vector<double> u = U.sample(n_phi);
  PerturbationCoefficients c;
  c.phi.resize(n_phi);
  c.A.resize(n_phi);
  c.B.resize(n_phi);
  c.w.resize(n_phi);
  for (int i = 0; i < n_phi; ++i) {
    const double phi = 2.0 * M_PI * i / n_phi;
    const double w = R + r * std::cos(phi);
    // Odd extension of U' with exact zeros at phi = 0, pi.
    const double du = (i == 0 || 2 * i == n_phi) ? 0.0 : U.d1(phi);
    const double sn = (i == 0 || 2 * i == n_phi) ? 0.0 : std::sin(phi);
    c.phi[i] = phi;
    c.w[i] = w;
    c.A[i] = 2.0 * r * (-nl(u[i]) + R * sn * du / (2.0 * r * w * w));
    c.B[i] = r * r * (static_cast<double>(n) * n / (w * w) - nl.derivative(u[i]));
  }
  return c;
}

namespace {

Eigen::MatrixXd periodic_matrix(const PerturbationCoefficients& c, const std::vector<double>& B,
                                const TorusParams& params) {
  const int m = static_cast<int>(c.phi.size());
  const double h = 2.0 * M_PI / m;
  Eigen::MatrixXd M = Eigen::MatrixXd::Zero(m, m);
  for (int i = 0; i < m; ++i) {
    const double qp = params.R + params.r * std::cos(h * (i + 0.5));
    const double qm = params.R + params.r * std::cos(h * (i - 0.5));
    M(i, (i + 1) % m) += qp / (h * h);
    M(i, (i + m - 1) % m) += qm / (h * h);
    M(i, i) += -(qp + qm) / (h * h) - c.w[i] * B[i];
  }
  return M;
}

}  // namespace

std::vector<double> solve_periodic_ode(const PerturbationCoefficients& c,
                                       const std::vector<double>& B,
                                       const std::vector<double>& rhs, const TorusParams& params,
                                       double rcond_tol) {
  const int m = static_cast<int>(c.phi.size());
  if (static_cast<int>(B.size()) != m || static_cast<int>(rhs.size()) != m)
    throw ValidationError("coefficient sizes do not match");
  const Eigen::MatrixXd M = periodic_matrix(c, B, params);
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(M);
  const double rc = lu.rcond();
  if (!(rc > rcond_tol)) {
    std::ostringstream msg;
    msg << "periodic ODE operator is singular (rcond=" << rc
        << "); B is not positive, n is likely below the threshold";
    throw SolverError("SingularSystem", msg.str());
  }
  Eigen::VectorXd b(m);
  for (int i = 0; i < m; ++i) b[i] = c.w[i] * rhs[i];
  const Eigen::VectorXd x = lu.solve(b);
  return std::vector<double>(x.data(), x.data() + m);
}

std::vector<double> apply_periodic_ode(const PerturbationCoefficients& c,
                                       const std::vector<double>& B, const std::vector<double>& C,
                                       const TorusParams& params) {
  const Eigen::MatrixXd M = periodic_matrix(c, B, params);
  const Eigen::VectorXd x = M * Eigen::Map<const Eigen::VectorXd>(C.data(), C.size());
  std::vector<double> out(C.size());
  for (size_t i = 0; i < C.size(); ++i) out[i] = x[i] / c.w[i];
  return out;
}

std::vector<double> solve_C1(const PerturbationCoefficients& c, const TorusParams& params,
                             double rcond_tol) {
  return solve_periodic_ode(c, c.B, std::vector<double>(c.phi.size(), 0.0), params, rcond_tol);
}

std::vector<double> solve_C2(const PerturbationCoefficients& c, const TorusParams& params,
                             double rcond_tol) {
  return solve_periodic_ode(c, c.B, c.A, params, rcond_tol);
}

PerturbationSolution solve_perturbation(const ExtendedProfile& U, const Nonlinearity& nl,
                                        const TorusParams& params, int n, int n_phi,
                                        double rcond_tol) {
  const PerturbationCoefficients c = coefficients_AB(U, nl, params, n, n_phi);
  PerturbationSolution s;
  s.phi = c.phi;
  s.A = c.A;
  s.B = c.B;
  s.w = c.w;
  s.C1 = solve_C1(c, params, rcond_tol);
  s.C2 = solve_C2(c, params, rcond_tol);
  s.n_waves = n;
  s.threshold_N = threshold_N(nl, params.with_epsilon(0.0)).N;
  return s;
}

double half_range_integral(const std::vector<double>& g, int n_phi) {
  const int m = n_phi / 2;
  double s = 0.5 * (g[0] + g[m]);
  for (int i = 1; i < m; ++i) s += g[i];
  return s * 2.0 * M_PI / n_phi;
}

PerturbationVerdict evaluate_perturbation(const PerturbationSolution& sol,
                                          const PerturbationTolerances& tol) {
  const int m = static_cast<int>(sol.phi.size());
  const double h = 2.0 * M_PI / m;
  PerturbationVerdict v;
  v.min_B = *std::min_element(sol.B.begin(), sol.B.end());
  for (int i = 0; i < m; ++i) {
    v.c1_norm = std::max(v.c1_norm, std::abs(sol.C1[i]));
    v.c2_norm = std::max(v.c2_norm, std::abs(sol.C2[i]));
    v.c2_symmetry_defect = std::max(v.c2_symmetry_defect, std::abs(sol.C2[i] - sol.C2[(m - i) % m]));
  }
  v.c2_at_0 = sol.C2[0];
  v.c2_at_pi = sol.C2[m / 2];
  v.c2_slope_0 = (sol.C2[1] - sol.C2[m - 1]) / (2.0 * h);
  v.c2_slope_pi = (sol.C2[m / 2 + 1] - sol.C2[m / 2 - 1]) / (2.0 * h);

  std::vector<double> ident(m), neg(m), wa(m);
  for (int i = 0; i < m; ++i) {
    neg[i] = sol.w[i] * sol.B[i] * sol.C2[i];
    ident[i] = neg[i] + sol.w[i] * sol.A[i];
    wa[i] = sol.w[i] * sol.A[i];
  }
  v.integral_identity = half_range_integral(ident, m);
  v.negativity_value = half_range_integral(neg, m);
  v.weighted_A_integral = half_range_integral(wa, m);
  v.A_at_0 = sol.A[0];

  v.b_positive = v.min_B > 0.0;
  v.c1_vanishes = v.c1_norm < tol.c1_abs && v.c1_norm <= tol.c1_abs * std::max(v.c2_norm, 1.0);
  v.c2_neumann = std::abs(v.c2_slope_0) < tol.c2_neumann && std::abs(v.c2_slope_pi) < tol.c2_neumann;
  v.c2_nonzero = std::abs(v.c2_at_0) > tol.c2_nonzero_rel * v.c2_norm &&
                 std::abs(v.c2_at_pi) > tol.c2_nonzero_rel * v.c2_norm;
  v.zero_integral = std::abs(v.integral_identity) < tol.zero_integral;
  v.negativity_integral = v.negativity_value < 0.0;
  return v;
}

ScalarField first_order_field(const std::vector<double>& C2, int n, const PeriodicGrid& grid) {
  if (static_cast<int>(C2.size()) != grid.n_phi)
    throw ValidationError("C2 length does not match n_phi");
  ScalarField V(grid);
  for (int j = 0; j < grid.n_theta; ++j) {
    const double s = std::sin(n * grid.theta(j));
    for (int i = 0; i < grid.n_phi; ++i) V(i, j) = C2[i] * s;
  }
  return V;
}

double cos_content(const ScalarField& D, int n) {
  const PeriodicGrid g = D.grid();
  std::vector<double> c(g.n_theta);
  for (int j = 0; j < g.n_theta; ++j) c[j] = std::cos(n * g.theta(j));
  double mx = 0.0;
  for (int i = 0; i < g.n_phi; ++i) {
    double s = 0.0;
    for (int j = 0; j < g.n_theta; ++j) s += D(i, j) * c[j];
    mx = std::max(mx, std::abs(2.0 * s / g.n_theta));
  }
  return mx;
}

FirstOrderTable compare_with_newton(const std::vector<double>& eps_list,
                                    const std::vector<ScalarField>& fields,
                                    const ScalarField& base, const ScalarField& V, int n) {
  if (eps_list.size() != fields.size()) throw ValidationError("eps list and fields differ in length");
  FirstOrderTable tab;
  std::vector<double> e, E;
  for (size_t k = 0; k < eps_list.size(); ++k) {
    FirstOrderRow row;
    row.epsilon = eps_list[k];
    const Eigen::VectorXd diff = fields[k].values - base.values;
    row.sup_diff = diff.cwiseAbs().maxCoeff();
    if (eps_list[k] == 0.0) {
      row.skipped = true;
      row.note = "epsilon = 0: difference quotient undefined";
    } else {
      const ScalarField D(base.grid(), diff / eps_list[k]);
      row.E = (D.values - V.values).cwiseAbs().maxCoeff();
      row.cos_content = cos_content(D, n);
      e.push_back(std::abs(eps_list[k]));
      E.push_back(row.E);
    }
    tab.rows.push_back(row);
  }
  tab.order = fitted_order(e, E);
  for (size_t k = 0; k + 1 < e.size(); ++k) {
    const bool up = e[k + 1] > e[k];
    const double big = up ? E[k + 1] : E[k], small = up ? E[k] : E[k + 1];
    tab.halving_ratios.push_back(small > 0.0 ? big / small : INFINITY);
  }
  return tab;
}

std::string perturbation_to_csv(const PerturbationSolution& sol) {
  std::ostringstream os;
  os << std::setprecision(17) << "phi,A,B,C1,C2\n";
  for (size_t i = 0; i < sol.phi.size(); ++i)
    os << sol.phi[i] << ',' << sol.A[i] << ',' << sol.B[i] << ',' << sol.C1[i] << ',' << sol.C2[i]
       << '\n';
  return os.str();
}

std::string perturbation_verdict_json(const PerturbationSolution& sol,
                                      const PerturbationVerdict& v) {
  nlohmann::ordered_json j;
  j["n_waves"] = sol.n_waves;
  j["threshold_N"] = sol.threshold_N;
  j["facts"] = {{"b_positive", v.b_positive},
                {"c1_vanishes", v.c1_vanishes},
                {"c2_neumann", v.c2_neumann},
                {"c2_nonzero", v.c2_nonzero},
                {"zero_integral", v.zero_integral},
                {"negativity_integral", v.negativity_integral}};
  j["magnitudes"] = {{"min_B", v.min_B},
                     {"c1_norm", v.c1_norm},
                     {"c2_norm", v.c2_norm},
                     {"c2_at_0", v.c2_at_0},
                     {"c2_at_pi", v.c2_at_pi},
                     {"c2_slope_0", v.c2_slope_0},
                     {"c2_slope_pi", v.c2_slope_pi},
                     {"c2_symmetry_defect", v.c2_symmetry_defect},
                     {"integral_identity", v.integral_identity},
                     {"negativity_value", v.negativity_value},
                     {"A_at_0", v.A_at_0},
                     {"weighted_A_integral", v.weighted_A_integral}};
  j["all"] = v.all();
  return j.dump(2);
}

}  // namespace toruslab
