#pragma once

#include <string>
#include <vector>

#include "toruslab/newton.hpp"
#include "toruslab/pattern.hpp"

namespace toruslab {

struct PerturbationCoefficients {
  std::vector<double> phi;
  std::vector<double> A;
  std::vector<double> B;
  std::vector<double> w;  // R + r cos(phi)
};

// Closed-form A and B along the extended profile on n_phi uniform points.
PerturbationCoefficients coefficients_AB(const ExtendedProfile& U, const Nonlinearity& nl,
                                         const TorusParams& params, int n, int n_phi);

// Periodic solution of C'' - (r sin/(R + r cos)) C' - B C = rhs in flux form.
// Throws SolverError("SingularSystem") when the reciprocal condition number is below rcond_tol.
std::vector<double> solve_periodic_ode(const PerturbationCoefficients& c,
                                       const std::vector<double>& B,
                                       const std::vector<double>& rhs, const TorusParams& params,
                                       double rcond_tol = 1e-10);

// Discrete left-hand side, the exact inverse of solve_periodic_ode.
std::vector<double> apply_periodic_ode(const PerturbationCoefficients& c,
                                       const std::vector<double>& B, const std::vector<double>& C,
                                       const TorusParams& params);

std::vector<double> solve_C1(const PerturbationCoefficients& c, const TorusParams& params,
                             double rcond_tol = 1e-10);
std::vector<double> solve_C2(const PerturbationCoefficients& c, const TorusParams& params,
                             double rcond_tol = 1e-10);

struct PerturbationSolution {
  std::vector<double> phi, A, B, C1, C2, w;
  int n_waves = 0;
  int threshold_N = 0;
};

PerturbationSolution solve_perturbation(const ExtendedProfile& U, const Nonlinearity& nl,
                                        const TorusParams& params, int n, int n_phi,
                                        double rcond_tol = 1e-10);

struct PerturbationTolerances {
  double c1_abs = 1e-8;
  double c2_neumann = 1e-8;
  double c2_nonzero_rel = 1e-3;
  double zero_integral = 1e-8;
};

struct PerturbationVerdict {
  bool b_positive = false;
  bool c1_vanishes = false;
  bool c2_neumann = false;
  bool c2_nonzero = false;
  bool zero_integral = false;
  bool negativity_integral = false;

  double min_B = 0.0;
  double c1_norm = 0.0;
  double c2_norm = 0.0;
  double c2_at_0 = 0.0;
  double c2_at_pi = 0.0;
  double c2_slope_0 = 0.0;
  double c2_slope_pi = 0.0;
  double c2_symmetry_defect = 0.0;
  double integral_identity = 0.0;
  double negativity_value = 0.0;
  double A_at_0 = 0.0;
  double weighted_A_integral = 0.0;

  bool all() const {
    return b_positive && c1_vanishes && c2_neumann && c2_nonzero && zero_integral &&
           negativity_integral;
  }
};

// Trapezoid over [0, pi] with half weights at the ends (n_phi even).
double half_range_integral(const std::vector<double>& g, int n_phi);

PerturbationVerdict evaluate_perturbation(const PerturbationSolution& sol,
                                          const PerturbationTolerances& tol = {});

// V(phi, theta) = C2(phi) sin(n theta).
ScalarField first_order_field(const std::vector<double>& C2, int n, const PeriodicGrid& grid);

struct FirstOrderRow {
  double epsilon = 0.0;
  double E = 0.0;
  double cos_content = 0.0;
  double sup_diff = 0.0;
  bool skipped = false;
  std::string note;
};

struct FirstOrderTable {
  std::vector<FirstOrderRow> rows;
  double order = 0.0;
  std::vector<double> halving_ratios;  // E at the larger over E at the smaller consecutive eps
};

// Max over phi-rows of |(2/n_theta) sum_j D_ij cos(n theta_j)|.
double cos_content(const ScalarField& D, int n);

FirstOrderTable compare_with_newton(const std::vector<double>& eps_list,
                                    const std::vector<ScalarField>& fields,
                                    const ScalarField& base, const ScalarField& V, int n);

std::string perturbation_to_csv(const PerturbationSolution& sol);
std::string perturbation_verdict_json(const PerturbationSolution& sol,
                                      const PerturbationVerdict& v);

}  // namespace toruslab
