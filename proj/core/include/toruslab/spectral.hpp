#pragma once

#include <optional>
#include <vector>

#include "toruslab/newton.hpp"

namespace toruslab {

struct SpectralOptions {
  double tol = 1e-10;
  int max_iter = 200;
  double shift_offset = 1e-3;
  LinearSolverKind solver = LinearSolverKind::Direct;
};

struct SpectralResult {
  double lambda1 = 0.0;
  ScalarField eigenfield;
  double residual = 0.0;
  double normalization = 0.0;
  double shift = 0.0;
  int iterations = 0;
};

// Smallest eigenvalue of -(L + diag(fprime)) in the weighted inner product by
// shifted inverse iteration. Throws SolverError("NotConverged") or
// SolverError("NonPositiveEigenfield").
SpectralResult principal_eigpair(const DiscreteOperator& op, const Eigen::VectorXd& fprime,
                                 const SpectralOptions& opt = {},
                                 std::optional<double> lambda_est = std::nullopt);

SpectralResult principal_eigpair(const SteadyState& steady, const DiscreteOperator& op,
                                 const Nonlinearity& nl, const SpectralOptions& opt = {},
                                 std::optional<double> lambda_est = std::nullopt);

Eigen::VectorXd fprime_of(const ScalarField& u, const Nonlinearity& nl);

// (int |grad phi|^2 - f'(U) phi^2) / int phi^2; throws ValidationError on a zero field.
double rayleigh_quotient(const ScalarField& phi, const Eigen::VectorXd& fprime,
                         const DiscreteOperator& op);
double rayleigh_quotient(const ScalarField& phi, const ScalarField& u, const DiscreteOperator& op,
                         const Nonlinearity& nl);

struct SLResult {
  double lambda1 = 0.0;
  double lambda2 = 0.0;
  std::vector<double> eigenprofile;  // on the phi-grid, full-torus normalized
};

// Periodic 1-D operator -(1/r^2) d2 + sin/(r(R + r cos)) d - f' with weight R + r cos,
// discretized in flux form on n = fprime.size() points.
SLResult sl_reduction_eigpair(const std::vector<double>& fprime, const TorusParams& params);

struct HalfTorusReport {
  double integral = 0.0;  // int over T+ of (sqrt2 phi)^2
  double lower_half = 0.0;
  double upper_half = 0.0;
  bool ok = false;
};

HalfTorusReport half_torus_normalization_check(const std::vector<double>& eigenprofile,
                                               const TorusParams& params, double tol = 1e-8);

struct ConvergenceRow {
  double epsilon = 0.0;
  double lambda1 = 0.0;
  double gap = 0.0;
  double sup_diff = 0.0;
  int newton_iters = 0;
  double residual_norm = 0.0;
  double eigen_residual = 0.0;
};

struct ConvergenceTable {
  std::vector<ConvergenceRow> rows;
  std::vector<SteadyState> states;  // parallel to rows
  double lambda_order = 0.0;        // fitted order of |lambda1^eps - lambda1|
  double sup_diff_order = 0.0;      // fitted order of ||U^eps - U||_inf
  std::vector<double> gap_ratios;   // gap at the larger over gap at the smaller of consecutive eps
  bool monotone = true;
};

// Least-squares slope of log y against log x over positive pairs.
double fitted_order(const std::vector<double>& x, const std::vector<double>& y);

ConvergenceTable convergence_study(const std::vector<double>& eps_list, const SteadyState& base,
                                   double lambda0, const PeriodicGrid& grid,
                                   const Nonlinearity& nl, int steps,
                                   const NewtonOptions& nopt = {},
                                   const SpectralOptions& sopt = {});

}  // namespace toruslab
