#pragma once

#include <vector>

#include "toruslab/grid.hpp"
#include "toruslab/linear_solver.hpp"
#include "toruslab/pattern.hpp"

namespace toruslab {

struct NewtonOptions {
  double tol = 1e-10;
  int max_iter = 25;
  LinearSolverKind solver = LinearSolverKind::Direct;
  double linear_tol = 1e-13;
};

struct SteadyState {
  ScalarField field;
  double residual_norm = 0.0;
  TorusParams params;
  int newton_iters = 0;
  // Max-norm residual before each Newton update and after the last one.
  std::vector<double> history;
  // max r_{k+1} / r_k^2 over the last three steps (quadratic convergence constant).
  double quadratic_constant = 0.0;
};

// Pointwise L u + f(u).
ScalarField residual(const ScalarField& u, const DiscreteOperator& op, const Nonlinearity& nl);

// Symmetric matrix -(S + diag(weights * d)); SPD when the linearization is stable.
SparseCol negative_shifted(const DiscreteOperator& op, const Eigen::VectorXd& d);

// Throws SolverError("NoConvergence") or SolverError("SingularJacobian").
SteadyState newton_solve(const ScalarField& initial, const DiscreteOperator& op,
                         const Nonlinearity& nl, const NewtonOptions& opt = {});

struct Branch {
  std::vector<double> epsilons;
  std::vector<SteadyState> states;
  const SteadyState& final_state() const { return states.back(); }
};

// Chains Newton solves at eps_k = start_eps + k (target - start_eps) / steps.
Branch continuation(const SteadyState& start, double target_eps, int steps,
                    const PeriodicGrid& grid, const Nonlinearity& nl,
                    const NewtonOptions& opt = {});

struct SymmetryReport {
  double equator_defect = 0.0;
  std::vector<double> plane_defects;  // one per theta_k plane, k = 0..n-1
  double max_defect() const;
};

SymmetryReport symmetry_check(const ScalarField& u, const TorusParams& params);

// Max over {0, pi} x S^1 of |centered phi-difference|, and over the theta_k
// lines of |centered theta-difference|.
struct DerivativeConditionReport {
  double phi_rows = 0.0;
  double theta_lines = 0.0;
};
DerivativeConditionReport derivative_conditions(const ScalarField& u, const TorusParams& params);

}  // namespace toruslab
