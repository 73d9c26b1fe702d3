#pragma once

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseCholesky>
#include <memory>

#include "toruslab/grid.hpp"

namespace toruslab {

enum class LinearSolverKind { Direct, Iterative };

// Solver for a symmetric sparse matrix: LDL^T by default, preconditioned
// conjugate gradients as a fallback for large SPD systems.
class SymmetricSolver {
 public:
  SymmetricSolver(LinearSolverKind kind = LinearSolverKind::Direct, double iterative_tol = 1e-13,
                  int iterative_max_iter = 20000)
      : kind_(kind), tol_(iterative_tol), max_iter_(iterative_max_iter) {}

  // Throws SolverError("SingularJacobian") on a zero pivot.
  void factor(const SparseCol& A);
  Eigen::VectorXd solve(const Eigen::VectorXd& b) const;

  // Direct mode only: count of negative / smallest |pivot| in D.
  int negative_pivots() const;
  double min_abs_pivot() const;
  double max_abs_pivot() const;
  LinearSolverKind kind() const { return kind_; }

 private:
  LinearSolverKind kind_;
  double tol_;
  int max_iter_;
  std::shared_ptr<Eigen::SimplicialLDLT<SparseCol>> ldlt_;
  std::shared_ptr<Eigen::ConjugateGradient<SparseCol, Eigen::Lower | Eigen::Upper>> cg_;
  std::shared_ptr<const SparseCol> A_;
};

}  // namespace toruslab
