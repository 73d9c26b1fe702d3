#include "toruslab/linear_solver.hpp"

#include "toruslab/errors.hpp"

namespace toruslab {

void SymmetricSolver::factor(const SparseCol& A) {
  A_ = std::make_shared<const SparseCol>(A);
  if (kind_ == LinearSolverKind::Direct) {
    ldlt_ = std::make_shared<Eigen::SimplicialLDLT<SparseCol>>();
    ldlt_->compute(*A_);
    if (ldlt_->info() != Eigen::Success)
      throw SolverError("SingularJacobian", "LDL^T factorization failed");
    const double mn = min_abs_pivot(), mx = max_abs_pivot();
    if (!(mn > 1e-14 * mx))
      throw SolverError("SingularJacobian", "near-zero pivot in LDL^T factorization");
  } else {
    cg_ = std::make_shared<Eigen::ConjugateGradient<SparseCol, Eigen::Lower | Eigen::Upper>>();
    cg_->setTolerance(tol_);
    cg_->setMaxIterations(max_iter_);
    cg_->compute(*A_);
    if (cg_->info() != Eigen::Success)
      throw SolverError("SingularJacobian", "iterative solver setup failed");
  }
}

Eigen::VectorXd SymmetricSolver::solve(const Eigen::VectorXd& b) const {
  Eigen::VectorXd x;
  if (kind_ == LinearSolverKind::Direct) {
    x = ldlt_->solve(b);
  } else {
    x = cg_->solve(b);
    if (cg_->info() != Eigen::Success)
      throw SolverError("SingularJacobian", "conjugate gradients did not converge");
  }
  if (!x.allFinite()) throw SolverError("SingularJacobian", "non-finite linear solve");
  return x;
}

int SymmetricSolver::negative_pivots() const {
  if (!ldlt_) return -1;
  return static_cast<int>((ldlt_->vectorD().array() < 0.0).count());
}

double SymmetricSolver::min_abs_pivot() const {
  return ldlt_ ? ldlt_->vectorD().cwiseAbs().minCoeff() : 0.0;
}

double SymmetricSolver::max_abs_pivot() const {
  return ldlt_ ? ldlt_->vectorD().cwiseAbs().maxCoeff() : 0.0;
}

}  // namespace toruslab
