#include "toruslab/newton.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "toruslab/errors.hpp"

namespace toruslab {

ScalarField residual(const ScalarField& u, const DiscreteOperator& op, const Nonlinearity& nl) {
  ScalarField res(op.grid, op.L * u.values);
  for (Eigen::Index k = 0; k < res.values.size(); ++k) res.values[k] += nl(u.values[k]);
  return res;
}

SparseCol negative_shifted(const DiscreteOperator& op, const Eigen::VectorXd& d) {
  if (!op.flux_form) throw ValidationError("operator must be assembled in flux form");
  SparseCol K = -op.S;
  for (int c = 0; c < K.outerSize(); ++c)
    for (SparseCol::InnerIterator it(K, c); it; ++it)
      if (it.row() == it.col()) it.valueRef() -= op.weights[c] * d[c];
  return K;
}

SteadyState newton_solve(const ScalarField& initial, const DiscreteOperator& op,
                         const Nonlinearity& nl, const NewtonOptions& opt) {
  if (initial.n_phi != op.grid.n_phi || initial.n_theta != op.grid.n_theta)
    throw ValidationError("initial field does not match the operator grid");
  SteadyState st;
  st.params = op.params;
  Eigen::VectorXd u = initial.values;
  SymmetricSolver solver(opt.solver, opt.linear_tol);
  for (int it = 0;; ++it) {
    const ScalarField F = residual(ScalarField(op.grid, u), op, nl);
    const double nr = F.all_finite() ? F.max_abs() : INFINITY;
    st.history.push_back(nr);
    if (!std::isfinite(nr) || (st.history.size() > 1 && nr > 1e8 * st.history.front()))
      throw SolverError("NoConvergence", "Newton iterates diverged at iteration " +
                                             std::to_string(it));
    if (nr < opt.tol) {
      st.field = ScalarField(op.grid, u);
      st.residual_norm = nr;
      st.newton_iters = it;
      const size_t n = st.history.size();
      for (size_t k = n >= 4 ? n - 3 : 1; k < n; ++k)
        if (st.history[k - 1] > 0.0)
          st.quadratic_constant =
              std::max(st.quadratic_constant, st.history[k] / (st.history[k - 1] * st.history[k - 1]));
      return st;
    }
    if (it >= opt.max_iter) {
      std::ostringstream m;
      m << "max_iter=" << opt.max_iter << " reached, residual " << nr;
      throw SolverError("NoConvergence", m.str());
    }
    Eigen::VectorXd fp(u.size());
    for (Eigen::Index k = 0; k < u.size(); ++k) fp[k] = nl.derivative(u[k]);
    solver.factor(negative_shifted(op, fp));
    const Eigen::VectorXd rhs = -op.weights.cwiseProduct(F.values);
    u -= solver.solve(rhs);
  }
}

Branch continuation(const SteadyState& start, double target_eps, int steps,
                    const PeriodicGrid& grid, const Nonlinearity& nl, const NewtonOptions& opt) {
  if (steps < 1) throw ValidationError("continuation needs steps >= 1");
  const double eps0 = start.params.epsilon;
  start.params.with_epsilon(target_eps).validate();
  grid.validate_for(start.params);
  Branch br;
  if (target_eps == eps0) {
    br.epsilons.push_back(eps0);
    br.states.push_back(start);
    return br;
  }
  ScalarField u = start.field;
  for (int k = 1; k <= steps; ++k) {
    const double eps = eps0 + (target_eps - eps0) * k / steps;
    const TorusParams p = start.params.with_epsilon(eps);
    try {
      const DiscreteOperator op = assemble_laplacian(p, grid);
      SteadyState st = newton_solve(u, op, nl, opt);
      u = st.field;
      br.epsilons.push_back(eps);
      br.states.push_back(std::move(st));
    } catch (const SolverError& e) {
      std::ostringstream m;
      m << std::string(e.what()).substr(e.code().size() + 2)
        << " (continuation step at epsilon=" << eps << ")";
      throw SolverError(e.code(), m.str());
    }
  }
  return br;
}

double SymmetryReport::max_defect() const {
  double m = equator_defect;
  for (double d : plane_defects) m = std::max(m, d);
  return m;
}

SymmetryReport symmetry_check(const ScalarField& u, const TorusParams& params) {
  const PeriodicGrid g = u.grid();
  SymmetryReport rep;
  for (int i = 0; i < g.n_phi; ++i)
    for (int j = 0; j < g.n_theta; ++j)
      rep.equator_defect = std::max(rep.equator_defect, std::abs(u(i, j) - u(g.wrap_phi(-i), j)));
  const int n = params.n_waves;
  if (g.n_theta % (4 * n)) throw ValidationError("grid does not resolve the symmetry planes");
  const int q = g.n_theta / (4 * n);
  rep.plane_defects.assign(n, 0.0);
  for (int k = 0; k < n; ++k) {
    const int jk = (2 * k + 1) * q;
    double d = 0.0;
    for (int i = 0; i < g.n_phi; ++i)
      for (int s = 1; s <= g.n_theta / 2; ++s)
        d = std::max(d, std::abs(u(i, g.wrap_theta(jk + s)) - u(i, g.wrap_theta(jk - s))));
    rep.plane_defects[k] = d;
  }
  return rep;
}

DerivativeConditionReport derivative_conditions(const ScalarField& u, const TorusParams& params) {
  const PeriodicGrid g = u.grid();
  DerivativeConditionReport rep;
  const double hp = g.h_phi(), ht = g.h_theta();
  for (int i : {0, g.n_phi / 2})
    for (int j = 0; j < g.n_theta; ++j)
      rep.phi_rows = std::max(
          rep.phi_rows, std::abs(u(g.wrap_phi(i + 1), j) - u(g.wrap_phi(i - 1), j)) / (2 * hp));
  const int n = params.n_waves;
  const int q = g.n_theta / (4 * n);
  for (int k = 0; k < 2 * n; ++k) {
    const int jk = (2 * k + 1) * q;
    for (int i = 0; i < g.n_phi; ++i)
      rep.theta_lines = std::max(
          rep.theta_lines,
          std::abs(u(i, g.wrap_theta(jk + 1)) - u(i, g.wrap_theta(jk - 1))) / (2 * ht));
  }
  return rep;
}

}  // namespace toruslab
