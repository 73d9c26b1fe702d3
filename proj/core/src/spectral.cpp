#include "toruslab/spectral.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <sstream>

#include "toruslab/errors.hpp"

namespace toruslab {

namespace {

SparseCol shifted(SparseCol K, const Eigen::VectorXd& w, double s) {
  for (int c = 0; c < K.outerSize(); ++c)
    for (SparseCol::InnerIterator it(K, c); it; ++it)
      if (it.row() == it.col()) it.valueRef() -= s * w[c];
  return K;
}

// Factor K - s M and return the number of eigenvalues below s, or -1 if singular.
int inertia(SymmetricSolver& solver, const SparseCol& K, const Eigen::VectorXd& w, double s) {
  try {
    solver.factor(shifted(K, w, s));
  } catch (const SolverError&) {
    return -1;
  }
  return solver.negative_pivots();
}

}  // namespace

Eigen::VectorXd fprime_of(const ScalarField& u, const Nonlinearity& nl) {
  Eigen::VectorXd fp(u.values.size());
  for (Eigen::Index k = 0; k < fp.size(); ++k) fp[k] = nl.derivative(u.values[k]);
  return fp;
}

SpectralResult principal_eigpair(const DiscreteOperator& op, const Eigen::VectorXd& fprime,
                                 const SpectralOptions& opt, std::optional<double> lambda_est) {
  const SparseCol K = negative_shifted(op, fprime);
  const Eigen::VectorXd& w = op.weights;
  const double cell = op.grid.h_phi() * op.grid.h_theta();

  if (!lambda_est) lambda_est = -w.dot(fprime) / w.sum();  // quotient of the constant field
  const double delta = opt.shift_offset;

  // Shifts are only ever placed below lambda1, certified by inertia; LDL^T is
  // required for the count, the iteration itself may use either solver.
  SymmetricSolver probe(LinearSolverKind::Direct);
  double hi = *lambda_est - delta;
  int neg = inertia(probe, K, w, hi);
  double lo = hi;
  if (neg != 0) {
    double step = delta;
    do {
      step *= 2.0;
      lo = *lambda_est - step;
      neg = inertia(probe, K, w, lo);
      if (neg != 0) hi = lo;
      if (step > 1e12) throw SolverError("NotConverged", "no shift below lambda1 found");
    } while (neg != 0);
    while (hi - lo > delta) {
      const double mid = 0.5 * (lo + hi);
      const int nm = inertia(probe, K, w, mid);
      if (nm == 0)
        lo = mid;
      else
        hi = mid;
    }
    if (inertia(probe, K, w, lo) != 0) throw SolverError("NotConverged", "inertia check failed");
  }
  const double s = lo;

  SymmetricSolver solver(opt.solver);
  if (opt.solver == LinearSolverKind::Direct)
    solver = probe;
  else
    solver.factor(shifted(K, w, s));

  Eigen::VectorXd x = Eigen::VectorXd::Ones(w.size());
  x /= std::sqrt(x.dot(w.cwiseProduct(x)));
  SpectralResult res;
  res.shift = s;
  for (int it = 1; it <= opt.max_iter; ++it) {
    Eigen::VectorXd y = solver.solve(w.cwiseProduct(x));
    y /= std::sqrt(y.dot(w.cwiseProduct(y)));
    if (y.sum() < 0.0) y = -y;
    x = y;
    const Eigen::VectorXd Kx = K * x;
    const double lam = x.dot(Kx);
    const Eigen::VectorXd r = Kx.cwiseQuotient(w) - lam * x;
    res.lambda1 = lam;
    res.residual = r.norm() / x.norm();
    res.iterations = it;
    if (res.residual < opt.tol) break;
  }
  if (!(res.residual < opt.tol)) {
    std::ostringstream m;
    m << "tol=" << opt.tol << " residual=" << res.residual << " after " << res.iterations
      << " iterations";
    throw SolverError("NotConverged", m.str());
  }
  if ((x.array() <= 0.0).any())
    throw SolverError("NonPositiveEigenfield", "inverse iteration converged to a sign-changing mode");
  x /= std::sqrt(cell);
  res.eigenfield = ScalarField(op.grid, x);
  res.normalization = x.dot(w.cwiseProduct(x)) * cell;
  return res;
}

SpectralResult principal_eigpair(const SteadyState& steady, const DiscreteOperator& op,
                                 const Nonlinearity& nl, const SpectralOptions& opt,
                                 std::optional<double> lambda_est) {
  return principal_eigpair(op, fprime_of(steady.field, nl), opt, lambda_est);
}

double rayleigh_quotient(const ScalarField& phi, const Eigen::VectorXd& fprime,
                         const DiscreteOperator& op) {
  const double cell = op.grid.h_phi() * op.grid.h_theta();
  const Eigen::VectorXd wp = op.weights.cwiseProduct(phi.values);
  const double den = wp.dot(phi.values) * cell;
  if (!(den > 0.0)) throw ValidationError("ZeroField: Rayleigh quotient of a zero field");
  const double pot = wp.dot(fprime.cwiseProduct(phi.values)) * cell;
  return (dirichlet_integral(phi, op.params, op.grid) - pot) / den;
}

double rayleigh_quotient(const ScalarField& phi, const ScalarField& u, const DiscreteOperator& op,
                         const Nonlinearity& nl) {
  return rayleigh_quotient(phi, fprime_of(u, nl), op);
}

SLResult sl_reduction_eigpair(const std::vector<double>& fprime, const TorusParams& params) {
  if (params.epsilon != 0.0) throw ValidationError("1-D reduction requires epsilon = 0");
  const int n = static_cast<int>(fprime.size());
  if (n < 4) throw ValidationError("1-D reduction needs at least 4 points");
  const double h = 2.0 * M_PI / n;
  const double R = params.R, r = params.r;
  Eigen::MatrixXd K = Eigen::MatrixXd::Zero(n, n);
  Eigen::VectorXd w(n);
  for (int i = 0; i < n; ++i) {
    w[i] = r * (R + r * std::cos(h * i));
    const double ap = (R + r * std::cos(h * (i + 0.5))) / r / (h * h);
    const double am = (R + r * std::cos(h * (i - 0.5))) / r / (h * h);
    K(i, (i + 1) % n) -= ap;
    K(i, (i + n - 1) % n) -= am;
    K(i, i) += ap + am - w[i] * fprime[i];
  }
  K = 0.5 * (K + K.transpose()).eval();
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(K, Eigen::MatrixXd(w.asDiagonal()));
  if (es.info() != Eigen::Success) throw SolverError("NotConverged", "dense 1-D eigensolver failed");
  SLResult out;
  out.lambda1 = es.eigenvalues()[0];
  out.lambda2 = es.eigenvalues()[1];
  Eigen::VectorXd v = es.eigenvectors().col(0);
  if (v.sum() < 0.0) v = -v;
  v /= std::sqrt(2.0 * M_PI * h * v.dot(w.cwiseProduct(v)));
  out.eigenprofile.assign(v.data(), v.data() + n);
  return out;
}

HalfTorusReport half_torus_normalization_check(const std::vector<double>& eigenprofile,
                                               const TorusParams& params, double tol) {
  const int n = static_cast<int>(eigenprofile.size());
  if (n % 2) throw ValidationError("eigenprofile needs an even number of points");
  const double h = 2.0 * M_PI / n;
  auto half = [&](int from, int to) {
    double s = 0.0;
    for (int i = from; i <= to; ++i) {
      const double wt = (i == from || i == to) ? 0.5 : 1.0;
      const int k = i % n;
      s += wt * eigenprofile[k] * eigenprofile[k] * params.r * (params.R + params.r * std::cos(h * k));
    }
    return 2.0 * M_PI * h * s;
  };
  HalfTorusReport rep;
  rep.lower_half = half(0, n / 2);
  rep.upper_half = half(n / 2, n);
  rep.integral = 2.0 * rep.lower_half;
  rep.ok = std::abs(rep.integral - 1.0) < tol && std::abs(rep.lower_half - rep.upper_half) < tol;
  return rep;
}

double fitted_order(const std::vector<double>& x, const std::vector<double>& y) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int m = 0;
  for (size_t k = 0; k < x.size() && k < y.size(); ++k) {
    if (!(x[k] > 0.0 && y[k] > 0.0)) continue;
    const double lx = std::log(x[k]), ly = std::log(y[k]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
    ++m;
  }
  if (m < 2) return NAN;
  return (m * sxy - sx * sy) / (m * sxx - sx * sx);
}

ConvergenceTable convergence_study(const std::vector<double>& eps_list, const SteadyState& base,
                                   double lambda0, const PeriodicGrid& grid,
                                   const Nonlinearity& nl, int steps, const NewtonOptions& nopt,
                                   const SpectralOptions& sopt) {
  ConvergenceTable tab;
  tab.states.reserve(eps_list.size());
  const SteadyState* prev = &base;
  double lam_prev = lambda0;
  for (double eps : eps_list) {
    ConvergenceRow row;
    row.epsilon = eps;
    SteadyState st;
    if (eps == base.params.epsilon) {
      st = base;
    } else {
      const bool chain = std::abs(eps) > std::abs(prev->params.epsilon) &&
                         eps * prev->params.epsilon >= 0.0;
      st = continuation(chain ? *prev : base, eps, steps, grid, nl, nopt).final_state();
    }
    const DiscreteOperator op = assemble_laplacian(st.params, grid);
    const SpectralResult sr = principal_eigpair(st, op, nl, sopt, lam_prev);
    row.lambda1 = sr.lambda1;
    row.eigen_residual = sr.residual;
    row.gap = std::abs(sr.lambda1 - lambda0);
    row.sup_diff = (st.field.values - base.field.values).cwiseAbs().maxCoeff();
    row.newton_iters = st.newton_iters;
    row.residual_norm = st.residual_norm;
    lam_prev = sr.lambda1;
    tab.rows.push_back(row);
    tab.states.push_back(std::move(st));
    prev = &tab.states.back();
  }
  std::vector<double> e, g, d;
  for (const auto& row : tab.rows) {
    e.push_back(std::abs(row.epsilon));
    g.push_back(row.gap);
    d.push_back(row.sup_diff);
  }
  tab.lambda_order = fitted_order(e, g);
  tab.sup_diff_order = fitted_order(e, d);
  for (size_t k = 0; k + 1 < tab.rows.size(); ++k) {
    const bool up = std::abs(tab.rows[k + 1].epsilon) > std::abs(tab.rows[k].epsilon);
    const double big = up ? tab.rows[k + 1].gap : tab.rows[k].gap;
    const double small = up ? tab.rows[k].gap : tab.rows[k + 1].gap;
    tab.gap_ratios.push_back(small > 0.0 ? big / small : INFINITY);
    if (up != (tab.rows[k + 1].gap > tab.rows[k].gap)) tab.monotone = false;
  }
  return tab;
}

}  // namespace toruslab
