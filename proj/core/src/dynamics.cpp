#include "toruslab/dynamics.hpp"

#include <cmath>
#include <iomanip>
#include <random>
#include <sstream>

#include "toruslab/errors.hpp"

namespace toruslab {

ImexStepper::ImexStepper(const DiscreteOperator& op, const Nonlinearity& nl, double dt,
                         LinearSolverKind kind)
    : op_(&op), nl_(&nl), dt_(dt), solver_(kind) {
  if (!(dt > 0.0)) throw ValidationError("time step must be positive");
  if (!op.flux_form) throw ValidationError("operator must be assembled in flux form");
  SparseCol A = -dt * op.S;
  for (int c = 0; c < A.outerSize(); ++c)
    for (SparseCol::InnerIterator it(A, c); it; ++it)
      if (it.row() == it.col()) it.valueRef() += op.weights[c];
  solver_.factor(A);
}

ScalarField ImexStepper::step(const ScalarField& u) const {
  Eigen::VectorXd rhs(u.values.size());
  for (Eigen::Index k = 0; k < rhs.size(); ++k)
    rhs[k] = op_->weights[k] * (u.values[k] + dt_ * (*nl_)(u.values[k]));
  return ScalarField(op_->grid, solver_.solve(rhs));
}

ScalarField ImexStepper::evolve(ScalarField u, int steps) const {
  for (int k = 0; k < steps; ++k) u = step(u);
  return u;
}

ScalarField step_imex(const ScalarField& u, double dt, const DiscreteOperator& op,
                      const Nonlinearity& nl) {
  return ImexStepper(op, nl, dt).step(u);
}

double energy(const ScalarField& u, const DiscreteOperator& op, const Nonlinearity& nl) {
  double pot = 0.0;
  for (Eigen::Index k = 0; k < u.values.size(); ++k)
    pot += op.weights[k] * nl.antiderivative(u.values[k]);
  const double cell = op.grid.h_phi() * op.grid.h_theta();
  // -u^T S u * cell is the edge-centred Dirichlet integral.
  const double grad = -u.values.dot(op.S * u.values) * cell;
  return 0.5 * grad - pot * cell;
}

ScalarField random_smooth_field(const PeriodicGrid& grid, std::uint64_t seed, int max_mode) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  const int m = max_mode;
  std::vector<double> cp((m + 1) * grid.n_phi), sp((m + 1) * grid.n_phi);
  std::vector<double> cq((2 * m + 1) * grid.n_theta), sq((2 * m + 1) * grid.n_theta);
  for (int p = 0; p <= m; ++p)
    for (int i = 0; i < grid.n_phi; ++i) {
      cp[p * grid.n_phi + i] = std::cos(p * grid.phi(i));
      sp[p * grid.n_phi + i] = std::sin(p * grid.phi(i));
    }
  for (int q = -m; q <= m; ++q)
    for (int j = 0; j < grid.n_theta; ++j) {
      cq[(q + m) * grid.n_theta + j] = std::cos(q * grid.theta(j));
      sq[(q + m) * grid.n_theta + j] = std::sin(q * grid.theta(j));
    }
  ScalarField xi(grid);
  for (int p = 0; p <= m; ++p)
    for (int q = -m; q <= m; ++q) {
      const double a = normal(rng), b = normal(rng);
      for (int i = 0; i < grid.n_phi; ++i) {
        const double c1 = cp[p * grid.n_phi + i], s1 = sp[p * grid.n_phi + i];
        for (int j = 0; j < grid.n_theta; ++j) {
          const double c2 = cq[(q + m) * grid.n_theta + j], s2 = sq[(q + m) * grid.n_theta + j];
          // a cos(p phi + q theta) + b sin(p phi + q theta)
          xi(i, j) += a * (c1 * c2 - s1 * s2) + b * (s1 * c2 + c1 * s2);
        }
      }
    }
  const double mx = xi.max_abs();
  if (mx > 0.0) xi.values /= mx;
  return xi;
}

EvolutionTrace stability_probe(const ScalarField& steady, const DiscreteOperator& op,
                               const Nonlinearity& nl, double delta, double T, double dt,
                               std::uint64_t seed) {
  if (delta < 0.0) throw ValidationError("delta must be non-negative");
  if (!(T > 0.0)) throw ValidationError("T must be positive");
  const int steps = static_cast<int>(std::ceil(T / dt - 1e-12));
  const ImexStepper stepper(op, nl, T / steps);
  ScalarField u = steady;
  if (delta > 0.0) u.values += delta * random_smooth_field(op.grid, seed).values;
  EvolutionTrace tr;
  auto record = [&](double t) {
    tr.times.push_back(t);
    tr.sup_distance.push_back((u.values - steady.values).cwiseAbs().maxCoeff());
    tr.energy.push_back(energy(u, op, nl));
  };
  record(0.0);
  for (int k = 1; k <= steps; ++k) {
    u = stepper.step(u);
    record(T * k / steps);
  }
  return tr;
}

std::string trace_to_csv(const EvolutionTrace& tr) {
  std::ostringstream os;
  os << std::setprecision(17) << "t,sup_distance,energy\n";
  for (size_t k = 0; k < tr.times.size(); ++k)
    os << tr.times[k] << ',' << tr.sup_distance[k] << ',' << tr.energy[k] << '\n';
  return os.str();
}

}  // namespace toruslab
