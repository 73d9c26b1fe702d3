#pragma once

#include <cstdint>
#include <vector>

#include "toruslab/linear_solver.hpp"
#include "toruslab/pattern.hpp"

namespace toruslab {

struct EvolutionTrace {
  std::vector<double> times;
  std::vector<double> sup_distance;
  std::vector<double> energy;
};

// (I - dt L) u_new = u + dt f(u), solved in the symmetric form
// (M - dt S) u_new = M (u + dt f(u)) with M = diag(weights).
class ImexStepper {
 public:
  ImexStepper(const DiscreteOperator& op, const Nonlinearity& nl, double dt,
              LinearSolverKind kind = LinearSolverKind::Direct);
  ScalarField step(const ScalarField& u) const;
  ScalarField evolve(ScalarField u, int steps) const;
  double dt() const { return dt_; }

 private:
  const DiscreteOperator* op_;
  const Nonlinearity* nl_;
  double dt_;
  SymmetricSolver solver_;
};

ScalarField step_imex(const ScalarField& u, double dt, const DiscreteOperator& op,
                      const Nonlinearity& nl);

// int (|grad u|^2 / 2 - F(u)) dsigma with the edge-centred gradient.
double energy(const ScalarField& u, const DiscreteOperator& op, const Nonlinearity& nl);

// Band-limited field (Fourier modes |p|, |q| <= max_mode) with unit max-norm.
ScalarField random_smooth_field(const PeriodicGrid& grid, std::uint64_t seed, int max_mode = 8);

EvolutionTrace stability_probe(const ScalarField& steady, const DiscreteOperator& op,
                               const Nonlinearity& nl, double delta, double T, double dt,
                               std::uint64_t seed);

std::string trace_to_csv(const EvolutionTrace& tr);

}  // namespace toruslab
