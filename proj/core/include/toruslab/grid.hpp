#pragma once

#include <Eigen/Core>
#include <Eigen/SparseCore>
#include <cmath>
#include <string>

#include "toruslab/geometry.hpp"

namespace toruslab {

struct PeriodicGrid {
  int n_phi = 128;
  int n_theta = 800;

  double h_phi() const { return 2.0 * M_PI / n_phi; }
  double h_theta() const { return 2.0 * M_PI / n_theta; }
  double phi(int i) const { return h_phi() * i; }
  double theta(int j) const { return h_theta() * j; }
  int size() const { return n_phi * n_theta; }
  int index(int i, int j) const { return wrap_phi(i) * n_theta + wrap_theta(j); }
  int wrap_phi(int i) const { return ((i % n_phi) + n_phi) % n_phi; }
  int wrap_theta(int j) const { return ((j % n_theta) + n_theta) % n_theta; }

  // Even sizes >= 16; with a perturbed torus also 4 n | n_theta.
  void validate() const;
  void validate_for(const TorusParams& p) const;
};

// Values indexed (i, j) -> i * n_theta + j, phi-major.
struct ScalarField {
  int n_phi = 0;
  int n_theta = 0;
  Eigen::VectorXd values;

  ScalarField() = default;
  explicit ScalarField(const PeriodicGrid& g, double fill = 0.0)
      : n_phi(g.n_phi), n_theta(g.n_theta), values(Eigen::VectorXd::Constant(g.size(), fill)) {}
  ScalarField(const PeriodicGrid& g, Eigen::VectorXd v)
      : n_phi(g.n_phi), n_theta(g.n_theta), values(std::move(v)) {}

  double& operator()(int i, int j) { return values[i * n_theta + j]; }
  double operator()(int i, int j) const { return values[i * n_theta + j]; }
  PeriodicGrid grid() const { return {n_phi, n_theta}; }
  bool all_finite() const { return values.allFinite(); }
  double max_abs() const { return values.size() ? values.cwiseAbs().maxCoeff() : 0.0; }
};

template <class F>
ScalarField sample_field(const PeriodicGrid& g, F&& fn) {
  ScalarField u(g);
  for (int i = 0; i < g.n_phi; ++i)
    for (int j = 0; j < g.n_theta; ++j) u(i, j) = fn(g.phi(i), g.theta(j));
  return u;
}

using SparseRow = Eigen::SparseMatrix<double, Eigen::RowMajor>;
using SparseCol = Eigen::SparseMatrix<double>;

// Discrete Laplace-Beltrami operator. For the flux form, L = diag(1/weights) S
// with S symmetric, so L is self-adjoint in the weighted inner product.
struct DiscreteOperator {
  TorusParams params;
  PeriodicGrid grid;
  SparseRow L;
  SparseCol S;
  Eigen::VectorXd weights;
  bool flux_form = true;

  ScalarField apply(const ScalarField& u) const { return ScalarField(grid, L * u.values); }
};

DiscreteOperator assemble_laplacian(const TorusParams& params, const PeriodicGrid& grid);

// Non-conservative assembly from the four Laplace-Beltrami coefficients
// with central differences; used as a consistency reference.
DiscreteOperator assemble_laplacian_direct(const TorusParams& params, const PeriodicGrid& grid);

Eigen::VectorXd area_weights(const TorusParams& params, const PeriodicGrid& grid);

double quadrature(const ScalarField& f, const TorusParams& params, const PeriodicGrid& grid);
double weighted_inner_product(const ScalarField& f, const ScalarField& g,
                              const TorusParams& params, const PeriodicGrid& grid);

// Edge-centred discrete Dirichlet integral of |grad u|^2; equals <-L u, u>.
double dirichlet_integral(const ScalarField& u, const TorusParams& params,
                          const PeriodicGrid& grid);

// Centered nodal gradient norm squared |grad u|^2 on the grid.
ScalarField gradient_norm_sq_field(const ScalarField& u, const TorusParams& params,
                                   const PeriodicGrid& grid);

std::string field_to_csv(const ScalarField& u);
ScalarField field_from_csv(const std::string& text, const PeriodicGrid& grid);
std::string field_to_binary(const ScalarField& u);
ScalarField field_from_binary(const std::string& bytes);

}  // namespace toruslab
