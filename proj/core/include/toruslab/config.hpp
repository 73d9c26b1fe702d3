#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "toruslab/geometry.hpp"
#include "toruslab/grid.hpp"
#include "toruslab/linear_solver.hpp"
#include "toruslab/pattern.hpp"

namespace toruslab {

// Every numeric threshold consumed by the pipeline, by name.
struct Tolerances {
  double newton_tol = 1e-10;
  double newton_max_iter = 25;
  double linear_tol = 1e-13;
  double eig_tol = 1e-10;
  double eig_max_iter = 200;
  double eig_shift_offset = 1e-3;
  double ode_singular_rcond = 1e-10;
  double profile_residual = 1e-9;
  double f_integral = 1e-8;
  double operator_order_min = 1.8;
  double operator_order_max = 2.2;
  double eig_residual = 1e-8;
  double normalization = 1e-10;
  double sl_agreement = 1e-6;
  double half_torus = 1e-8;
  double order_tolerance = 0.2;
  double symmetry_factor = 10;
  double gap_ratio_min = 1.5;
  double e_ratio_min = 1.5;
  double e_ratio_max = 2.5;
  double cos_content_factor = 10;
  double c1_abs = 1e-8;
  double c2_neumann = 1e-8;
  double c2_nonzero_rel = 1e-3;
  double zero_integral = 1e-8;
  double census_threshold_rel = 1e-6;
  double census_zero_rel = 1e-9;
  double census_degenerate_rel = 1e-8;
  double census_match_cells = 2;
  double census_exclusion_cells = 3;
  double probe_growth_factor = 3;
  double energy_increase = 1e-10;
  double dt_factor = 0.5;

  struct Entry {
    const char* name;
    double Tolerances::*member;
  };
  static const std::vector<Entry>& registry();
  double get(const std::string& name) const;
  void set(const std::string& name, double value);
};

struct ProbeConfig {
  int seeds = 5;
  double delta_rel = 1e-2;
  double T = 50.0;
  double dt = 0.0;  // 0 selects dt_factor / max|f'|
};

struct RunConfig {
  TorusParams params{5.0, 1.0, 0.0, 0};  // n_waves = 0 selects max(threshold N, 4)
  ProfileConfig profile;
  PeriodicGrid grid;
  Tolerances tolerances;
  std::vector<double> epsilon_list{2.5e-5, 5e-5, 1e-4, 2e-4};
  double census_epsilon = 0.02;
  std::vector<double> epsilon_sweep{0.04, 0.08, 0.16};
  int continuation_steps = 4;
  std::uint64_t seed = 1;
  ProbeConfig probe;
  LinearSolverKind linear_solver = LinearSolverKind::Direct;
  std::string output_dir = "out";

  // Structural checks that do not need the forged nonlinearity.
  void validate() const;
};

RunConfig default_config();

// Unknown keys and non-positive tolerances throw ValidationError.
RunConfig parse_config(const std::string& json_text);
RunConfig load_config(const std::string& path);
std::string config_to_json(const RunConfig& cfg);

// Parses "NPHIxNTHETA".
PeriodicGrid parse_grid(const std::string& spec);

}  // namespace toruslab
