#pragma once

#include <string>
#include <utility>
#include <vector>

#include "toruslab/grid.hpp"

namespace toruslab {

struct CriticalPoint {
  double phi = 0.0;
  double theta = 0.0;
  std::string kind;  // "max", "min", "saddle" or "degenerate"
  double grad_norm = 0.0;
  // Location in grid-index units and coordinate Hessian entries.
  double fi = 0.0, fj = 0.0;
  double h_pp = 0.0, h_pt = 0.0, h_tt = 0.0;
};

struct CriticalPointReport {
  std::vector<CriticalPoint> points;
  std::vector<std::pair<double, double>> expected;
  int count = 0;
  double max_match_distance = 0.0;  // angle
  double grad_scale = 0.0;          // max |grad U| on the grid
};

struct CensusOptions {
  double threshold_rel = 1e-6;   // grad_norm < threshold_rel * max |grad U|
  double zero_rel = 1e-9;        // |partial| below zero_rel * max |partial| counts as zero
  double degenerate_rel = 1e-8;  // |det H| <= degenerate_rel * |H|_F^2
  double dedupe_cells = 0.5;
};

// {0, pi} x {theta_k}, theta_k = (2k + 1) pi / (2n), k = 0..2n-1.
std::vector<std::pair<double, double>> expected_set(int n_waves);

CriticalPointReport locate_critical_points(const ScalarField& u, const TorusParams& params,
                                           const CensusOptions& opt = {});

struct CensusVerdict {
  bool ok = false;
  std::vector<std::string> reasons;
  int expected_count = 0;
  int count = 0;
  int degenerate = 0;
  double max_match_cells = 0.0;
  double margin = 0.0;       // min |grad U| over nodes > exclusion cells from C
  double margin_rows = 0.0;  // same, restricted to the phi in {0, pi} rows
};

CensusVerdict verify_count(const CriticalPointReport& report, const ScalarField& u,
                           const TorusParams& params, double match_cells = 2.0,
                           int exclusion_cells = 3);

std::string census_to_json(const CriticalPointReport& report, const CensusVerdict& verdict);
std::string census_to_csv(const CriticalPointReport& report);

}  // namespace toruslab
