#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "toruslab/census.hpp"
#include "toruslab/config.hpp"
#include "toruslab/dynamics.hpp"
#include "toruslab/newton.hpp"
#include "toruslab/perturbation.hpp"
#include "toruslab/spectral.hpp"

namespace toruslab {

struct Construction {
  TorusParams params;  // epsilon = 0, n_waves resolved
  Profile profile;
  Nonlinearity nl;
  Threshold threshold;
  double residual_max = 0.0;
  double f_integral = 0.0;
  double f_at_0 = 0.0;
  double f_at_pi = 0.0;
};

struct OperatorStudy {
  std::vector<int> sizes;
  std::vector<double> errors;
  std::vector<double> orders;
};

// Max-norm error of the assembled operator on cos(phi) at eps = 0 on square grids.
OperatorStudy operator_consistency_study(const TorusParams& params, const std::vector<int>& sizes);

struct ProbeResult {
  std::uint64_t seed = 0;
  EvolutionTrace trace;
  double max_sup = 0.0;
  double final_sup = 0.0;
  double max_energy_increase = 0.0;
};

struct CensusResult {
  double epsilon = 0.0;
  CriticalPointReport report;
  CensusVerdict verdict;
  SteadyState state;
};

// Stages of the run; each computes on first use and writes its artifacts
// into the output directory when one is set.
class Pipeline {
 public:
  explicit Pipeline(RunConfig cfg, bool quiet = true);

  const RunConfig& config() const { return cfg_; }
  const Construction& construct();
  const SteadyState& base_state();
  SteadyState base_state_on(const PeriodicGrid& grid);
  Branch steady(double eps);
  const SpectralResult& spectrum0();
  const SLResult& spectrum_1d();
  const ConvergenceTable& convergence();
  const PerturbationSolution& perturbation();
  const FirstOrderTable& first_order();
  const CensusResult& census(double eps);
  std::vector<ProbeResult> evolve(double eps);

  // Full pipeline; returns the verification report JSON (runtimes excluded).
  std::string verify();
  bool last_verify_passed() const { return verify_passed_; }
  const std::map<std::string, double>& timings() const { return timings_; }

  // Subcommand entry points writing their artifacts.
  void run_construct();
  void run_steady(double eps);
  void run_spectrum();
  void run_evolve(double eps);
  void run_perturb();
  void run_census(double eps);

  std::string cache_dir() const;

 private:
  void log(const std::string& msg) const;
  void write(const std::string& name, const std::string& content) const;
  NewtonOptions newton_options() const;
  SpectralOptions spectral_options() const;
  std::vector<SteadyState> list_states();

  RunConfig cfg_;
  bool quiet_;
  bool verify_passed_ = false;
  std::optional<Construction> construction_;
  std::optional<SteadyState> base_;
  std::optional<SpectralResult> spectrum0_;
  std::optional<SLResult> sl_;
  std::optional<ConvergenceTable> convergence_;
  std::optional<PerturbationSolution> perturbation_;
  std::optional<FirstOrderTable> first_order_;
  std::map<double, CensusResult> census_;
  std::map<std::string, double> timings_;
};

// Tag used in artifact names, e.g. 0.02 -> "0.02".
std::string epsilon_tag(double eps);

}  // namespace toruslab
