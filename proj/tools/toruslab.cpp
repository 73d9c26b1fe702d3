#include <CLI11.hpp>
#include <iostream>
#include <json.hpp>
#include <optional>
#include <string>

#include "toruslab/errors.hpp"
#include "toruslab/pipeline.hpp"

using json = nlohmann::ordered_json;
using namespace toruslab;

namespace {

int fail(int code, const json& err) {
  std::cerr << err.dump() << std::endl;
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"toruslab: stable patterns on perturbed tori"};
  app.require_subcommand(1, 1);
  app.fallthrough();

  std::string config_path, out_dir, grid_spec;
  std::optional<double> epsilon;
  std::optional<int> n_waves;
  std::optional<std::uint64_t> seed;
  bool quiet = false;
  app.add_option("--config", config_path, "JSON config file");
  app.add_option("--out", out_dir, "output directory");
  app.add_option("--epsilon", epsilon, "perturbation amplitude");
  app.add_option("--n", n_waves, "number of waves n");
  app.add_option("--grid", grid_spec, "grid size NPHIxNTHETA");
  app.add_option("--seed", seed, "random seed");
  app.add_flag("--quiet", quiet, "suppress progress output");

  for (const char* name : {"construct", "steady", "spectrum", "evolve", "perturb", "census", "verify"})
    app.add_subcommand(name);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return fail(1, {{"error", "ValidationError"}, {"message", e.what()}});
  }
  const std::string cmd = app.get_subcommands().front()->get_name();

  try {
    RunConfig cfg = config_path.empty() ? default_config() : load_config(config_path);
    if (!out_dir.empty()) cfg.output_dir = out_dir;
    if (n_waves) {
      if (*n_waves < 1) throw ValidationError("--n must be >= 1");
      cfg.params.n_waves = *n_waves;
    }
    if (!grid_spec.empty()) cfg.grid = parse_grid(grid_spec);
    if (seed) cfg.seed = *seed;
    if (epsilon) cfg.census_epsilon = *epsilon;
    cfg.validate();

    Pipeline pipe(cfg, quiet);
    const double eps = cfg.census_epsilon;
    if (cmd == "construct") {
      pipe.run_construct();
    } else if (cmd == "steady") {
      pipe.run_steady(eps);
    } else if (cmd == "spectrum") {
      pipe.run_spectrum();
    } else if (cmd == "evolve") {
      pipe.run_evolve(eps);
    } else if (cmd == "perturb") {
      pipe.run_perturb();
    } else if (cmd == "census") {
      pipe.run_census(eps);
    } else {
      const json report = json::parse(pipe.verify());
      json failed = json::array();
      for (const auto& [name, row] : report.at("claims").items())
        if (!row.at("verdict").get<bool>()) failed.push_back(name);
      if (!quiet)
        for (const auto& [name, row] : report.at("claims").items())
          std::cout << (row.at("verdict").get<bool>() ? "PASS " : "FAIL ") << name << "\n";
      if (!failed.empty())
        return fail(3, {{"error", "VerificationFailure"}, {"failed_claims", failed}});
    }
  } catch (const ValidationError& e) {
    return fail(1, {{"error", "ValidationError"}, {"message", e.what()}});
  } catch (const SolverError& e) {
    return fail(2, {{"error", "SolverError"}, {"code", e.code()}, {"message", e.what()}});
  } catch (const nlohmann::json::exception& e) {
    return fail(1, {{"error", "ValidationError"}, {"message", e.what()}});
  }
  return 0;
}
