#include "toruslab/config.hpp"

#include <fstream>
#include <json.hpp>
#include <regex>
#include <set>
#include <sstream>

#include "toruslab/errors.hpp"

namespace toruslab {

using nlohmann::json;

const std::vector<Tolerances::Entry>& Tolerances::registry() {
#define TORUSLAB_TOL(x) Entry{#x, &Tolerances::x}
  static const std::vector<Entry> entries{
      TORUSLAB_TOL(newton_tol),          TORUSLAB_TOL(newton_max_iter),
      TORUSLAB_TOL(linear_tol),          TORUSLAB_TOL(eig_tol),
      TORUSLAB_TOL(eig_max_iter),        TORUSLAB_TOL(eig_shift_offset),
      TORUSLAB_TOL(ode_singular_rcond),  TORUSLAB_TOL(profile_residual),
      TORUSLAB_TOL(f_integral),          TORUSLAB_TOL(operator_order_min),
      TORUSLAB_TOL(operator_order_max),  TORUSLAB_TOL(eig_residual),
      TORUSLAB_TOL(normalization),       TORUSLAB_TOL(sl_agreement),
      TORUSLAB_TOL(half_torus),          TORUSLAB_TOL(order_tolerance),
      TORUSLAB_TOL(symmetry_factor),     TORUSLAB_TOL(gap_ratio_min),
      TORUSLAB_TOL(e_ratio_min),         TORUSLAB_TOL(e_ratio_max),
      TORUSLAB_TOL(cos_content_factor),  TORUSLAB_TOL(c1_abs),
      TORUSLAB_TOL(c2_neumann),          TORUSLAB_TOL(c2_nonzero_rel),
      TORUSLAB_TOL(zero_integral),       TORUSLAB_TOL(census_threshold_rel),
      TORUSLAB_TOL(census_zero_rel),     TORUSLAB_TOL(census_degenerate_rel),
      TORUSLAB_TOL(census_match_cells),  TORUSLAB_TOL(census_exclusion_cells),
      TORUSLAB_TOL(probe_growth_factor), TORUSLAB_TOL(energy_increase),
      TORUSLAB_TOL(dt_factor),
  };
#undef TORUSLAB_TOL
  return entries;
}

double Tolerances::get(const std::string& name) const {
  for (const Entry& e : registry())
    if (name == e.name) return this->*(e.member);
  throw ValidationError("unknown tolerance '" + name + "'");
}

void Tolerances::set(const std::string& name, double value) {
  for (const Entry& e : registry())
    if (name == e.name) {
      if (!(value > 0.0) || !std::isfinite(value))
        throw ValidationError("tolerance '" + name + "' must be positive");
      this->*(e.member) = value;
      return;
    }
  throw ValidationError("unknown tolerance '" + name + "'");
}

void RunConfig::validate() const {
  if (!(params.r > 0.0) || !(params.R > params.r))
    throw ValidationError("torus needs R > r > 0");
  if (params.n_waves < 0) throw ValidationError("n_waves must be >= 0 (0 = automatic)");
  grid.validate();
  if (epsilon_list.empty()) throw ValidationError("epsilon_list must not be empty");
  auto check_eps = [&](double e) {
    TorusParams p = params;
    p.n_waves = std::max(1, p.n_waves);
    p.with_epsilon(e).validate();
  };
  for (double e : epsilon_list) check_eps(e);
  check_eps(census_epsilon);
  if (continuation_steps < 1) throw ValidationError("continuation_steps must be >= 1");
  if (probe.seeds < 1) throw ValidationError("probe.seeds must be >= 1");
  if (!(probe.delta_rel >= 0.0)) throw ValidationError("probe.delta_rel must be >= 0");
  if (!(probe.T > 0.0)) throw ValidationError("probe.T must be positive");
  if (!(probe.dt >= 0.0)) throw ValidationError("probe.dt must be >= 0");
  for (const auto& e : Tolerances::registry())
    if (!(tolerances.*(e.member) > 0.0))
      throw ValidationError(std::string("tolerance '") + e.name + "' must be positive");
}

RunConfig default_config() { return RunConfig{}; }

namespace {

void check_keys(const json& obj, const std::set<std::string>& allowed, const std::string& where) {
  if (!obj.is_object()) throw ValidationError(where + " must be an object");
  for (auto it = obj.begin(); it != obj.end(); ++it)
    if (!allowed.count(it.key())) throw ValidationError("unknown key '" + it.key() + "' in " + where);
}

template <class T>
void read(const json& obj, const char* key, T& out) {
  if (obj.contains(key)) {
    try {
      out = obj.at(key).get<T>();
    } catch (const json::exception& e) {
      throw ValidationError(std::string("bad value for '") + key + "': " + e.what());
    }
  }
}

}  // namespace

RunConfig parse_config(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    throw ValidationError(std::string("config is not valid JSON: ") + e.what());
  }
  check_keys(j, {"schema_version", "torus", "profile", "grid", "tolerances", "epsilon_list",
                 "census_epsilon", "epsilon_sweep", "continuation_steps", "seed", "probe",
                 "linear_solver", "output_dir"},
             "config");
  RunConfig c;
  int version = 1;
  read(j, "schema_version", version);
  if (version != 1) throw ValidationError("unsupported schema_version " + std::to_string(version));
  if (j.contains("torus")) {
    const json& t = j["torus"];
    check_keys(t, {"R", "r", "n_waves"}, "torus");
    read(t, "R", c.params.R);
    read(t, "r", c.params.r);
    c.params.n_waves = 0;
    read(t, "n_waves", c.params.n_waves);
  } else {
    c.params.n_waves = 0;
  }
  if (j.contains("profile")) {
    const json& p = j["profile"];
    check_keys(p, {"phi0", "steepness", "skew", "height", "samples"}, "profile");
    read(p, "phi0", c.profile.phi0);
    read(p, "steepness", c.profile.steepness);
    read(p, "skew", c.profile.skew);
    read(p, "height", c.profile.height);
    read(p, "samples", c.profile.samples);
  }
  if (j.contains("grid")) {
    const json& g = j["grid"];
    check_keys(g, {"n_phi", "n_theta"}, "grid");
    read(g, "n_phi", c.grid.n_phi);
    read(g, "n_theta", c.grid.n_theta);
  }
  if (j.contains("tolerances")) {
    const json& t = j["tolerances"];
    if (!t.is_object()) throw ValidationError("tolerances must be an object");
    for (auto it = t.begin(); it != t.end(); ++it) {
      if (!it.value().is_number()) throw ValidationError("tolerance '" + it.key() + "' must be a number");
      c.tolerances.set(it.key(), it.value().get<double>());
    }
  }
  read(j, "epsilon_list", c.epsilon_list);
  read(j, "census_epsilon", c.census_epsilon);
  read(j, "epsilon_sweep", c.epsilon_sweep);
  read(j, "continuation_steps", c.continuation_steps);
  read(j, "seed", c.seed);
  if (j.contains("probe")) {
    const json& p = j["probe"];
    check_keys(p, {"seeds", "delta_rel", "T", "dt"}, "probe");
    read(p, "seeds", c.probe.seeds);
    read(p, "delta_rel", c.probe.delta_rel);
    read(p, "T", c.probe.T);
    read(p, "dt", c.probe.dt);
  }
  if (j.contains("linear_solver")) {
    const std::string s = j["linear_solver"].get<std::string>();
    if (s == "direct")
      c.linear_solver = LinearSolverKind::Direct;
    else if (s == "iterative")
      c.linear_solver = LinearSolverKind::Iterative;
    else
      throw ValidationError("linear_solver must be 'direct' or 'iterative'");
  }
  read(j, "output_dir", c.output_dir);
  c.validate();
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open config '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string config_to_json(const RunConfig& c) {
  nlohmann::ordered_json j;
  j["schema_version"] = 1;
  j["torus"] = {{"R", c.params.R}, {"r", c.params.r}, {"n_waves", c.params.n_waves}};
  j["profile"] = {{"phi0", c.profile.phi0},
                  {"steepness", c.profile.steepness},
                  {"skew", c.profile.skew},
                  {"height", c.profile.height},
                  {"samples", c.profile.samples}};
  j["grid"] = {{"n_phi", c.grid.n_phi}, {"n_theta", c.grid.n_theta}};
  j["epsilon_list"] = c.epsilon_list;
  j["census_epsilon"] = c.census_epsilon;
  j["epsilon_sweep"] = c.epsilon_sweep;
  j["continuation_steps"] = c.continuation_steps;
  j["seed"] = c.seed;
  j["probe"] = {{"seeds", c.probe.seeds}, {"delta_rel", c.probe.delta_rel}, {"T", c.probe.T}, {"dt", c.probe.dt}};
  j["linear_solver"] = c.linear_solver == LinearSolverKind::Direct ? "direct" : "iterative";
  j["output_dir"] = c.output_dir;
  nlohmann::ordered_json t;
  for (const auto& e : Tolerances::registry()) t[e.name] = c.tolerances.*(e.member);
  j["tolerances"] = t;
  return j.dump(2);
}

PeriodicGrid parse_grid(const std::string& spec) {
  static const std::regex re(R"(^\s*(\d+)\s*[xX]\s*(\d+)\s*$)");
  std::smatch m;
  if (!std::regex_match(spec, m, re)) throw ValidationError("grid must look like NPHIxNTHETA");
  PeriodicGrid g{std::stoi(m[1]), std::stoi(m[2])};
  g.validate();
  return g;
}

}  // namespace toruslab
