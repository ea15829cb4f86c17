#include "dnls/config.hpp"

#include <cstdlib>
#include <fstream>

#include "dnls/errors.hpp"

namespace dnls {

using nlohmann::json;

json default_config() {
  return json::parse(R"({
    "params": {"q": -1.0, "p": 4, "mu": -1.0},
    "grid": {"L": 40.0, "N": 2048},
    "evolution": {
      "dt": 0.001, "T": 200.0, "stride": 50, "scheme": "strang",
      "absorber_width": 0.1, "absorber_strength": 5.0,
      "mass_drift_tol": 1e-8, "energy_drift_tol": 1e-6, "blowup_threshold": 1000.0
    },
    "initial": {"z0_re": 0.05, "z0_im": 0.0, "shape": "even_gaussian", "amplitude": 0.05, "width": 0.0, "file": ""},
    "seed": 1,
    "modulation": {"tol": 1e-10, "delta_max": 0.2, "max_newton": 25},
    "bound_state": {
      "tol": 1e-12, "z_max": 0.2, "E": -1.0, "z": null,
      "mass_curve": {"E_min": -5.0, "points": 41}, "E1_min": -50.0
    },
    "diagnostics": {"checkpoints": 40, "snapshots": false, "refine": false, "refine_dt": 0.0004},
    "sweep": {"deltas": [], "runs": [], "command": "stability-experiment", "workers": 0},
    "linear_checks": {
      "samples": 6, "dispersive_samples": 20, "L": 500.0, "N": 16384, "t_min": 1.0, "t_max": 50.0,
      "t_points": 25, "smoothing_T": 20.0, "smoothing_dt": 0.02, "smoothing_L": 250.0, "smoothing_N": 8192,
      "refine": true
    }
  })");
}

void apply_override(json& cfg, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) throw ConfigError("override must be key=value: '" + assignment + "'");
  const std::string key = assignment.substr(0, eq), text = assignment.substr(eq + 1);
  json value;
  try {
    value = json::parse(text);
  } catch (const json::parse_error&) {
    value = text;  // bare strings
  }
  json* node = &cfg;
  size_t start = 0;
  while (true) {
    const auto dot = key.find('.', start);
    const std::string part = key.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (part.empty()) throw ConfigError("empty path component in override '" + key + "'");
    if (!node->is_object()) throw ConfigError("override path '" + key + "' descends into a non-object");
    if (dot == std::string::npos) {
      (*node)[part] = value;
      return;
    }
    node = &(*node)[part];
    if (node->is_null()) *node = json::object();
    start = dot + 1;
  }
}

json resolve_config(const std::optional<std::filesystem::path>& file, const std::vector<std::string>& overrides) {
  json cfg = default_config();
  if (file) {
    std::ifstream in(*file);
    if (!in) throw ConfigError("cannot read config file " + file->string());
    json user;
    try {
      user = json::parse(in);
    } catch (const json::parse_error& e) {
      throw ConfigError(std::string("config parse error: ") + e.what());
    }
    cfg.merge_patch(user);
  }
  for (const auto& o : overrides) apply_override(cfg, o);
  return cfg;
}

std::filesystem::path output_dir(const std::optional<std::string>& cli_out, const std::string& subdir) {
  if (cli_out) return *cli_out;
  const char* env = std::getenv(kOutputRootEnv);
  const std::filesystem::path root = env && *env ? env : "dnls_out";
  return root / subdir;
}

namespace {

template <class T>
T req(const json& j, const char* key) {
  if (!j.contains(key) || j[key].is_null()) throw ConfigError(std::string("missing config key '") + key + "'");
  try {
    return j[key].get<T>();
  } catch (const json::exception&) {
    throw ConfigError(std::string("config key '") + key + "' has the wrong type");
  }
}

}  // namespace

RunConfig parse_run_config(const json& cfg) {
  RunConfig rc;
  rc.raw = cfg;
  const json& p = cfg.at("params");
  rc.params.q = req<double>(p, "q");
  rc.params.p = req<int>(p, "p");
  rc.params.mu = req<double>(p, "mu");
  rc.params.validate();
  rc.L = req<double>(cfg.at("grid"), "L");
  rc.N = req<int>(cfg.at("grid"), "N");
  if (!(rc.L > 0) || rc.N < 28 || rc.N % 2) throw ConfigError("grid needs L > 0 and even N >= 28");
  const json& e = cfg.at("evolution");
  rc.evolution.time = TimeGrid(req<double>(e, "dt"), req<double>(e, "T"), req<int>(e, "stride"));
  rc.evolution.scheme = parse_scheme(req<std::string>(e, "scheme"));
  rc.evolution.absorber_width = req<double>(e, "absorber_width");
  rc.evolution.absorber_strength = req<double>(e, "absorber_strength");
  rc.evolution.mass_drift_tol = req<double>(e, "mass_drift_tol");
  rc.evolution.energy_drift_tol = req<double>(e, "energy_drift_tol");
  rc.evolution.blowup_threshold = req<double>(e, "blowup_threshold");
  rc.evolution.validate();
  const json& i = cfg.at("initial");
  rc.initial.z0 = cplx(req<double>(i, "z0_re"), req<double>(i, "z0_im"));
  rc.initial.shape = req<std::string>(i, "shape");
  if (rc.initial.shape != "even_gaussian" && rc.initial.shape != "odd_gaussian" && rc.initial.shape != "none")
    throw ConfigError("initial.shape must be even_gaussian, odd_gaussian or none");
  rc.initial.amplitude = req<double>(i, "amplitude");
  rc.initial.width = req<double>(i, "width");
  rc.initial.file = req<std::string>(i, "file");
  rc.seed = req<std::uint64_t>(cfg, "seed");
  const json& m = cfg.at("modulation");
  rc.extract.tol = req<double>(m, "tol");
  rc.extract.delta_max = req<double>(m, "delta_max");
  rc.extract.max_newton = req<int>(m, "max_newton");
  if (rc.initial.amplitude < 0 || rc.initial.amplitude >= rc.extract.delta_max)
    throw ConfigError("perturbation amplitude must lie in [0, modulation.delta_max)");
  const json& b = cfg.at("bound_state");
  rc.bound.tol = req<double>(b, "tol");
  rc.bound.z_max = req<double>(b, "z_max");
  if (std::abs(rc.initial.z0) > rc.bound.z_max) throw ConfigError("|z0| exceeds bound_state.z_max");
  rc.checkpoints = req<int>(cfg.at("diagnostics"), "checkpoints");
  rc.write_snapshots = req<bool>(cfg.at("diagnostics"), "snapshots");
  if (rc.checkpoints < 2) throw ConfigError("diagnostics.checkpoints must be >= 2");
  return rc;
}

}  // namespace dnls
