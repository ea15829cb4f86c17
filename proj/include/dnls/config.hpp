#pragma once

#include <filesystem>
#include <json.hpp>
#include <optional>
#include <string>
#include <vector>

#include "dnls/bound_states.hpp"
#include "dnls/modulation.hpp"
#include "dnls/nls_solver.hpp"

namespace dnls {

// Environment variable naming the default output root.
inline constexpr const char* kOutputRootEnv = "DNLS_OUTPUT_ROOT";

nlohmann::json default_config();
// Defaults, merged with the file (if any), then with dot-path overrides "a.b=value".
nlohmann::json resolve_config(const std::optional<std::filesystem::path>& file, const std::vector<std::string>& overrides);
void apply_override(nlohmann::json& cfg, const std::string& assignment);
std::filesystem::path output_dir(const std::optional<std::string>& cli_out, const std::string& subdir);

struct InitialData {
  cplx z0 = 0;
  std::string shape = "even_gaussian";  // even_gaussian | odd_gaussian | none
  double amplitude = 0;                 // H^1 norm of the perturbation
  double width = 0;                     // 0: drawn from the seed
  std::string file;                     // raw snapshot file (last row) instead of a soliton
};

struct RunConfig {
  ModelParams params;
  double L = 40;
  int N = 2048;
  EvolutionConfig evolution;
  InitialData initial;
  std::uint64_t seed = 1;
  ExtractOptions extract;
  BoundStateOptions bound;
  int checkpoints = 40;
  bool write_snapshots = false;
  nlohmann::json raw;
};

// Typed view with validation; throws ConfigError.
RunConfig parse_run_config(const nlohmann::json& cfg);

}  // namespace dnls
