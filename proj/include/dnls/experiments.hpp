#pragma once

#include <filesystem>
#include <json.hpp>

#include "dnls/config.hpp"
#include "dnls/norms.hpp"

namespace dnls {

// Q[z0] plus the seeded perturbation of the requested shape, scaled to H^1 norm `amplitude`.
Field initial_data(const RunConfig& rc, BoundStateSolver& solver);

struct StabilityResult {
  bool completed = false;  // tracked through the whole horizon
  std::string failure;
  Trajectory traj;
  ModulationTrajectory mt;
  XNorm x;
  YNorm y;
  ZWNorms zw;
  ZAsymptotic za;
  ScatteringState scat;
  double delta = 0;
  double u0_h1 = 0;
  double z0_abs = 0;       // |z(0)| of the extracted decomposition
  double sup_v_h1 = 0;
  double max_ode_residual = 0, max_rhs = 0;
  double max_phi0_ratio = 0;  // max_t |<phi0, v>| / (||v|| |z|)
  double seconds = 0;
};

// evolve -> track -> norms -> z_asymptotic -> scattering, streaming (no snapshots kept).
StabilityResult run_stability(const RunConfig& rc);
nlohmann::json stability_json(const StabilityResult& r);

// Subcommands; each writes into `out` and returns a process exit code.
int cmd_bound_state(const nlohmann::json& cfg, const std::filesystem::path& out);
int cmd_evolve(const nlohmann::json& cfg, const std::filesystem::path& out);
int cmd_stability_experiment(const nlohmann::json& cfg, const std::filesystem::path& out);
int cmd_linear_checks(const nlohmann::json& cfg, const std::filesystem::path& out);
int cmd_sweep(const nlohmann::json& cfg, const std::filesystem::path& out);

}  // namespace dnls
