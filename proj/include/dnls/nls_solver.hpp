#pragma once

#include <functional>
#include <string>
#include <vector>

#include "dnls/hamiltonian.hpp"

namespace dnls {

enum class Scheme { Strang, Picard, CrankNicolson };
Scheme parse_scheme(const std::string& s);
std::string scheme_name(Scheme s);

struct EvolutionConfig {
  TimeGrid time;
  Scheme scheme = Scheme::Strang;
  // Complex absorbing ramp on the outer `absorber_width` fraction of each half-line; 0 disables it.
  double absorber_width = 0.0;
  double absorber_strength = 0.0;
  double mass_drift_tol = 1e-8;    // relative, per unit time
  double energy_drift_tol = 1e-6;  // relative to max(|E0|, M0), per unit time
  double blowup_threshold = 1e3;
  bool keep_snapshots = true;
  void validate() const;
};

struct Trajectory {
  std::string scheme;
  double dt = 0;
  int stride = 1;
  RVec times;
  std::vector<Field> snapshots;
  RVec mass, energy, origin_modulus;
  RVec absorbed;  // cumulative mass removed by the absorber
  double mass_drift_rate = 0, energy_drift_rate = 0;
};

// Called at every output time with the current field.
using Observer = std::function<void(double t, const Field& u)>;

// One Strang step: half nonlinear phase, exact linear flow, half nonlinear phase.
Field step_strang(const DeltaHamiltonian& H, const Field& u, double dt, const ModelParams& prm);

Trajectory evolve(const DeltaHamiltonian& H, const Field& u0, const EvolutionConfig& cfg, const ModelParams& prm,
                  const Observer& obs = {});

struct PicardResult {
  Field u;
  RVec times;  // quadrature nodes over [0, T]
  CVec a;      // bound-state channel <phi0, u(t)> at the nodes
  int iterations = 0;
  int halvings = 0;
  double residual = 0;
};

// Duhamel fixed point for (P_c u, <phi0,u>) with product integration of piecewise-linear F.
PicardResult picard_lwp(const DeltaHamiltonian& H, const Field& u0, double T, const ModelParams& prm,
                        double tol = 1e-12, double node_dt = 1e-3);

// Second-order finite differences with the jump encoded in the origin row; implicit midpoint in time.
Trajectory crank_nicolson_oracle(const GridPtr& g, double q, const Field& u0, const EvolutionConfig& cfg,
                                 const ModelParams& prm, const Observer& obs = {});

}  // namespace dnls
