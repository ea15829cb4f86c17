#pragma once

#include <Eigen/Dense>
#include <functional>
#include <optional>
#include <string>

#include "dnls/bound_states.hpp"
#include "dnls/nls_solver.hpp"

namespace dnls {

struct Decomposition {
  cplx z = 0;
  BoundState state;
  Field v;                                  // u - Q[z]
  Eigen::Vector2d orthogonality{0, 0};      // Im<v, D_j Q>, re-evaluated after v is formed
  std::array<std::array<Field, 2>, 2> D2Q;  // D_j D_k Q at z
  int newton_iterations = 0;
  RVec residual_history;
  double u_h1 = 0, v_h1 = 0;
  double size_ratio = 0;  // (||v||_H1 + |z|) / ||u||_H1
};

struct ModulationODE {
  Eigen::Matrix2d A;         // A_jk = Im<v, D_j D_k Q> + Im<D_j Q, D_k Q>
  Eigen::Matrix2d jacobian;  // D_j f_k = d f_k / d z_j of f_j = Im<u - Q[z], D_j Q[z]>
  Eigen::Vector2d b;         // b_j = -Re<G(v,Q), D_j Q>
  Eigen::Vector2d rhs;       // A^{-1} b, the predicted zdot + iEz
  double E = 0;
  double cond = 0;
  bool ill_conditioned = false;
};

struct ExtractOptions {
  double tol = 1e-10;
  double delta_max = 0.2;
  int max_newton = 25;
};

// Newton solve of Im<u - Q[z], D_j Q[z]> = 0 seeded at z_guess (default <phi0, u>).
Decomposition extract_z(BoundStateSolver& solver, const Field& u, std::optional<cplx> z_guess = std::nullopt,
                        const ExtractOptions& opt = {});

ModulationODE ode_coefficients(const Decomposition& dec, const ModelParams& prm);

// F(Q+v) - F(Q) minus its part linear in v, by Gauss-Legendre quadrature in theta.
Field remainder_G(const Field& v, const Field& Q, const ModelParams& prm);

// Bound-state accumulators for the Z and W norms, resolved in x and maximized in t.
struct ZWAccumulator {
  RVec q_weighted_sup_x;  // sup_t <x>^{5/2} |Q|
  RVec dq_weighted_sup_x; // sup_t <x> |DQ|
  double q_weighted_sup = 0, qx_sup = 0, qx_l2_sup = 0;
  double dq_weighted_l2_sup = 0, dqx_l2_sup = 0;
  double z_sup = 0;
  void add(const BoundState& st);
};

struct ModulationTrajectory {
  RVec t;
  CVec z, zeta;
  RVec E;
  CVec rhs;            // A^{-1} b as a complex number
  RVec ode_residual;   // |dz/dt + iEz - A^{-1} b| via centered differences of zeta
  RVec fd_rate;        // |dz/dt + iEz| from the tracked z
  RVec cond;
  RVec orthogonality;  // max_j |Im<v, D_j Q>|
  RVec v_h1, phi0_coupling;
  ZWAccumulator zw;
  bool truncated = false;
  std::string message;
};

struct TrackOptions {
  ExtractOptions extract;
  bool ode = true;
};

// Sequential tracker with continuation; feed snapshots in time order.
class Tracker {
 public:
  using Hook = std::function<void(double t, const Decomposition&)>;
  Tracker(BoundStateSolver& solver, TrackOptions opt = {}, Hook hook = {});
  // Returns false once tracking has been truncated.
  bool push(double t, const Field& u);
  ModulationTrajectory finish();
  bool truncated() const { return mt_.truncated; }

 private:
  BoundStateSolver& solver_;
  TrackOptions opt_;
  Hook hook_;
  ModulationTrajectory mt_;
  std::optional<cplx> prev_;
  double phase_ = 0;
};

ModulationTrajectory track(BoundStateSolver& solver, const Trajectory& traj, const TrackOptions& opt = {});

struct ZAsymptotic {
  cplx z_plus = 0;
  double tail = 0;
  bool converged = true;
};
ZAsymptotic z_asymptotic(const ModulationTrajectory& mt);

}  // namespace dnls
