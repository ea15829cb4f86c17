#pragma once

#include <array>
#include <optional>
#include <string>

#include "dnls/hamiltonian.hpp"

namespace dnls {

enum class Branch { Focusing, Defocusing, ZeroEnergy };

// Branch compatible with (E, mu); throws ConfigError otherwise.
Branch classify_branch(double E, const ModelParams& prm);
double closed_form_value(double E, const ModelParams& prm, double x);
Field closed_form_Q(double E, const ModelParams& prm, const GridPtr& g);
// Q'(0+) - Q'(0-) - 2 q Q(0) with fourth-order one-sided differences.
double jump_defect(const Field& Q, double q);
// || H Q + mu |Q|^p Q - E Q ||
double elliptic_residual(const DeltaHamiltonian& H, const Field& Q, double E, const ModelParams& prm);
// mu |u|^p u
Field nonlinearity(const Field& u, const ModelParams& prm);

struct BoundState {
  cplx z = 0;
  double E = 0;
  Field Q, h;
  Field D1Q, D2Q;
  double De[2] = {0, 0};
  int iterations = 0;
  double update_residual = 0;
  double elliptic_residual = 0;
};

struct BoundStateOptions {
  double tol = 1e-12;
  double z_max = 0.2;
  int max_iter = 500;
};

class BoundStateSolver {
 public:
  BoundStateSolver(const DeltaHamiltonian& H, ModelParams prm, BoundStateOptions opt = {});

  // Q[z] with D1Q, D2Q and DE; gauge covariance by rotation of the real profile.
  BoundState solve(cplx z);
  // DQ[z] w = D1Q Re w + D2Q Im w
  static Field DQ(const BoundState& st, cplx w);
  // D^2 Q[z](w1, w2) by centered differences of DQ along w2.
  Field D2Q(const BoundState& st, cplx w1, cplx w2);
  // All four D_j D_k Q, index [j][k] with j, k in {0, 1}.
  std::array<std::array<Field, 2>, 2> D2Q_all(const BoundState& st);

  const DeltaHamiltonian& hamiltonian() const { return H_; }
  const ModelParams& params() const { return prm_; }
  const BoundStateOptions& options() const { return opt_; }
  double fd_step() const;

 private:
  struct Real {
    double s = -1, e = 0;
    Field h, D1h, D2h;
    double De1 = 0, De2 = 0;
    int iterations = 0;
    double residual = 0;
  };
  const Real& real_profile(double s);
  void solve_fixed_point(Real& r);
  void solve_derivative(Real& r, cplx w, Field& Dh, double& De);

  const DeltaHamiltonian& H_;
  ModelParams prm_;
  BoundStateOptions opt_;
  Field phi_;
  Real cache_, last_;
};

struct MassCurvePoint {
  double E, M;
};
std::vector<MassCurvePoint> mass_curve(const std::vector<double>& Es, const ModelParams& prm);
double closed_form_mass(double E, const ModelParams& prm);

struct E1Result {
  bool found = false;
  double E1 = 0;
  double lo = 0, hi = 0;       // bracket of the sign change
  int sign_changes = 0;        // over the scanned range
  std::string diagnostic;
};
// Sign change of dM/dE on the focusing branch, scanned over [E_min, -q^2/2).
E1Result find_E1(const ModelParams& prm, double E_min = -50.0, int samples = 400, double bracket = 1e-3);

}  // namespace dnls
