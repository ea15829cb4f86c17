#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dnls/modulation.hpp"

namespace dnls {

struct XNorm {
  double linf_h1 = 0;        // L_t^inf H_x^1
  double l4_linf = 0;        // L_t^4 L_x^inf
  double weighted_lxinf_lt2 = 0;  // ||<x>^{-3/2} v||_{L_x^inf L_t^2}
  double deriv_lxinf_lt2 = 0;     // ||d_x v||_{L_x^inf L_t^2}
  double total() const { return linf_h1 + l4_linf + weighted_lxinf_lt2 + deriv_lxinf_lt2; }
};

// Streaming X-norm over uniformly spaced snapshots; time integrals by trapezoid.
class XNormAccumulator {
 public:
  explicit XNormAccumulator(double dt_out) : dt_(dt_out) {}
  void add(const Field& v);
  XNorm result() const;
  long count() const { return count_; }

 private:
  double dt_;
  long count_ = 0;
  double linf_h1_ = 0, l4_sum_ = 0, first_l4_ = 0, last_l4_ = 0;
  RVec w_sum_, d_sum_, first_w_, first_d_, last_w_, last_d_;
};

XNorm x_norm(const std::vector<Field>& v_snapshots, double dt_out);

struct YNorm {
  double l1 = 0, l2 = 0;        // of |A^{-1} b|
  double fd_l1 = 0, fd_l2 = 0;  // of the finite-difference |zdot + iEz|
  double total() const { return l1 + l2; }
};
YNorm y_norm(const ModulationTrajectory& mt);

struct ZWNorms {
  double Z = 0, W = 0;
  double z_sup = 0;
  double Z_over_zsup = 0;
};
ZWNorms zw_norms(const ModulationTrajectory& mt, const SpatialGrid& g);

struct InequalityCheck {
  std::string name;
  std::string ensemble;
  RVec ratios;
  double max_ratio = 0;
  double fitted_exponent = NAN;
};

struct LinearCheckConfig {
  double q = -1.0;
  std::uint64_t seed = 1;
  int dispersive_samples = 20;
  // Wavepacket ensemble: centers in [-center_max, center_max], widths in [width_min, width_max], |k0| <= k0_max.
  double center_max = 1.0, width_min = 0.2, width_max = 0.5, k0_max = 0.0;
  int samples = 6;
  double L = 500.0;
  int N = 16384;
  double t_min = 1.0, t_max = 50.0;
  int t_points = 25;
  double smoothing_T = 20.0, smoothing_dt = 0.02;
  double smoothing_L = 250.0;
  int smoothing_N = 8192;
  bool refine = true;  // repeat the Strichartz ratio on N -> 2N
};

struct LinearCheckReport {
  std::vector<InequalityCheck> checks;
  double trivial_lhs = 0;  // max LHS over all checks for f = phi0
};
LinearCheckReport check_linear_estimates(const LinearCheckConfig& cfg);

// Streaming w(t) = e^{itH} P_c v(t) at checkpoints.
struct ScatteringState {
  Field v_plus;
  RVec times, cauchy_tail, phi0_component;
  double spearman_late = 0;  // rank correlation of the tail with t on [T/2, T]
};

class ScatteringAccumulator {
 public:
  explicit ScatteringAccumulator(const DeltaHamiltonian& H) : H_(H) {}
  void add(double t, const Field& v);
  ScatteringState finish() const;

 private:
  const DeltaHamiltonian& H_;
  RVec t_;
  std::vector<Field> w_;
  RVec phi_;
};

ScatteringState extract_scattering_state(const DeltaHamiltonian& H, const RVec& times,
                                         const std::vector<Field>& v_snapshots);

double spearman(const RVec& a, const RVec& b);
// Least-squares slope of log y against log x.
double loglog_slope(const RVec& x, const RVec& y);

}  // namespace dnls
