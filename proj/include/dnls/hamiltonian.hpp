#pragma once

#include <fftw3.h>

#include <memory>
#include <vector>

#include "dnls/grid.hpp"

namespace dnls {

struct ModelParams {
  double q = -1.0;
  int p = 4;
  double mu = -1.0;
  // allow_linear admits mu = 0 for the linear-limit checks of the integrators.
  void validate(bool allow_linear = false) const;
};

struct ScatteringData {
  static cplx reflection(double k, double q) { return q / (cplx(0, k) - q); }
  static cplx transmission(double k, double q) { return cplx(0, k) / (cplx(0, k) - q); }
};

// Unit lower-triangular factor L = L_1 L_2 ... L_K of I + sum_k s_k v_k v_k^T, each
// L_k = I + strictly_lower(p_k beta_k^T), with diagonal D.
class LowRankLDL {
 public:
  LowRankLDL() = default;
  LowRankLDL(int dim, const std::vector<double>& sigma, const std::vector<RVec>& rows);
  void solve_lower(cplx* y) const;             // y <- L^{-1} y
  void solve_upper(cplx* y) const;             // y <- L^{-T} y
  const RVec& diag() const { return d_; }
  int dim() const { return dim_; }

 private:
  int dim_ = 0;
  RVec d_;
  std::vector<RVec> p_, beta_;
};

// Coefficients in the orthonormal eigenbasis of the discrete H, split by parity.
// even[0]: bound state; even[1..M-1]: continuum; even[M]: top mode. odd[n-1]: mode n.
struct SectorCoeffs {
  CVec even, odd;
};

class DeltaHamiltonian {
 public:
  DeltaHamiltonian(GridPtr g, double q);
  ~DeltaHamiltonian();
  DeltaHamiltonian(const DeltaHamiltonian&) = delete;
  DeltaHamiltonian& operator=(const DeltaHamiltonian&) = delete;

  const GridPtr& grid() const { return g_; }
  double q() const { return q_; }
  double bound_energy() const { return -0.5 * q_ * q_; }
  const RVec& even_lambda() const { return lam_e_; }
  const RVec& odd_lambda() const { return lam_o_; }
  double max_lambda() const { return lam_e_.back(); }

  SectorCoeffs forward(const Field& f) const;
  Field inverse(const SectorCoeffs& c) const;

  // Exact samples |q|^{1/2} e^{q|x|}.
  Field phi0() const;
  // Bound mode of the discrete operator (phi0 scaled to unit weighted norm).
  const Field& phi0_discrete() const { return phi_; }
  cplx bound_coefficient(const Field& f) const { return inner(phi_, f); }
  Field project_pc(const Field& f) const;

  // FFT-ordered distorted transform; index 0 unused, M holds the top mode.
  struct Distorted {
    cplx bound;
    CVec coeffs;
  };
  Distorted distorted_ft(const Field& f) const;
  Field inverse_distorted_ft(const Distorted& d) const;
  // Wavenumber of each distorted index (FFT order).
  RVec distorted_wavenumbers() const { return wavenumbers(*g_); }

  Field propagate_linear(const Field& f, double t) const;
  Field propagate_pc(const Field& f, double t) const;
  Field apply_H(const Field& f) const;
  // (H + q^2/2)^{-1} P_c
  Field shifted_resolvent_pc(const Field& f) const;
  // Generic spectral multiplier m(lambda) applied to every mode.
  template <class Fn>
  Field apply_function(const Field& f, Fn&& m) const {
    auto c = forward(f);
    for (size_t n = 0; n < c.even.size(); ++n) c.even[n] *= m(lam_e_[n]);
    for (size_t n = 0; n < c.odd.size(); ++n) c.odd[n] *= m(lam_o_[n]);
    return inverse(c);
  }

  // 1/2 <f,Hf> + mu/(p+2) int |f|^{p+2} (weighted sums).
  double energy_form(const Field& f, const ModelParams& prm) const;
  double quadratic_form(const Field& f) const;  // <f, H f>

  // Phase factors e^{-i lambda t} in sector layout, reused across many steps.
  struct Phases {
    CVec even, odd;
  };
  Phases phases(double t) const;
  void apply_phases(SectorCoeffs& c, const Phases& ph) const;

  // Parameters of the three-point base operator, exposed for reference tests.
  double base_B() const { return B_; }
  double base_A() const { return A_; }
  double base_eta() const { return eta_; }

 private:
  struct Plans;
  void even_base_analysis(const CVec& e, CVec& g) const;   // V4^T (w4 e)
  void even_base_synthesis(const CVec& z, CVec& e) const;  // V4 z
  void odd_base_analysis(const CVec& o, CVec& g) const;
  void odd_base_synthesis(const CVec& z, CVec& o) const;

  GridPtr g_;
  double q_;
  int M_;
  double B_, A_, eta_;
  RVec lam_e_, lam_o_;
  RVec col0_, colM_;       // normalized bound / top base columns
  RVec beta_, nu_;         // continuum base parameters
  double nu0_, nuM_;
  RVec w4_;
  std::vector<int> even_pts_, odd_pts_;
  RVec sig_e_, sig_o_;
  std::vector<RVec> rows_e_, rows_o_;
  LowRankLDL ldl_e_, ldl_o_;
  RVec dinv_e_, dinv_o_;   // D^{-1/2}
  Field phi_;
  std::unique_ptr<Plans> plans_;
};

}  // namespace dnls
