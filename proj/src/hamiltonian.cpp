#include "dnls/hamiltonian.hpp"

#include <boost/math/tools/roots.hpp>
#include <cmath>
#include <mutex>

#include "dnls/errors.hpp"
#include "dnls/simd.hpp"

namespace dnls {

void ModelParams::validate(bool allow_linear) const {
  if (!(q < 0)) throw ConfigError("q must be negative (attractive delta)");
  if (p < 4 || p % 2 != 0) throw ConfigError("p must be an even integer >= 4");
  if (!std::isfinite(mu) || (mu == 0 && !allow_linear)) throw ConfigError("mu must be a nonzero real");
}

LowRankLDL::LowRankLDL(int dim, const std::vector<double>& sigma, const std::vector<RVec>& rows)
    : dim_(dim), d_(dim, 1.0) {
  for (size_t k = 0; k < sigma.size(); ++k) {
    CVec y(rows[k].begin(), rows[k].end());
    solve_lower(y.data());
    RVec p(dim), beta(dim);
    double alpha = sigma[k];
    for (int j = 0; j < dim; ++j) {
      p[j] = y[j].real();
      const double dn = d_[j] + alpha * p[j] * p[j];
      if (!(dn > 0)) throw NumericalError("weighted Gram matrix lost positive definiteness");
      beta[j] = alpha * p[j] / dn;
      alpha *= d_[j] / dn;
      d_[j] = dn;
    }
    p_.push_back(std::move(p));
    beta_.push_back(std::move(beta));
  }
}

void LowRankLDL::solve_lower(cplx* y) const {
  for (size_t k = 0; k < p_.size(); ++k) {
    const double* p = p_[k].data();
    const double* b = beta_[k].data();
    cplx s = 0;
    for (int i = 0; i < dim_; ++i) {
      y[i] -= p[i] * s;
      s += b[i] * y[i];
    }
  }
}

void LowRankLDL::solve_upper(cplx* y) const {
  for (size_t k = p_.size(); k-- > 0;) {
    const double* p = p_[k].data();
    const double* b = beta_[k].data();
    cplx s = 0;
    for (int i = dim_ - 1; i >= 0; --i) {
      y[i] -= b[i] * s;
      s += p[i] * y[i];
    }
  }
}

namespace {
std::mutex& plan_mutex() {
  static std::mutex m;
  return m;
}
}  // namespace

// r2r plans acting on the real and imaginary parts of interleaved complex data.
struct DeltaHamiltonian::Plans {
  fftw_plan dct = nullptr, dst = nullptr;
  int nc, ns;
  Plans(int M) : nc(M + 1), ns(M - 1) {
    std::lock_guard<std::mutex> lk(plan_mutex());
    std::vector<double> a(2 * nc), b(2 * nc);
    const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
    fftw_r2r_kind kc = FFTW_REDFT00, ks = FFTW_RODFT00;
    dct = fftw_plan_many_r2r(1, &nc, 2, a.data(), nullptr, 2, 1, b.data(), nullptr, 2, 1, &kc, flags);
    dst = fftw_plan_many_r2r(1, &ns, 2, a.data(), nullptr, 2, 1, b.data(), nullptr, 2, 1, &ks, flags);
  }
  ~Plans() {
    std::lock_guard<std::mutex> lk(plan_mutex());
    fftw_destroy_plan(dct);
    fftw_destroy_plan(dst);
  }
  void run_dct(const cplx* in, cplx* out) const {
    fftw_execute_r2r(dct, const_cast<double*>(reinterpret_cast<const double*>(in)), reinterpret_cast<double*>(out));
  }
  void run_dst(const cplx* in, cplx* out) const {
    fftw_execute_r2r(dst, const_cast<double*>(reinterpret_cast<const double*>(in)), reinterpret_cast<double*>(out));
  }
};

DeltaHamiltonian::DeltaHamiltonian(GridPtr g, double q) : g_(std::move(g)), q_(q), M_(g_->M()) {
  if (!(q < 0)) throw ConfigError("q must be negative (attractive delta)");
  const int M = M_;
  const double h = g_->dx(), L = g_->L();
  const double qh = q * h;
  B_ = (std::sinh(qh) - qh) / (std::cosh(qh) - 1.0);
  A_ = std::sinh(qh) - B_ * std::cosh(qh);
  {
    auto f = [&](double e) { return std::sinh(qh) + std::sinh(e) - B_ * (std::cosh(qh) + std::cosh(e)); };
    boost::uintmax_t it = 200;
    auto r = boost::math::tools::toms748_solve(f, 0.0, 50.0, boost::math::tools::eps_tolerance<double>(52), it);
    eta_ = 0.5 * (r.first + r.second);
  }

  // Three-point base operator: eigenvectors exactly orthogonal under w4.
  w4_.assign(M + 1, 2 * h);
  w4_[0] = h * (1 + B_);
  w4_[M] = h * (1 - B_);
  col0_.resize(M + 1);
  colM_.resize(M + 1);
  const double rho = std::exp(qh);
  double s0 = 0, sM = 0;
  for (int m = 0; m <= M; ++m) {
    col0_[m] = std::sqrt(-q) * std::pow(rho, m);
    colM_[m] = (m % 2 ? -1.0 : 1.0) * std::exp(eta_ * (m - M));
    s0 += w4_[m] * col0_[m] * col0_[m];
    sM += w4_[m] * colM_[m] * colM_[m];
  }
  nu0_ = std::sqrt(s0);
  nuM_ = std::sqrt(sM);
  for (auto& v : col0_) v /= nu0_;
  for (auto& v : colM_) v /= nuM_;
  beta_.assign(M, 0.0);
  nu_.assign(M, 1.0);
  for (int n = 1; n < M; ++n) {
    const double kap = M_PI * n / M;
    beta_[n] = (A_ + B_ * std::cos(kap)) / std::sin(kap);
    nu_[n] = std::sqrt(L * (1 + beta_[n] * beta_[n]));
  }

  lam_e_.resize(M + 1);
  lam_e_[0] = bound_energy();
  for (int n = 1; n <= M; ++n) lam_e_[n] = 0.5 * std::pow(M_PI * n / L, 2);
  lam_o_.resize(M - 1);
  for (int n = 1; n < M; ++n) lam_o_[n - 1] = 0.5 * std::pow(M_PI * n / L, 2);

  // Gram corrections at the points where the sector weights differ from the base weights.
  const auto& we = g_->even_weights();
  const auto& wo = g_->odd_weights();
  std::vector<double> sig;
  std::vector<RVec> rows;
  for (int m = 0; m <= M; ++m) {
    if (m > kGregoryOrder && m < M) continue;
    const double s = we[m] - w4_[m];
    if (s == 0) continue;
    RVec row(M + 1);
    row[0] = col0_[m];
    for (int n = 1; n < M; ++n) {
      const double kap = M_PI * n / M;
      row[n] = (std::cos(kap * m) + beta_[n] * std::sin(kap * m)) / nu_[n];
    }
    row[M] = colM_[m];
    sig.push_back(s);
    rows.push_back(std::move(row));
    even_pts_.push_back(m);
  }
  ldl_e_ = LowRankLDL(M + 1, sig, rows);
  sig_e_ = sig;
  rows_e_ = rows;
  sig.clear();
  rows.clear();
  for (int m = 1; m <= kGregoryOrder; ++m) {
    const double s = wo[m] - 2 * h;
    if (s == 0) continue;
    RVec row(M - 1);
    for (int n = 1; n < M; ++n) row[n - 1] = std::sin(M_PI * n * m / M) / std::sqrt(L);
    sig.push_back(s);
    rows.push_back(std::move(row));
    odd_pts_.push_back(m);
  }
  ldl_o_ = LowRankLDL(M - 1, sig, rows);
  sig_o_ = sig;
  rows_o_ = rows;
  dinv_e_.resize(M + 1);
  dinv_o_.resize(M - 1);
  for (int n = 0; n <= M; ++n) dinv_e_[n] = 1.0 / std::sqrt(ldl_e_.diag()[n]);
  for (int n = 0; n < M - 1; ++n) dinv_o_[n] = 1.0 / std::sqrt(ldl_o_.diag()[n]);

  plans_ = std::make_unique<Plans>(M);

  // The first orthonormal mode is the bound base column rescaled by D_0^{-1/2}.
  phi_ = phi0();
  phi_ *= dinv_e_[0] / nu0_;
}

DeltaHamiltonian::~DeltaHamiltonian() = default;

Field DeltaHamiltonian::phi0() const {
  const double a = std::sqrt(-q_);
  return sample(g_, [&](double x) { return cplx(a * std::exp(q_ * std::fabs(x))); });
}

void DeltaHamiltonian::even_base_analysis(const CVec& e, CVec& g) const {
  const int M = M_;
  const double h = g_->dx();
  CVec tc(M + 1), ts(std::max(M - 1, 1)), in(std::max(M - 1, 1));
  plans_->run_dct(e.data(), tc.data());
  for (int m = 1; m < M; ++m) in[m - 1] = e[m];
  plans_->run_dst(in.data(), ts.data());
  g.assign(M + 1, 0.0);
  cplx a0 = 0, aM = 0;
  for (int m = 0; m <= M; ++m) {
    a0 += w4_[m] * col0_[m] * e[m];
    aM += w4_[m] * colM_[m] * e[m];
  }
  g[0] = a0;
  g[M] = aM;
  for (int n = 1; n < M; ++n) {
    const double sgn = (n % 2) ? -1.0 : 1.0;
    g[n] = (h * tc[n] + h * B_ * (e[0] - sgn * e[M]) + beta_[n] * h * ts[n - 1]) / nu_[n];
  }
}

void DeltaHamiltonian::even_base_synthesis(const CVec& z, CVec& e) const {
  const int M = M_;
  CVec xc(M + 1, 0.0), xs(std::max(M - 1, 1)), tc(M + 1), ts(std::max(M - 1, 1));
  for (int n = 1; n < M; ++n) {
    xc[n] = z[n] / (2 * nu_[n]);
    xs[n - 1] = beta_[n] * z[n] / (2 * nu_[n]);
  }
  plans_->run_dct(xc.data(), tc.data());
  plans_->run_dst(xs.data(), ts.data());
  e.assign(M + 1, 0.0);
  for (int m = 0; m <= M; ++m) {
    cplx v = tc[m] + z[0] * col0_[m] + z[M] * colM_[m];
    if (m > 0 && m < M) v += ts[m - 1];
    e[m] = v;
  }
}

void DeltaHamiltonian::odd_base_analysis(const CVec& o, CVec& g) const {
  const int M = M_;
  CVec in(M - 1);
  for (int m = 1; m < M; ++m) in[m - 1] = o[m];
  g.assign(M - 1, 0.0);
  plans_->run_dst(in.data(), g.data());
  const double s = g_->dx() / std::sqrt(g_->L());
  for (auto& v : g) v *= s;
}

void DeltaHamiltonian::odd_base_synthesis(const CVec& z, CVec& o) const {
  const int M = M_;
  CVec in(M - 1), out(M - 1);
  const double s = 0.5 / std::sqrt(g_->L());
  for (int n = 0; n < M - 1; ++n) in[n] = z[n] * s;
  plans_->run_dst(in.data(), out.data());
  o.assign(M + 1, 0.0);
  for (int m = 1; m < M; ++m) o[m] = out[m - 1];
}

SectorCoeffs DeltaHamiltonian::forward(const Field& f) const {
  if (!f.grid()->same(*g_)) throw ConfigError("field grid does not match operator grid");
  const int M = M_, N = g_->N();
  CVec e(M + 1), o(M + 1);
  for (int m = 0; m <= M; ++m) {
    const cplx up = f[(M + m) % N], dn = f[M - m];
    e[m] = 0.5 * (up + dn);
    o[m] = 0.5 * (up - dn);
  }
  o[M] = 0;
  SectorCoeffs c;
  even_base_analysis(e, c.even);
  for (size_t k = 0; k < even_pts_.size(); ++k) {
    const cplx em = sig_e_[k] * e[even_pts_[k]];
    const double* r = rows_e_[k].data();
    for (int n = 0; n <= M; ++n) c.even[n] += em * r[n];
  }
  ldl_e_.solve_lower(c.even.data());
  for (int n = 0; n <= M; ++n) c.even[n] *= dinv_e_[n];

  odd_base_analysis(o, c.odd);
  for (size_t k = 0; k < odd_pts_.size(); ++k) {
    const cplx om = sig_o_[k] * o[odd_pts_[k]];
    const double* r = rows_o_[k].data();
    for (int n = 0; n < M - 1; ++n) c.odd[n] += om * r[n];
  }
  ldl_o_.solve_lower(c.odd.data());
  for (int n = 0; n < M - 1; ++n) c.odd[n] *= dinv_o_[n];
  return c;
}

Field DeltaHamiltonian::inverse(const SectorCoeffs& c) const {
  const int M = M_, N = g_->N();
  CVec ze = c.even, zo = c.odd;
  for (int n = 0; n <= M; ++n) ze[n] *= dinv_e_[n];
  ldl_e_.solve_upper(ze.data());
  for (int n = 0; n < M - 1; ++n) zo[n] *= dinv_o_[n];
  ldl_o_.solve_upper(zo.data());
  CVec e, o;
  even_base_synthesis(ze, e);
  odd_base_synthesis(zo, o);
  Field f(g_);
  for (int m = 0; m < M; ++m) f[M + m] = e[m] + o[m];
  for (int m = 1; m <= M; ++m) f[(M - m + N) % N] = e[m] - o[m];
  return f;
}

Field DeltaHamiltonian::project_pc(const Field& f) const { return axpy(-bound_coefficient(f), phi_, f); }

DeltaHamiltonian::Distorted DeltaHamiltonian::distorted_ft(const Field& f) const {
  const auto c = forward(f);
  const int M = M_, N = g_->N();
  const double dk_ = dk(*g_), s = 1.0 / std::sqrt(2 * dk_);
  Distorted d{c.even[0], CVec(N, 0.0)};
  const cplx I(0, 1);
  for (int n = 1; n < M; ++n) {
    const cplx a = c.even[n], b = c.odd[n - 1];
    d.coeffs[n] = (a - I * b) * s;
    d.coeffs[N - n] = (a + I * b) * s;
  }
  d.coeffs[M] = c.even[M] / std::sqrt(dk_);
  return d;
}

Field DeltaHamiltonian::inverse_distorted_ft(const Distorted& d) const {
  const int M = M_, N = g_->N();
  if (static_cast<int>(d.coeffs.size()) != N) throw ConfigError("distorted spectrum length does not match grid");
  const double dk_ = dk(*g_), s = std::sqrt(2 * dk_) / 2;
  const cplx I(0, 1);
  SectorCoeffs c{CVec(M + 1, 0.0), CVec(M - 1, 0.0)};
  c.even[0] = d.bound;
  for (int n = 1; n < M; ++n) {
    c.even[n] = (d.coeffs[n] + d.coeffs[N - n]) * s;
    c.odd[n - 1] = I * (d.coeffs[n] - d.coeffs[N - n]) * s;
  }
  c.even[M] = d.coeffs[M] * std::sqrt(dk_);
  return inverse(c);
}

DeltaHamiltonian::Phases DeltaHamiltonian::phases(double t) const {
  Phases ph{CVec(lam_e_.size(), 1.0), CVec(lam_o_.size(), 1.0)};
  simd::phase_multiply(ph.even.data(), lam_e_.data(), ph.even.size(), t);
  simd::phase_multiply(ph.odd.data(), lam_o_.data(), ph.odd.size(), t);
  return ph;
}

void DeltaHamiltonian::apply_phases(SectorCoeffs& c, const Phases& ph) const {
  simd::complex_multiply(c.even.data(), ph.even.data(), c.even.size());
  simd::complex_multiply(c.odd.data(), ph.odd.data(), c.odd.size());
}

Field DeltaHamiltonian::propagate_linear(const Field& f, double t) const {
  auto c = forward(f);
  simd::phase_multiply(c.even.data(), lam_e_.data(), c.even.size(), t);
  simd::phase_multiply(c.odd.data(), lam_o_.data(), c.odd.size(), t);
  return inverse(c);
}

Field DeltaHamiltonian::propagate_pc(const Field& f, double t) const {
  auto c = forward(f);
  c.even[0] = 0;
  simd::phase_multiply(c.even.data(), lam_e_.data(), c.even.size(), t);
  simd::phase_multiply(c.odd.data(), lam_o_.data(), c.odd.size(), t);
  return inverse(c);
}

Field DeltaHamiltonian::apply_H(const Field& f) const {
  return apply_function(f, [](double l) { return l; });
}

Field DeltaHamiltonian::shifted_resolvent_pc(const Field& f) const {
  auto c = forward(f);
  const double s = 0.5 * q_ * q_;
  c.even[0] = 0;
  for (size_t n = 1; n < c.even.size(); ++n) c.even[n] /= lam_e_[n] + s;
  for (size_t n = 0; n < c.odd.size(); ++n) c.odd[n] /= lam_o_[n] + s;
  return inverse(c);
}

double DeltaHamiltonian::quadratic_form(const Field& f) const {
  const auto c = forward(f);
  double s = 0;
  for (size_t n = 0; n < c.even.size(); ++n) s += lam_e_[n] * std::norm(c.even[n]);
  for (size_t n = 0; n < c.odd.size(); ++n) s += lam_o_[n] * std::norm(c.odd[n]);
  return s;
}

double DeltaHamiltonian::energy_form(const Field& f, const ModelParams& prm) const {
  const auto& w = g_->weights();
  double nl = 0;
  for (int j = 0; j < f.size(); ++j) nl += w[j] * std::pow(std::norm(f[j]), 0.5 * (prm.p + 2));
  return 0.5 * quadratic_form(f) + prm.mu / (prm.p + 2) * nl;
}

}  // namespace dnls
