#include "dnls/grid.hpp"

#include <fftw3.h>

#include <Eigen/Dense>
#include <boost/math/special_functions/bernoulli.hpp>
#include <cmath>
#include <mutex>

#include "dnls/errors.hpp"
#include "dnls/simd.hpp"

namespace dnls {

std::vector<double> gregory_corrections(int r) {
  // Exactness of h*(sum f_j + sum c_j f_j) for monomials j^d, d = 0..r, against
  // the Euler-Maclaurin end terms (B_{d+1}/(d+1) for odd d, 0 for even d).
  const int n = r + 1;
  Eigen::MatrixXd A(n, n);
  Eigen::VectorXd b(n);
  for (int d = 0; d < n; ++d) {
    for (int j = 0; j < n; ++j) A(d, j) = (d == 0) ? 1.0 : std::pow(double(j), d);
    b(d) = (d % 2 == 1) ? boost::math::bernoulli_b2n<double>((d + 1) / 2) / (d + 1) : 0.0;
  }
  Eigen::VectorXd c = A.fullPivLu().solve(b);
  return std::vector<double>(c.data(), c.data() + n);
}

SpatialGrid::SpatialGrid(double half_width, int point_count) : L_(half_width), N_(point_count) {
  if (!(L_ > 0) || N_ < 4 * (kGregoryOrder + 1) || N_ % 2 != 0)
    throw ConfigError("grid needs L > 0 and even N >= " + std::to_string(4 * (kGregoryOrder + 1)));
  dx_ = 2.0 * L_ / N_;
  x_.resize(N_);
  for (int j = 0; j < N_; ++j) x_[j] = x(j);
  const int M = N_ / 2;
  const auto c = gregory_corrections(kGregoryOrder);
  w_.assign(N_, dx_);
  w_[M] = dx_ * (1.0 + 2.0 * c[0]);
  for (int m = 1; m <= kGregoryOrder; ++m) {
    w_[M + m] = dx_ * (1.0 + c[m]);
    w_[M - m] = dx_ * (1.0 + c[m]);
  }
  we_.assign(M + 1, 0.0);
  wo_.assign(M + 1, 0.0);
  we_[0] = w_[M];
  for (int m = 1; m < M; ++m) {
    we_[m] = 2.0 * w_[M + m];
    wo_[m] = 2.0 * w_[M + m];
  }
  we_[M] = w_[0];
}

Field::Field(GridPtr g, CVec v) : grid_(std::move(g)), v_(std::move(v)) {
  if (static_cast<int>(v_.size()) != grid_->N()) throw ConfigError("field length does not match grid");
}

bool Field::finite() const {
  for (auto& z : v_)
    if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) return false;
  return true;
}

void require_same_grid(const Field& a, const Field& b) {
  if (!a.grid() || !b.grid() || !a.grid()->same(*b.grid())) throw ConfigError("fields live on different grids");
}

Field& Field::operator+=(const Field& o) {
  require_same_grid(*this, o);
  for (int j = 0; j < size(); ++j) v_[j] += o.v_[j];
  return *this;
}
Field& Field::operator-=(const Field& o) {
  require_same_grid(*this, o);
  for (int j = 0; j < size(); ++j) v_[j] -= o.v_[j];
  return *this;
}
Field& Field::operator*=(cplx a) {
  for (auto& z : v_) z *= a;
  return *this;
}
Field operator+(Field a, const Field& b) { return a += b; }
Field operator-(Field a, const Field& b) { return a -= b; }
Field operator*(cplx a, Field f) { return f *= a; }
Field conj(Field f) {
  for (auto& z : f.values()) z = std::conj(z);
  return f;
}
Field axpy(cplx a, const Field& f, const Field& g) {
  require_same_grid(f, g);
  Field out = g;
  for (int j = 0; j < f.size(); ++j) out[j] += a * f[j];
  return out;
}

TimeGrid::TimeGrid(double dt_, double T_, int stride_) : dt(dt_), T(T_), stride(stride_) {
  if (!(dt > 0) || !(T >= dt) || stride < 1) throw ConfigError("time grid needs dt > 0, T >= dt, stride >= 1");
}
long TimeGrid::steps() const { return std::lround(std::floor(T / dt + 1e-9)); }
long TimeGrid::outputs() const { return steps() / stride + 1; }

cplx integrate(const Field& f) {
  cplx s = 0;
  for (auto& z : f.values()) s += z;
  return s * f.grid()->dx();
}

cplx inner(const Field& f, const Field& g) {
  require_same_grid(f, g);
  const auto& w = f.grid()->weights();
  cplx s = 0;
  for (int j = 0; j < f.size(); ++j) s += w[j] * std::conj(f[j]) * g[j];
  return s;
}

double l2_norm(const Field& f) {
  return std::sqrt(simd::weighted_norm2(f.data(), f.grid()->weights().data(), f.size()));
}

Field derivative(const Field& f) {
  const int N = f.size();
  const double inv = 0.5 / f.grid()->dx();
  Field d(f.grid());
  for (int j = 0; j < N; ++j) d[j] = (f[(j + 1) % N] - f[(j + N - 1) % N]) * inv;
  return d;
}

double h1_norm(const Field& f) {
  const double a = l2_norm(f), b = l2_norm(derivative(f));
  return std::sqrt(a * a + b * b);
}

double japanese(double x) { return std::sqrt(1.0 + x * x); }

double weighted_sup(const Field& f, double alpha) {
  double m = 0;
  for (int j = 0; j < f.size(); ++j)
    m = std::max(m, std::pow(japanese(f.grid()->x(j)), alpha) * std::abs(f[j]));
  return m;
}

Norms norms(const Field& f, double alpha) { return {l2_norm(f), h1_norm(f), weighted_sup(f, alpha)}; }

double sup_norm(const Field& f) {
  double m = 0;
  for (auto& z : f.values()) m = std::max(m, std::abs(z));
  return m;
}

double l1_norm(const Field& f) {
  const auto& w = f.grid()->weights();
  double s = 0;
  for (int j = 0; j < f.size(); ++j) s += w[j] * std::abs(f[j]);
  return s;
}

namespace {
std::mutex& plan_mutex() {
  static std::mutex m;
  return m;
}

void dft(CVec& a, int sign) {
  const int N = static_cast<int>(a.size());
  auto* buf = reinterpret_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * N));
  fftw_plan plan;
  {
    std::lock_guard<std::mutex> lk(plan_mutex());
    plan = fftw_plan_dft_1d(N, buf, buf, sign, FFTW_ESTIMATE);
  }
  std::copy(a.begin(), a.end(), reinterpret_cast<cplx*>(buf));
  fftw_execute(plan);
  std::copy(reinterpret_cast<cplx*>(buf), reinterpret_cast<cplx*>(buf) + N, a.begin());
  {
    std::lock_guard<std::mutex> lk(plan_mutex());
    fftw_destroy_plan(plan);
  }
  fftw_free(buf);
}
}  // namespace

RVec wavenumbers(const SpatialGrid& g) {
  const int N = g.N();
  RVec k(N);
  for (int n = 0; n < N; ++n) k[n] = (n <= N / 2 ? n : n - N) * dk(g);
  return k;
}

double dk(const SpatialGrid& g) { return M_PI / g.L(); }

CVec fourier(const Field& f) {
  const auto& g = *f.grid();
  CVec a = f.values();
  dft(a, FFTW_FORWARD);
  const double s = g.dx() / std::sqrt(2 * M_PI);
  // e^{-i k_n x_j} = e^{i k_n L} e^{-2 pi i n j / N}, e^{i k_n L} = (-1)^n.
  for (int n = 0; n < g.N(); ++n) a[n] *= (n % 2 ? -s : s);
  return a;
}

Field inverse_fourier(const GridPtr& g, const CVec& F) {
  if (static_cast<int>(F.size()) != g->N()) throw ConfigError("spectrum length does not match grid");
  CVec a = F;
  const double s = std::sqrt(2 * M_PI) / (g->dx() * g->N());
  for (int n = 0; n < g->N(); ++n) a[n] *= (n % 2 ? -s : s);
  dft(a, FFTW_BACKWARD);
  return Field(g, std::move(a));
}

double hs_norm(const Field& f, double s) {
  const auto F = fourier(f);
  const auto k = wavenumbers(*f.grid());
  double acc = 0;
  for (size_t n = 0; n < F.size(); ++n) acc += std::pow(1 + k[n] * k[n], s) * std::norm(F[n]);
  return std::sqrt(acc * dk(*f.grid()));
}

}  // namespace dnls
