#pragma once

#include <complex>
#include <memory>
#include <vector>

namespace dnls {

using cplx = std::complex<double>;
using CVec = std::vector<cplx>;
using RVec = std::vector<double>;

// Order of the end corrections applied on each side of the kink at x = 0.
inline constexpr int kGregoryOrder = 6;

// Gregory end corrections c_0..c_r for a trapezoid rule starting at a node.
std::vector<double> gregory_corrections(int r);

class SpatialGrid {
 public:
  SpatialGrid(double half_width, int point_count);

  double L() const { return L_; }
  int N() const { return N_; }
  int M() const { return N_ / 2; }
  double dx() const { return dx_; }
  int origin() const { return N_ / 2; }
  double x(int j) const { return -L_ + j * dx_; }
  const RVec& xs() const { return x_; }

  // Full-line inner-product weights: trapezoid plus Gregory corrections at x = 0.
  const RVec& weights() const { return w_; }
  // Weights of the even / odd sector coordinates e_m, o_m (m = 0..M).
  const RVec& even_weights() const { return we_; }
  const RVec& odd_weights() const { return wo_; }

  bool same(const SpatialGrid& o) const { return L_ == o.L_ && N_ == o.N_; }

 private:
  double L_;
  int N_;
  double dx_;
  RVec x_, w_, we_, wo_;
};

using GridPtr = std::shared_ptr<const SpatialGrid>;

inline GridPtr make_grid(double L, int N) { return std::make_shared<SpatialGrid>(L, N); }

class Field {
 public:
  Field() = default;
  explicit Field(GridPtr g) : grid_(std::move(g)), v_(grid_->N(), cplx(0.0)) {}
  Field(GridPtr g, CVec v);

  const GridPtr& grid() const { return grid_; }
  int size() const { return static_cast<int>(v_.size()); }
  cplx& operator[](int j) { return v_[j]; }
  const cplx& operator[](int j) const { return v_[j]; }
  CVec& values() { return v_; }
  const CVec& values() const { return v_; }
  cplx* data() { return v_.data(); }
  const cplx* data() const { return v_.data(); }
  cplx at_origin() const { return v_[grid_->origin()]; }
  bool finite() const;

  Field& operator+=(const Field& o);
  Field& operator-=(const Field& o);
  Field& operator*=(cplx a);

 private:
  GridPtr grid_;
  CVec v_;
};

Field operator+(Field a, const Field& b);
Field operator-(Field a, const Field& b);
Field operator*(cplx a, Field f);
Field conj(Field f);
// a*f + g
Field axpy(cplx a, const Field& f, const Field& g);

template <class Fn>
Field sample(const GridPtr& g, Fn&& fn) {
  Field f(g);
  for (int j = 0; j < g->N(); ++j) f[j] = fn(g->x(j));
  return f;
}

void require_same_grid(const Field& a, const Field& b);

struct TimeGrid {
  double dt = 1e-3;
  double T = 1.0;
  int stride = 1;

  TimeGrid() = default;
  TimeGrid(double dt_, double T_, int stride_);
  long steps() const;
  long outputs() const;  // floor(T/(dt*stride)) + 1
};

// Plain trapezoid h * sum f_j (periodic grid).
cplx integrate(const Field& f);
// <f,g> = int conj(f) g with the corrected weights.
cplx inner(const Field& f, const Field& g);

struct Norms {
  double l2 = 0, h1 = 0, weighted_sup = 0;
};
double l2_norm(const Field& f);
double h1_norm(const Field& f);
double weighted_sup(const Field& f, double alpha);
Norms norms(const Field& f, double alpha);
double sup_norm(const Field& f);
double l1_norm(const Field& f);
double japanese(double x);
// Centered difference derivative (periodic).
Field derivative(const Field& f);

// Unitary Fourier convention F(k_n) = h/sqrt(2 pi) sum_j f_j e^{-i k_n x_j}, FFT order.
CVec fourier(const Field& f);
Field inverse_fourier(const GridPtr& g, const CVec& F);
// Wavenumbers in FFT order and spacing pi/L.
RVec wavenumbers(const SpatialGrid& g);
double dk(const SpatialGrid& g);
// H^s norm via <k>^s on the plain transform.
double hs_norm(const Field& f, double s);

}  // namespace dnls
