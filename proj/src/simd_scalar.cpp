#include <cmath>

#include "dnls/simd.hpp"

namespace dnls::simd::scalar {
namespace {

double powi(double a, int k) {
  double r = 1.0;
  for (; k > 0; --k) r *= a;
  return r;
}

void nonlinear_phase(cplx* u, long n, double c, int p) {
  for (long j = 0; j < n; ++j) {
    const double a2 = std::norm(u[j]);
    u[j] *= std::polar(1.0, -c * powi(a2, p / 2));
  }
}

void phase_multiply(cplx* a, const double* lam, long n, double t) {
  for (long j = 0; j < n; ++j) a[j] *= std::polar(1.0, -lam[j] * t);
}

void complex_multiply(cplx* a, const cplx* b, long n) {
  for (long j = 0; j < n; ++j) a[j] *= b[j];
}

double weighted_norm2(const cplx* u, const double* w, long n) {
  double s = 0;
  for (long j = 0; j < n; ++j) s += w[j] * std::norm(u[j]);
  return s;
}

}  // namespace

const Kernels kernels{nonlinear_phase, phase_multiply, complex_multiply, weighted_norm2, "scalar"};

}  // namespace dnls::simd::scalar
