#include "dnls/simd.hpp"

#ifdef DNLS_SIMD_NEON

#include <arm_neon.h>

#include <cmath>

namespace dnls::simd::neon {
namespace {

// One complex number per float64x2_t as (re, im).
inline float64x2_t rotate(float64x2_t v, double theta) {
  const double c = std::cos(theta), s = std::sin(theta);
  // (re + i im)(c - i s) = (re c + im s) + i (im c - re s)
  const float64x2_t sw = vextq_f64(v, v, 1);
  const float64x2_t cs = {s, -s};
  return vfmaq_f64(vmulq_n_f64(v, c), sw, cs);
}

void nonlinear_phase(cplx* u, long n, double c, int p) {
  double* d = reinterpret_cast<double*>(u);
  for (long j = 0; j < n; ++j) {
    const float64x2_t v = vld1q_f64(d + 2 * j);
    const double a2 = vaddvq_f64(vmulq_f64(v, v));
    double pw = 1.0;
    for (int k = 0; k < p / 2; ++k) pw *= a2;
    vst1q_f64(d + 2 * j, rotate(v, c * pw));
  }
}

void phase_multiply(cplx* a, const double* lam, long n, double t) {
  double* d = reinterpret_cast<double*>(a);
  for (long j = 0; j < n; ++j) vst1q_f64(d + 2 * j, rotate(vld1q_f64(d + 2 * j), lam[j] * t));
}

void complex_multiply(cplx* a, const cplx* b, long n) {
  double* pa = reinterpret_cast<double*>(a);
  const double* pb = reinterpret_cast<const double*>(b);
  for (long j = 0; j < n; ++j) {
    const float64x2_t x = vld1q_f64(pa + 2 * j), y = vld1q_f64(pb + 2 * j);
    const float64x2_t yre = vdupq_laneq_f64(y, 0), yim = vdupq_laneq_f64(y, 1);
    const float64x2_t xs = vextq_f64(x, x, 1);
    const float64x2_t sgn = {-1.0, 1.0};
    vst1q_f64(pa + 2 * j, vfmaq_f64(vmulq_f64(x, yre), vmulq_f64(xs, yim), sgn));
  }
}

double weighted_norm2(const cplx* u, const double* w, long n) {
  const double* d = reinterpret_cast<const double*>(u);
  float64x2_t acc = vdupq_n_f64(0.0);
  for (long j = 0; j < n; ++j) {
    const float64x2_t v = vld1q_f64(d + 2 * j);
    acc = vfmaq_n_f64(acc, vmulq_f64(v, v), w[j]);
  }
  return vaddvq_f64(acc);
}

}  // namespace

const Kernels kernels{nonlinear_phase, phase_multiply, complex_multiply, weighted_norm2, "neon"};

}  // namespace dnls::simd::neon

#endif
