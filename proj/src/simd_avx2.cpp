#include "dnls/simd.hpp"

#ifdef DNLS_SIMD_X86

#include <immintrin.h>

#include <cmath>

namespace dnls::simd::avx2 {

bool supported() { return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma"); }

namespace {

// Arguments beyond this magnitude go through the scalar path (exact reduction).
constexpr double kMaxArg = 1e5;

// Three-part Cody-Waite split of pi/2.
constexpr double kPio2_1 = 1.57079632673412561417e+00;
constexpr double kPio2_2 = 6.07710050630396597660e-11;
constexpr double kPio2_3 = 2.02226624871116645580e-21;

__attribute__((target("avx2,fma"))) inline void sincos4(__m256d x, __m256d& s, __m256d& c) {
  const __m256d k = _mm256_round_pd(_mm256_mul_pd(x, _mm256_set1_pd(M_2_PI)), _MM_FROUND_TO_NEAREST_INT | _MM_FROUND_NO_EXC);
  __m256d r = _mm256_fnmadd_pd(k, _mm256_set1_pd(kPio2_1), x);
  r = _mm256_fnmadd_pd(k, _mm256_set1_pd(kPio2_2), r);
  r = _mm256_fnmadd_pd(k, _mm256_set1_pd(kPio2_3), r);
  const __m256d z = _mm256_mul_pd(r, r);

  __m256d ps = _mm256_set1_pd(1.58969099521155010221e-10);
  ps = _mm256_fmadd_pd(ps, z, _mm256_set1_pd(-2.50507602534068634195e-08));
  ps = _mm256_fmadd_pd(ps, z, _mm256_set1_pd(2.75573137070700676789e-06));
  ps = _mm256_fmadd_pd(ps, z, _mm256_set1_pd(-1.98412698298579493134e-04));
  ps = _mm256_fmadd_pd(ps, z, _mm256_set1_pd(8.33333333332248946124e-03));
  ps = _mm256_fmadd_pd(ps, z, _mm256_set1_pd(-1.66666666666666324348e-01));
  const __m256d sr = _mm256_fmadd_pd(_mm256_mul_pd(ps, z), r, r);

  __m256d pc = _mm256_set1_pd(-1.13596475577881948265e-11);
  pc = _mm256_fmadd_pd(pc, z, _mm256_set1_pd(2.08757232129817482790e-09));
  pc = _mm256_fmadd_pd(pc, z, _mm256_set1_pd(-2.75573143513906633035e-07));
  pc = _mm256_fmadd_pd(pc, z, _mm256_set1_pd(2.48015872894767294178e-05));
  pc = _mm256_fmadd_pd(pc, z, _mm256_set1_pd(-1.38888888888741095749e-03));
  pc = _mm256_fmadd_pd(pc, z, _mm256_set1_pd(4.16666666666666019037e-02));
  const __m256d z2 = _mm256_mul_pd(z, z);
  const __m256d cr = _mm256_fmadd_pd(pc, z2, _mm256_fnmadd_pd(_mm256_set1_pd(0.5), z, _mm256_set1_pd(1.0)));

  // Quadrant from the low bits of k.
  const __m128i ki = _mm256_cvtpd_epi32(k);
  const __m256i q = _mm256_cvtepi32_epi64(ki);
  const __m256i one = _mm256_set1_epi64x(1), two = _mm256_set1_epi64x(2);
  const __m256d swap = _mm256_castsi256_pd(_mm256_cmpeq_epi64(_mm256_and_si256(q, one), one));
  const __m256d sneg = _mm256_castsi256_pd(_mm256_cmpeq_epi64(_mm256_and_si256(q, two), two));
  const __m256i q1 = _mm256_add_epi64(q, one);
  const __m256d cneg = _mm256_castsi256_pd(_mm256_cmpeq_epi64(_mm256_and_si256(q1, two), two));
  const __m256d sign = _mm256_set1_pd(-0.0);
  s = _mm256_blendv_pd(sr, cr, swap);
  c = _mm256_blendv_pd(cr, sr, swap);
  s = _mm256_xor_pd(s, _mm256_and_pd(sneg, sign));
  c = _mm256_xor_pd(c, _mm256_and_pd(cneg, sign));
}

// Rotate four complex numbers held as (re, im) lanes by angle -theta.
__attribute__((target("avx2,fma"))) inline void rotate4(cplx* u, __m256d theta) {
  alignas(32) double th[4];
  _mm256_store_pd(th, theta);
  if (std::fabs(th[0]) > kMaxArg || std::fabs(th[1]) > kMaxArg || std::fabs(th[2]) > kMaxArg ||
      std::fabs(th[3]) > kMaxArg) {
    // Lane order of theta is (0, 2, 1, 3).
    const int idx[4] = {0, 2, 1, 3};
    for (int l = 0; l < 4; ++l) u[idx[l]] *= std::polar(1.0, -th[l]);
    return;
  }
  double* p = reinterpret_cast<double*>(u);
  const __m256d v0 = _mm256_loadu_pd(p), v1 = _mm256_loadu_pd(p + 4);
  const __m256d re = _mm256_unpacklo_pd(v0, v1), im = _mm256_unpackhi_pd(v0, v1);
  __m256d s, c;
  sincos4(theta, s, c);
  // (re + i im)(c - i s)
  const __m256d nre = _mm256_fmadd_pd(re, c, _mm256_mul_pd(im, s));
  const __m256d nim = _mm256_fmsub_pd(im, c, _mm256_mul_pd(re, s));
  _mm256_storeu_pd(p, _mm256_unpacklo_pd(nre, nim));
  _mm256_storeu_pd(p + 4, _mm256_unpackhi_pd(nre, nim));
}

__attribute__((target("avx2,fma"))) inline __m256d load_perm(const double* a) {
  return _mm256_permute4x64_pd(_mm256_loadu_pd(a), 0xD8);  // (0, 2, 1, 3)
}

__attribute__((target("avx2,fma"))) void nonlinear_phase(cplx* u, long n, double c, int p) {
  long j = 0;
  const __m256d cv = _mm256_set1_pd(c);
  for (; j + 4 <= n; j += 4) {
    const double* d = reinterpret_cast<const double*>(u + j);
    const __m256d v0 = _mm256_loadu_pd(d), v1 = _mm256_loadu_pd(d + 4);
    const __m256d re = _mm256_unpacklo_pd(v0, v1), im = _mm256_unpackhi_pd(v0, v1);
    const __m256d a2 = _mm256_fmadd_pd(re, re, _mm256_mul_pd(im, im));
    __m256d pw = _mm256_set1_pd(1.0);
    for (int k = 0; k < p / 2; ++k) pw = _mm256_mul_pd(pw, a2);
    rotate4(u + j, _mm256_mul_pd(cv, pw));
  }
  scalar::kernels.nonlinear_phase(u + j, n - j, c, p);
}

__attribute__((target("avx2,fma"))) void phase_multiply(cplx* a, const double* lam, long n, double t) {
  long j = 0;
  const __m256d tv = _mm256_set1_pd(t);
  for (; j + 4 <= n; j += 4) rotate4(a + j, _mm256_mul_pd(load_perm(lam + j), tv));
  scalar::kernels.phase_multiply(a + j, lam + j, n - j, t);
}

__attribute__((target("avx2,fma"))) void complex_multiply(cplx* a, const cplx* b, long n) {
  long j = 0;
  for (; j + 2 <= n; j += 2) {
    double* pa = reinterpret_cast<double*>(a + j);
    const double* pb = reinterpret_cast<const double*>(b + j);
    const __m256d x = _mm256_loadu_pd(pa), y = _mm256_loadu_pd(pb);
    const __m256d yre = _mm256_movedup_pd(y), yim = _mm256_permute_pd(y, 0xF);
    const __m256d xs = _mm256_permute_pd(x, 0x5);
    _mm256_storeu_pd(pa, _mm256_fmaddsub_pd(x, yre, _mm256_mul_pd(xs, yim)));
  }
  scalar::kernels.complex_multiply(a + j, b + j, n - j);
}

__attribute__((target("avx2,fma"))) double weighted_norm2(const cplx* u, const double* w, long n) {
  long j = 0;
  __m256d acc = _mm256_setzero_pd();
  for (; j + 4 <= n; j += 4) {
    const double* d = reinterpret_cast<const double*>(u + j);
    const __m256d v0 = _mm256_loadu_pd(d), v1 = _mm256_loadu_pd(d + 4);
    const __m256d re = _mm256_unpacklo_pd(v0, v1), im = _mm256_unpackhi_pd(v0, v1);
    const __m256d a2 = _mm256_fmadd_pd(re, re, _mm256_mul_pd(im, im));
    acc = _mm256_fmadd_pd(load_perm(w + j), a2, acc);
  }
  alignas(32) double t[4];
  _mm256_store_pd(t, acc);
  return (t[0] + t[1]) + (t[2] + t[3]) + scalar::kernels.weighted_norm2(u + j, w + j, n - j);
}

}  // namespace

const Kernels kernels{nonlinear_phase, phase_multiply, complex_multiply, weighted_norm2, "avx2"};

}  // namespace dnls::simd::avx2

#endif
