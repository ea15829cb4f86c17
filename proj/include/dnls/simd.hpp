#pragma once

#include <complex>
#include <string>

// Pointwise kernels of the time stepper: scalar reference plus AVX2/NEON variants,
// chosen once at startup. DNLS_SIMD=scalar forces the reference path.

#if defined(__x86_64__) || defined(_M_X64)
#define DNLS_SIMD_X86 1
#endif
#if defined(__aarch64__) && defined(__ARM_NEON)
#define DNLS_SIMD_NEON 1
#endif

namespace dnls::simd {

using cplx = std::complex<double>;

struct Kernels {
  // u_j <- u_j exp(-i c |u_j|^p), p even.
  void (*nonlinear_phase)(cplx* u, long n, double c, int p);
  // a_j <- a_j exp(-i lam_j t).
  void (*phase_multiply)(cplx* a, const double* lam, long n, double t);
  // a_j <- a_j b_j.
  void (*complex_multiply)(cplx* a, const cplx* b, long n);
  // sum_j w_j |u_j|^2.
  double (*weighted_norm2)(const cplx* u, const double* w, long n);
  const char* name;
};

namespace scalar {
extern const Kernels kernels;
}
#ifdef DNLS_SIMD_X86
namespace avx2 {
extern const Kernels kernels;
bool supported();
}  // namespace avx2
#endif
#ifdef DNLS_SIMD_NEON
namespace neon {
extern const Kernels kernels;
}
#endif

const Kernels& active();
std::string active_name();

inline void nonlinear_phase(cplx* u, long n, double c, int p) { active().nonlinear_phase(u, n, c, p); }
inline void phase_multiply(cplx* a, const double* lam, long n, double t) { active().phase_multiply(a, lam, n, t); }
inline void complex_multiply(cplx* a, const cplx* b, long n) { active().complex_multiply(a, b, n); }
inline double weighted_norm2(const cplx* u, const double* w, long n) { return active().weighted_norm2(u, w, n); }

}  // namespace dnls::simd
