#include <doctest.h>

#include <random>
#include <vector>

#include "dnls/simd.hpp"

using namespace dnls;
using cplx = std::complex<double>;
using CVec = std::vector<cplx>;
using RVec = std::vector<double>;

namespace {

std::vector<const simd::Kernels*> variants() {
  std::vector<const simd::Kernels*> v;
#ifdef DNLS_SIMD_X86
  if (simd::avx2::supported()) v.push_back(&simd::avx2::kernels);
#endif
#ifdef DNLS_SIMD_NEON
  v.push_back(&simd::neon::kernels);
#endif
  return v;
}

CVec random_vec(long n, std::mt19937_64& rng) {
  std::normal_distribution<double> d;
  CVec v(n);
  for (auto& c : v) c = cplx(d(rng), d(rng));
  return v;
}

double max_diff(const CVec& a, const CVec& b) {
  double m = 0;
  for (size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

}  // namespace

TEST_CASE("scalar kernels match their definitions") {
  std::mt19937_64 rng(1);
  CVec u = random_vec(37, rng), ref = u;
  simd::scalar::kernels.nonlinear_phase(u.data(), 37, 0.3, 4);
  for (size_t i = 0; i < u.size(); ++i) {
    const double a = std::abs(ref[i]);
    CHECK(std::abs(u[i] - ref[i] * std::exp(cplx(0, -0.3 * a * a * a * a))) < 1e-13);
  }
  RVec lam(37), w(37);
  for (int i = 0; i < 37; ++i) lam[i] = 0.1 * i, w[i] = 1.0 + i;
  CVec a = ref;
  simd::scalar::kernels.phase_multiply(a.data(), lam.data(), 37, 2.0);
  for (int i = 0; i < 37; ++i) CHECK(std::abs(a[i] - ref[i] * std::exp(cplx(0, -lam[i] * 2.0))) < 1e-13);
  double s = 0;
  for (int i = 0; i < 37; ++i) s += w[i] * std::norm(ref[i]);
  CHECK(simd::scalar::kernels.weighted_norm2(ref.data(), w.data(), 37) == doctest::Approx(s).epsilon(1e-14));
}

TEST_CASE("vector kernels agree with the scalar reference") {
  const auto vs = variants();
  if (vs.empty()) {
    MESSAGE("no vector variant available on this CPU; scalar only");
    return;
  }
  std::mt19937_64 rng(2);
  for (const auto* k : vs) {
    INFO(k->name);
    for (long n : {0L, 1L, 3L, 4L, 7L, 64L, 1023L}) {
      const CVec base = random_vec(n, rng);
      for (int p : {4, 6, 8}) {
        CVec a = base, b = base;
        simd::scalar::kernels.nonlinear_phase(a.data(), n, 0.7, p);
        k->nonlinear_phase(b.data(), n, 0.7, p);
        // The phase 0.7 |u|^p is itself only known to a few ulps of its size.
        double worst = 0;
        for (long i = 0; i < n; ++i) {
          const double m = std::abs(base[i]);
          worst = std::max(worst, std::abs(a[i] - b[i]) / (m * (1 + 0.7 * std::pow(m, p))));
        }
        CHECK(worst < 1e-14);
      }
      RVec lam(n), w(n);
      std::uniform_real_distribution<double> u(0, 500);
      for (long i = 0; i < n; ++i) lam[i] = u(rng), w[i] = u(rng) / 500;
      CVec a = base, b = base;
      simd::scalar::kernels.phase_multiply(a.data(), lam.data(), n, 1e-3);
      k->phase_multiply(b.data(), lam.data(), n, 1e-3);
      CHECK(max_diff(a, b) < 1e-12);
      const CVec m = random_vec(n, rng);
      a = base, b = base;
      simd::scalar::kernels.complex_multiply(a.data(), m.data(), n);
      k->complex_multiply(b.data(), m.data(), n);
      CHECK(max_diff(a, b) < 1e-12);
      const double s1 = simd::scalar::kernels.weighted_norm2(base.data(), w.data(), n);
      const double s2 = k->weighted_norm2(base.data(), w.data(), n);
      CHECK(std::abs(s1 - s2) <= 1e-13 * std::max(1.0, s1));
    }
  }
}

TEST_CASE("runtime dispatch names a known variant") {
  const std::string name = simd::active_name();
  CHECK((name == "scalar" || name == "avx2" || name == "neon"));
}
