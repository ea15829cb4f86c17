#include <cstdlib>
#include <cstring>

#include "dnls/simd.hpp"

namespace dnls::simd {

namespace {
const Kernels& choose() {
  const char* env = std::getenv("DNLS_SIMD");
  if (env && std::strcmp(env, "scalar") == 0) return scalar::kernels;
#ifdef DNLS_SIMD_X86
  if (avx2::supported()) return avx2::kernels;
#endif
#ifdef DNLS_SIMD_NEON
  return neon::kernels;
#endif
  return scalar::kernels;
}
}  // namespace

const Kernels& active() {
  static const Kernels& k = choose();
  return k;
}

std::string active_name() { return active().name; }

}  // namespace dnls::simd
