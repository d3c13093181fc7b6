#include <cstdlib>
#include <stdexcept>
#include <string>

#include "hypokin/kernels.hpp"

namespace hypokin::kernels {

#if defined(HYPOKIN_HAVE_AVX2)
const KernelTable* avx2_table_unchecked();
#endif
#if defined(HYPOKIN_HAVE_NEON)
const KernelTable* neon_table_unchecked();
#endif

const KernelTable* avx2_table() {
#if defined(HYPOKIN_HAVE_AVX2)
  __builtin_cpu_init();
  if (__builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma")) {
    return avx2_table_unchecked();
  }
#endif
  return nullptr;
}

const KernelTable* neon_table() {
#if defined(HYPOKIN_HAVE_NEON)
  return neon_table_unchecked();
#else
  return nullptr;
#endif
}

namespace {

const KernelTable& select() {
  const char* env = std::getenv("HYPOKIN_SIMD");
  const std::string want = env ? env : "";
  if (want == "scalar") return scalar_table();
  if (want == "avx2" || want.empty()) {
    if (const KernelTable* t = avx2_table()) return *t;
    if (want == "avx2") throw std::runtime_error("HYPOKIN_SIMD=avx2 but AVX2/FMA is unavailable");
  }
  if (want == "neon" || want.empty()) {
    if (const KernelTable* t = neon_table()) return *t;
    if (want == "neon") throw std::runtime_error("HYPOKIN_SIMD=neon but NEON is unavailable");
  }
  if (!want.empty() && want != "avx2" && want != "neon") {
    throw std::runtime_error("unknown HYPOKIN_SIMD value '" + want + "'");
  }
  return scalar_table();
}

}  // namespace

const KernelTable& active() {
  static const KernelTable& table = select();
  return table;
}

std::string_view isa_name(Isa isa) {
  switch (isa) {
    case Isa::Scalar: return "scalar";
    case Isa::Avx2: return "avx2";
    case Isa::Neon: return "neon";
  }
  return "unknown";
}

}  // namespace hypokin::kernels
