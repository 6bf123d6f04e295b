#include <cstdlib>
#include <string_view>

#include <spdlog/spdlog.h>

#include "kernels_impl.hpp"

namespace ffvos::simd {
namespace {

constexpr KernelTable kScalar{
    "scalar",          scalar::squared_distance, scalar::dot,          scalar::axpy,
    scalar::quadratic_form3, scalar::color_sqdiff, scalar::mask_overlap,
};

#if defined(FFVOS_HAVE_AVX2)
constexpr KernelTable kAvx2{
    "avx2",          avx2::squared_distance, avx2::dot,          avx2::axpy,
    avx2::quadratic_form3, avx2::color_sqdiff, avx2::mask_overlap,
};
#endif

bool cpu_has_avx2() {
#if defined(FFVOS_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") != 0;
#else
  return false;
#endif
}

const KernelTable& select() {
  const char* env = std::getenv("FFVOS_SIMD");
  const std::string_view request = env ? env : "auto";
  if (request == "scalar") return kScalar;
  if (const KernelTable* v = avx2_kernels()) return *v;
  if (request == "avx2") spdlog::warn("FFVOS_SIMD=avx2 requested but unavailable; using scalar");
  return kScalar;
}

}  // namespace

const KernelTable& scalar_kernels() { return kScalar; }

const KernelTable* avx2_kernels() {
#if defined(FFVOS_HAVE_AVX2)
  static const bool ok = cpu_has_avx2();
  return ok ? &kAvx2 : nullptr;
#else
  return nullptr;
#endif
}

const KernelTable& kernels() {
  static const KernelTable& table = select();
  return table;
}

}  // namespace ffvos::simd
