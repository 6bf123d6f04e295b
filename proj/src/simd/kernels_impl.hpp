#pragma once

#include "ffvos/simd/kernels.hpp"

namespace ffvos::simd {

#define FFVOS_DECLARE_KERNELS                                                              \
  double squared_distance(const double* a, const double* b, std::size_t n);                \
  double dot(const double* a, const double* b, std::size_t n);                             \
  void axpy(double alpha, const double* x, double* y, std::size_t n);                      \
  void quadratic_form3(const double* r, const double* g, const double* b, std::size_t n,   \
                       const double* mean, const double* sym, double* out);                \
  void color_sqdiff(const double* pr, const double* pg, const double* pb, const double* qr, \
                    const double* qg, const double* qb, std::size_t n, double* out);       \
  OverlapCounts mask_overlap(const std::uint8_t* a, const std::uint8_t* b, std::size_t n);

namespace scalar {
FFVOS_DECLARE_KERNELS
}

#if defined(FFVOS_HAVE_AVX2)
namespace avx2 {
FFVOS_DECLARE_KERNELS
}
#endif

#undef FFVOS_DECLARE_KERNELS

}  // namespace ffvos::simd
