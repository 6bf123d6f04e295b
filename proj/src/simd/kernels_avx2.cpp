// AVX2 variants. This file is compiled with -mavx2 and must only be entered
// after the runtime CPU check in dispatch.cpp. FMA is deliberately not
// enabled so the element-wise kernels round exactly like the scalar ones.

#include <immintrin.h>

#include "kernels_impl.hpp"

namespace ffvos::simd::avx2 {
namespace {

inline double hsum(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d s = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

}  // namespace

double squared_distance(const double* a, const double* b, std::size_t n) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    const __m256d d0 = _mm256_sub_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i));
    const __m256d d1 = _mm256_sub_pd(_mm256_loadu_pd(a + i + 4), _mm256_loadu_pd(b + i + 4));
    acc0 = _mm256_add_pd(acc0, _mm256_mul_pd(d0, d0));
    acc1 = _mm256_add_pd(acc1, _mm256_mul_pd(d1, d1));
  }
  for (; i + 4 <= n; i += 4) {
    const __m256d d = _mm256_sub_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i));
    acc0 = _mm256_add_pd(acc0, _mm256_mul_pd(d, d));
  }
  double s = hsum(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

double dot(const double* a, const double* b, std::size_t n) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    acc0 = _mm256_add_pd(acc0, _mm256_mul_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
    acc1 = _mm256_add_pd(acc1,
                         _mm256_mul_pd(_mm256_loadu_pd(a + i + 4), _mm256_loadu_pd(b + i + 4)));
  }
  for (; i + 4 <= n; i += 4) {
    acc0 = _mm256_add_pd(acc0, _mm256_mul_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
  }
  double s = hsum(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) s += a[i] * b[i];
  return s;
}

void axpy(double alpha, const double* x, double* y, std::size_t n) {
  const __m256d va = _mm256_set1_pd(alpha);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d vy = _mm256_add_pd(_mm256_loadu_pd(y + i),
                                     _mm256_mul_pd(va, _mm256_loadu_pd(x + i)));
    _mm256_storeu_pd(y + i, vy);
  }
  for (; i < n; ++i) y[i] += alpha * x[i];
}

void quadratic_form3(const double* r, const double* g, const double* b, std::size_t n,
                     const double* mean, const double* sym, double* out) {
  const __m256d mx = _mm256_set1_pd(mean[0]);
  const __m256d my = _mm256_set1_pd(mean[1]);
  const __m256d mz = _mm256_set1_pd(mean[2]);
  const __m256d axx = _mm256_set1_pd(sym[0]), axy = _mm256_set1_pd(sym[1]);
  const __m256d axz = _mm256_set1_pd(sym[2]), ayy = _mm256_set1_pd(sym[3]);
  const __m256d ayz = _mm256_set1_pd(sym[4]), azz = _mm256_set1_pd(sym[5]);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d dx = _mm256_sub_pd(_mm256_loadu_pd(r + i), mx);
    const __m256d dy = _mm256_sub_pd(_mm256_loadu_pd(g + i), my);
    const __m256d dz = _mm256_sub_pd(_mm256_loadu_pd(b + i), mz);
    // Same association as the scalar loop: ((a*dx + b*dy) + c*dz).
    const __m256d rx = _mm256_add_pd(_mm256_add_pd(_mm256_mul_pd(axx, dx), _mm256_mul_pd(axy, dy)),
                                     _mm256_mul_pd(axz, dz));
    const __m256d ry = _mm256_add_pd(_mm256_add_pd(_mm256_mul_pd(axy, dx), _mm256_mul_pd(ayy, dy)),
                                     _mm256_mul_pd(ayz, dz));
    const __m256d rz = _mm256_add_pd(_mm256_add_pd(_mm256_mul_pd(axz, dx), _mm256_mul_pd(ayz, dy)),
                                     _mm256_mul_pd(azz, dz));
    const __m256d q = _mm256_add_pd(_mm256_add_pd(_mm256_mul_pd(dx, rx), _mm256_mul_pd(dy, ry)),
                                    _mm256_mul_pd(dz, rz));
    _mm256_storeu_pd(out + i, q);
  }
  if (i < n) scalar::quadratic_form3(r + i, g + i, b + i, n - i, mean, sym, out + i);
}

void color_sqdiff(const double* pr, const double* pg, const double* pb, const double* qr,
                  const double* qg, const double* qb, std::size_t n, double* out) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d dr = _mm256_sub_pd(_mm256_loadu_pd(pr + i), _mm256_loadu_pd(qr + i));
    const __m256d dg = _mm256_sub_pd(_mm256_loadu_pd(pg + i), _mm256_loadu_pd(qg + i));
    const __m256d db = _mm256_sub_pd(_mm256_loadu_pd(pb + i), _mm256_loadu_pd(qb + i));
    const __m256d s = _mm256_add_pd(_mm256_add_pd(_mm256_mul_pd(dr, dr), _mm256_mul_pd(dg, dg)),
                                    _mm256_mul_pd(db, db));
    _mm256_storeu_pd(out + i, s);
  }
  if (i < n) scalar::color_sqdiff(pr + i, pg + i, pb + i, qr + i, qg + i, qb + i, n - i, out + i);
}

OverlapCounts mask_overlap(const std::uint8_t* a, const std::uint8_t* b, std::size_t n) {
  const __m256i zero = _mm256_setzero_si256();
  std::size_t inter = 0;
  std::size_t uni = 0;
  std::size_t i = 0;
  for (; i + 32 <= n; i += 32) {
    const __m256i va = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(a + i));
    const __m256i vb = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(b + i));
    // Bit set in the movemask where the byte is zero.
    const unsigned za = static_cast<unsigned>(_mm256_movemask_epi8(_mm256_cmpeq_epi8(va, zero)));
    const unsigned zb = static_cast<unsigned>(_mm256_movemask_epi8(_mm256_cmpeq_epi8(vb, zero)));
    inter += static_cast<std::size_t>(__builtin_popcount(~za & ~zb));
    uni += static_cast<std::size_t>(__builtin_popcount(~(za & zb)));
  }
  const OverlapCounts tail = scalar::mask_overlap(a + i, b + i, n - i);
  return {inter + tail.intersection, uni + tail.uni};
}

}  // namespace ffvos::simd::avx2
