#pragma once

// Data-parallel inner loops used across the pipeline.
//
// Every kernel has a scalar reference implementation. Vectorized variants are
// compiled into separate translation units with their own ISA flags and are
// selected once at startup from the host CPU features. Setting the
// environment variable FFVOS_SIMD=scalar forces the reference path.
//
// Floating-point reductions in the vector variants sum in a different order
// than the scalar loop, so results agree to rounding, not bitwise. The
// integer kernel (mask_overlap) is exact on every path.

#include <cstddef>
#include <cstdint>
#include <string_view>

namespace ffvos::simd {

struct OverlapCounts {
  std::size_t intersection = 0;
  std::size_t uni = 0;

  friend bool operator==(const OverlapCounts&, const OverlapCounts&) = default;
};

/// Symmetric 3x3 matrix stored as (xx, xy, xz, yy, yz, zz).
using Sym3 = double[6];

struct KernelTable {
  std::string_view name;

  /// sum_i (a_i - b_i)^2
  double (*squared_distance)(const double* a, const double* b, std::size_t n);
  /// sum_i a_i * b_i
  double (*dot)(const double* a, const double* b, std::size_t n);
  /// y_i += alpha * x_i
  void (*axpy)(double alpha, const double* x, double* y, std::size_t n);
  /// out_i = (x_i - mean)^T A (x_i - mean) over planar RGB input.
  void (*quadratic_form3)(const double* r, const double* g, const double* b, std::size_t n,
                          const double* mean, const double* sym, double* out);
  /// out_i = |p_i - q_i|^2 for planar RGB rows p and q.
  void (*color_sqdiff)(const double* pr, const double* pg, const double* pb, const double* qr,
                       const double* qg, const double* qb, std::size_t n, double* out);
  /// Counts of (a && b) and (a || b) over byte masks (nonzero = set).
  OverlapCounts (*mask_overlap)(const std::uint8_t* a, const std::uint8_t* b, std::size_t n);
};

/// The table chosen for this process.
const KernelTable& kernels();

const KernelTable& scalar_kernels();

/// nullptr when the variant was not compiled in or the CPU lacks the ISA.
const KernelTable* avx2_kernels();

}  // namespace ffvos::simd
