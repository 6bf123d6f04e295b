#include "kernels_impl.hpp"

namespace ffvos::simd::scalar {

double squared_distance(const double* a, const double* b, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

double dot(const double* a, const double* b, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
  return s;
}

void axpy(double alpha, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

void quadratic_form3(const double* r, const double* g, const double* b, std::size_t n,
                     const double* mean, const double* sym, double* out) {
  const double axx = sym[0], axy = sym[1], axz = sym[2];
  const double ayy = sym[3], ayz = sym[4], azz = sym[5];
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = r[i] - mean[0];
    const double dy = g[i] - mean[1];
    const double dz = b[i] - mean[2];
    out[i] = dx * (axx * dx + axy * dy + axz * dz) + dy * (axy * dx + ayy * dy + ayz * dz) +
             dz * (axz * dx + ayz * dy + azz * dz);
  }
}

void color_sqdiff(const double* pr, const double* pg, const double* pb, const double* qr,
                  const double* qg, const double* qb, std::size_t n, double* out) {
  for (std::size_t i = 0; i < n; ++i) {
    const double dr = pr[i] - qr[i];
    const double dg = pg[i] - qg[i];
    const double db = pb[i] - qb[i];
    out[i] = dr * dr + dg * dg + db * db;
  }
}

OverlapCounts mask_overlap(const std::uint8_t* a, const std::uint8_t* b, std::size_t n) {
  OverlapCounts c;
  for (std::size_t i = 0; i < n; ++i) {
    const bool x = a[i] != 0;
    const bool y = b[i] != 0;
    c.intersection += (x && y) ? 1 : 0;
    c.uni += (x || y) ? 1 : 0;
  }
  return c;
}

}  // namespace ffvos::simd::scalar
