#include "ffvos/cluster.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <string>

#include "ffvos/core/error.hpp"
#include "ffvos/core/parallel.hpp"
#include "ffvos/simd/kernels.hpp"

namespace ffvos::cluster {
namespace {

// Row-major copy of the points.
struct PointMatrix {
  std::size_t rows = 0;
  std::size_t dim = 0;
  std::vector<double> data;

  const double* row(std::size_t i) const { return data.data() + i * dim; }
};

PointMatrix pack(std::span<const Descriptor> points) {
  PointMatrix m;
  m.rows = points.size();
  m.dim = points.empty() ? 0 : points[0].dim();
  m.data.reserve(m.rows * m.dim);
  for (const auto& p : points) {
    if (p.dim() != m.dim) throw InvalidInput("mean_shift: descriptors differ in dimension");
    m.data.insert(m.data.end(), p.values.begin(), p.values.end());
  }
  return m;
}

std::size_t min_size(double frac, std::size_t total) {
  // The epsilon absorbs representation error such as 0.6 * 40 = 24.000000000000004.
  return static_cast<std::size_t>(std::max(0.0, std::ceil(frac * static_cast<double>(total) - 1e-9)));
}

}  // namespace

Descriptor l2_normalize(const Descriptor& v) {
  const double sq = simd::kernels().dot(v.values.data(), v.values.data(), v.dim());
  if (!(sq > 0.0) || !std::isfinite(sq)) {
    throw NormalizationError("l2_normalize: descriptor has zero or non-finite norm");
  }
  const double norm = std::sqrt(sq);
  Descriptor out{v.values};
  for (auto& x : out.values) x /= norm;
  return out;
}

double auto_bandwidth(std::span<const Descriptor> points, double scale) {
  const PointMatrix m = pack(points);
  const auto& k = simd::kernels();
  std::vector<double> dists;
  dists.reserve(m.rows * (m.rows - (m.rows > 0 ? 1 : 0)) / 2);
  for (std::size_t i = 0; i < m.rows; ++i) {
    for (std::size_t j = i + 1; j < m.rows; ++j) {
      dists.push_back(std::sqrt(k.squared_distance(m.row(i), m.row(j), m.dim)));
    }
  }
  if (dists.empty()) return 0.5;
  const std::size_t mid = dists.size() / 2;
  std::nth_element(dists.begin(), dists.begin() + mid, dists.end());
  double median = dists[mid];
  if (dists.size() % 2 == 0) {
    median = 0.5 * (median + *std::max_element(dists.begin(), dists.begin() + mid));
  }
  return median > 0.0 ? scale * median : 0.5;
}

ClusterAssignment mean_shift(std::span<const Descriptor> points, const MeanShiftParams& params) {
  if (points.empty()) throw InvalidInput("mean_shift: no points");
  if (!(params.bandwidth > 0.0)) throw InvalidInput("mean_shift: bandwidth must be > 0");
  const PointMatrix m = pack(points);
  const auto& k = simd::kernels();
  const double h2 = params.bandwidth * params.bandwidth;

  std::vector<double> converged(m.rows * m.dim);
  parallel_for(m.rows, params.jobs, [&](std::size_t i) {
    std::vector<double> y(m.row(i), m.row(i) + m.dim);
    std::vector<double> sum(m.dim);
    for (int iter = 0; iter < params.max_iter; ++iter) {
      std::fill(sum.begin(), sum.end(), 0.0);
      std::size_t count = 0;
      for (std::size_t j = 0; j < m.rows; ++j) {
        if (k.squared_distance(y.data(), m.row(j), m.dim) <= h2) {
          k.axpy(1.0, m.row(j), sum.data(), m.dim);
          ++count;
        }
      }
      if (count == 0) break;
      for (auto& s : sum) s /= static_cast<double>(count);
      const double shift2 = k.squared_distance(sum.data(), y.data(), m.dim);
      y.swap(sum);
      if (std::sqrt(shift2) < params.tol) break;
    }
    std::copy(y.begin(), y.end(), converged.begin() + static_cast<std::ptrdiff_t>(i * m.dim));
  });

  ClusterAssignment out;
  out.bandwidth = params.bandwidth;
  out.labels.resize(m.rows);
  const double merge2 = 0.25 * h2;
  for (std::size_t i = 0; i < m.rows; ++i) {
    const double* y = converged.data() + i * m.dim;
    int label = -1;
    for (std::size_t c = 0; c < out.modes.size(); ++c) {
      if (k.squared_distance(y, out.modes[c].data(), m.dim) < merge2) {
        label = static_cast<int>(c);
        break;
      }
    }
    if (label < 0) {
      label = static_cast<int>(out.modes.size());
      out.modes.emplace_back(y, y + m.dim);
    }
    out.labels[i] = label;
  }
  return out;
}

std::optional<int> select_foreground(const ClusterAssignment& assign,
                                     std::span<const SegmentRecord> records, int frame_count,
                                     double min_frac, MinSizeMode mode) {
  if (assign.labels.size() != records.size()) {
    throw InvalidInput("select_foreground: assignment and records are not index-aligned");
  }
  const int clusters = assign.cluster_count();
  std::vector<std::size_t> members(clusters, 0);
  std::vector<std::set<int>> frames(clusters);
  for (std::size_t i = 0; i < records.size(); ++i) {
    const int c = assign.labels[i];
    if (c < 0 || c >= clusters) throw InvalidInput("select_foreground: label out of range");
    ++members[c];
    frames[c].insert(records[i].frame_index);
  }

  const std::size_t threshold = mode == MinSizeMode::frames
                                    ? min_size(min_frac, static_cast<std::size_t>(frame_count))
                                    : min_size(min_frac, records.size());
  std::optional<int> best;
  for (int c = 0; c < clusters; ++c) {
    const std::size_t size = mode == MinSizeMode::frames ? frames[c].size() : members[c];
    if (size < threshold) continue;
    if (!best || members[c] > members[*best]) best = c;
  }
  return best;
}

void apply_labels(const ClusterAssignment& assign, std::span<SegmentRecord> records) {
  if (assign.labels.size() != records.size()) {
    throw InvalidInput("apply_labels: assignment and records are not index-aligned");
  }
  for (std::size_t i = 0; i < records.size(); ++i) records[i].cluster_label = assign.labels[i];
}

std::vector<std::optional<BinaryMask>> cluster_masks(std::span<const SegmentRecord> records, int fg,
                                                     int frame_count) {
  std::vector<std::optional<BinaryMask>> out(frame_count);
  for (const auto& r : records) {
    if (r.cluster_label != fg) continue;
    if (r.frame_index < 0 || r.frame_index >= frame_count) {
      throw InvalidInput("cluster_masks: record frame " + std::to_string(r.frame_index) +
                         " out of range");
    }
    auto& slot = out[r.frame_index];
    slot = slot ? mask_union(*slot, r.mask) : r.mask;
  }
  return out;
}

}  // namespace ffvos::cluster
