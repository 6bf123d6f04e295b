#pragma once

// Mean-shift grouping of segment descriptors and foreground cluster selection.

#include <optional>
#include <span>
#include <vector>

#include "ffvos/core/raster.hpp"
#include "ffvos/ingest/io.hpp"
#include "ffvos/premask.hpp"

namespace ffvos::cluster {

using ingest::Descriptor;
using premask::SegmentRecord;

struct ClusterAssignment {
  /// labels[i] indexes modes for input point i.
  std::vector<int> labels;
  std::vector<std::vector<double>> modes;
  double bandwidth = 0.0;

  int cluster_count() const noexcept { return static_cast<int>(modes.size()); }
};

struct MeanShiftParams {
  double bandwidth = 0.0;
  double tol = 1e-3;
  int max_iter = 300;
  /// Worker threads for the per-point iterations; results do not depend on it.
  int jobs = 1;
};

/// Throws NormalizationError on a zero vector.
Descriptor l2_normalize(const Descriptor& v);

/// scale * median pairwise Euclidean distance. Falls back to 0.5 when there
/// are fewer than two points or the median is zero.
double auto_bandwidth(std::span<const Descriptor> points, double scale = 0.7);

/// Flat-kernel mean shift. Each point moves to the mean of the points within
/// distance h of its current position until the shift drops below tol or
/// max_iter is reached. Converged positions closer than h/2 to an existing
/// mode join it; modes are numbered in order of first appearance.
ClusterAssignment mean_shift(std::span<const Descriptor> points, const MeanShiftParams& params);

enum class MinSizeMode {
  /// Cluster must span at least ceil(min_frac * N) distinct frames.
  frames,
  /// Cluster must hold at least ceil(min_frac * records) members.
  records,
};

/// Among clusters meeting the minimum size, the one with the most members;
/// ties go to the lowest id. Returns nullopt when no cluster qualifies.
std::optional<int> select_foreground(const ClusterAssignment& assign,
                                     std::span<const SegmentRecord> records, int frame_count,
                                     double min_frac, MinSizeMode mode = MinSizeMode::frames);

/// Copies assign.labels into the records' cluster_label fields.
void apply_labels(const ClusterAssignment& assign, std::span<SegmentRecord> records);

/// Per frame, the union of that frame's records labelled `fg`; frames without
/// such a record are nullopt.
std::vector<std::optional<BinaryMask>> cluster_masks(std::span<const SegmentRecord> records, int fg,
                                                     int frame_count);

}  // namespace ffvos::cluster
