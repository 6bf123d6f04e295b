#pragma once

// Track-and-fill for frames where the foreground cluster has no segment.

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "ffvos/core/raster.hpp"
#include "ffvos/track.hpp"
#include "ffvos/transfer/grabcut.hpp"

namespace ffvos::transfer {

/// Ascending indices of frames whose mask is absent or empty. Throws
/// PipelineError("unfillable_sequence") when no frame is detected.
std::vector<int> find_undetected(std::span<const std::optional<BinaryMask>> masks);

/// The min(p, |detected|) detected frames closest to x, sorted by distance
/// and then by index (so the earlier frame wins a tie).
std::vector<int> nearest_detected(int x, std::span<const int> detected, int p);

struct Donor {
  BinaryMask mask;
  BoundingBox box;
};

/// Crops every donor to its box, resizes it (nearest neighbour) to the target
/// size and averages. Empty donors are skipped; throws
/// PipelineError("unfillable_frame") if none remain.
SoftMask build_soft_mask(std::span<const Donor> donors, const BoundingBox& target);

struct FillOutcome {
  int frame = 0;
  /// Donor frame the window was tracked from.
  int source_frame = 0;
  std::vector<int> donors;
  BoundingBox window;
  BinaryMask mask;
  bool fell_back = false;
  int rounds = 0;
  double track_seconds = 0.0;
  double transfer_seconds = 0.0;
};

/// Fills every undetected frame from the detected ones. Only originally
/// detected frames act as donors. Each frame uses seed + frame index, so the
/// result does not depend on `jobs`. Outcomes are ordered by distance to the
/// nearest donor, then frame index.
std::vector<FillOutcome> fill_undetected(const VideoSequence& seq,
                                         std::span<const std::optional<BinaryMask>> masks,
                                         const track::Tracker& tracker, const GrabCutParams& params,
                                         std::uint64_t seed, int jobs = 1);

}  // namespace ffvos::transfer
