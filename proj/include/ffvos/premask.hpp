#pragma once

// Per-frame preliminary mask: the union of the top-k binarized proposals,
// plus one segment record per retained proposal for clustering.

#include <optional>
#include <span>
#include <vector>

#include "ffvos/core/raster.hpp"
#include "ffvos/ingest/io.hpp"

namespace ffvos::premask {

struct SegmentRecord {
  int frame_index = 0;
  /// Rank of the proposal within its frame (0 = highest objectness).
  int proposal_index = 0;
  BinaryMask mask;
  ingest::Descriptor descriptor;
  std::optional<int> cluster_label;
};

/// bit = 1 iff value >= tau. tau must lie in (0,1).
BinaryMask binarize(const SoftMask& m, double tau);

struct PreliminaryMask {
  BinaryMask mask;
  std::vector<SegmentRecord> records;
};

/// Keeps the min(k, available) best proposals, binarizes each at tau, drops
/// the ones that come out empty and returns their union with one record per
/// survivor. `descriptors` is indexed by manifest position. A frame whose
/// proposals are all empty yields an empty mask and no records.
PreliminaryMask preliminary_mask(const ingest::ProposalSet& ps,
                                 std::span<const ingest::Descriptor> descriptors, int k, double tau,
                                 int frame_width, int frame_height);

}  // namespace ffvos::premask
