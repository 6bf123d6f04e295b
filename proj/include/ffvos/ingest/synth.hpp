#pragma once

// Fully synthetic test sequences: a textured static background with one moving
// textured rectangle, ranked proposals (a jittered copy of the object plus
// distractor blobs) and unit-sphere descriptors. The object proposal's
// descriptors come from one tight cluster; distractors draw from a pool of
// other clusters, each capped below half the frame count.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "ffvos/core/raster.hpp"
#include "ffvos/ingest/io.hpp"

namespace ffvos::ingest {

struct SynthConfig {
  std::string name = "synth";
  int frames = 40;
  int width = 96;
  int height = 96;
  /// floor(frames * drop_fraction) frames lose their object proposal.
  double drop_fraction = 0.2;
  /// Overrides drop_fraction with an explicit frame list.
  std::optional<std::vector<int>> dropped;

  double object_width_frac = 0.35;
  double object_height_frac = 0.4;
  /// Pixels per frame. Motion reflects off the frame borders.
  double velocity_x = 1.5;
  double velocity_y = 1.0;
  /// Max per-edge displacement of the object proposal, in pixels.
  int jitter_px = 1;

  int distractors = 4;
  int distractor_clusters = 16;
  int descriptor_dim = 64;
  double descriptor_sigma = 0.02;

  /// Throws ConfigError.
  void validate() const;
};

struct SynthCase {
  VideoSequence sequence;
  std::vector<BinaryMask> ground_truth;
  /// Exact object rectangle per frame.
  std::vector<BoundingBox> object_boxes;
  /// Sorted by objectness; manifest_index gives the manifest/FEAT row.
  std::vector<ProposalSet> proposals;
  /// Per frame, in manifest order.
  std::vector<std::vector<Descriptor>> descriptors;
  std::vector<int> dropped_frames;

  friend bool operator==(const SynthCase&, const SynthCase&);
};

bool operator==(const Proposal& a, const Proposal& b);
bool operator==(const ProposalSet& a, const ProposalSet& b);

SynthCase generate_synthetic_case(const SynthConfig& cfg, std::uint64_t seed);

/// Writes the case in the on-disk sequence layout under root/<cfg.name> and
/// returns that directory. A synth.json sidecar records the dropped frames.
fs::path write_synthetic_case(const SynthCase& c, const fs::path& root);

}  // namespace ffvos::ingest
