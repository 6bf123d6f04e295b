#pragma once

// On-disk formats.
//
//   <seq>/frames/%05d.png|jpg          8-bit RGB frames
//   <seq>/proposals/%05d/manifest.json {"frame": i, "proposals": [{"mask": "m_00.png", "score": s}]}
//   <seq>/proposals/%05d/m_*.png       8-bit grayscale score maps, value/255
//   <seq>/features/%05d.feat           FEAT descriptor file (below)
//   <seq>/gt/%05d.png                  8-bit grayscale, nonzero = foreground
//
// FEAT: "FEAT", u32le count, u32le dim, then count*dim f32le values, row r is
// the descriptor of manifest entry r.

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ffvos/core/raster.hpp"

namespace ffvos::ingest {

namespace fs = std::filesystem;

struct Proposal {
  SoftMask score_map;
  double objectness = 0.0;
  /// Position in the manifest, which is also the row in the FEAT file.
  int manifest_index = 0;
};

/// Proposals of one frame, sorted by descending objectness.
struct ProposalSet {
  int frame_index = 0;
  std::vector<Proposal> proposals;
};

struct Descriptor {
  std::vector<double> values;

  std::size_t dim() const noexcept { return values.size(); }
  friend bool operator==(const Descriptor&, const Descriptor&) = default;
};

/// Paths of one sequence directory.
struct SequenceLayout {
  fs::path root;

  fs::path frames_dir() const { return root / "frames"; }
  fs::path proposals_dir() const { return root / "proposals"; }
  fs::path features_file(int frame) const;
  fs::path gt_dir() const { return root / "gt"; }
  std::string name() const { return root.filename().string(); }
};

/// "%05d" formatting used by every per-frame file.
std::string frame_stem(int frame);

/// Numbered image files (png/jpg/jpeg) in `dir`, ordered by numeric stem.
std::vector<fs::path> list_numbered_images(const fs::path& dir);

VideoSequence load_sequence(const fs::path& frames_dir);

ProposalSet load_proposal_set(const fs::path& proposals_dir, int frame,
                              std::optional<std::pair<int, int>> frame_size = std::nullopt);

std::vector<Descriptor> load_descriptor_file(const fs::path& path);

BinaryMask read_binary_mask(const fs::path& path);
SoftMask read_score_map(const fs::path& path);

void write_binary_mask(const BinaryMask& m, const fs::path& path);
void write_score_map(const SoftMask& m, const fs::path& path);
void write_frame(const Frame& f, const fs::path& path);

/// Writes manifest.json and the score maps ordered by manifest_index, so a
/// loaded set round-trips with the same manifest positions.
void write_proposal_set(const ProposalSet& ps, const fs::path& proposals_dir);

/// Values are stored as float32; descriptors loaded from a FEAT file
/// round-trip bit-exactly.
void write_descriptor_file(std::span<const Descriptor> descriptors, const fs::path& path);

}  // namespace ffvos::ingest
