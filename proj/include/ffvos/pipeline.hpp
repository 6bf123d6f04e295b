#pragma once

// End-to-end orchestration: premask -> cluster -> track + transfer -> masks
// on disk, plus evaluation against ground truth.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "ffvos/cluster.hpp"
#include "ffvos/ingest/io.hpp"
#include "ffvos/metrics.hpp"
#include "ffvos/premask.hpp"
#include "ffvos/track.hpp"
#include "ffvos/transfer/grabcut.hpp"

namespace ffvos::pipeline {

namespace fs = std::filesystem;

struct PipelineConfig {
  int k = 5;
  double tau_binarize = 0.2;
  double min_frac = 0.6;
  cluster::MinSizeMode min_size_mode = cluster::MinSizeMode::frames;
  /// Absent = bandwidth_scale * median pairwise descriptor distance.
  std::optional<double> bandwidth;
  double bandwidth_scale = 0.7;
  /// grabcut.p is the donor count.
  transfer::GrabCutParams grabcut;
  std::string tracker_name = "ncc";
  track::TrackerParams tracker;
  std::uint64_t seed = 0;
  metrics::RecallMode recall_mode = metrics::RecallMode::frame;
  double tau_recall = 0.5;
  bool exclude_endpoints = false;
  int jobs = 1;

  /// Throws ConfigError.
  void validate() const;

  /// Values in `j` replace those of `base`. Unknown keys are rejected with
  /// ConfigError.
  static PipelineConfig from_json(const nlohmann::json& j, PipelineConfig base);
  static PipelineConfig from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
};

PipelineConfig load_config(const fs::path& path);

/// Everything read from one sequence directory.
struct SequenceData {
  std::string name;
  VideoSequence video;
  std::vector<ingest::ProposalSet> proposals;
  /// Per frame, in manifest order.
  std::vector<std::vector<ingest::Descriptor>> descriptors;
};

/// Throws IngestError.
SequenceData load_sequence_data(const fs::path& seq_dir);

struct ClusterStage {
  std::vector<premask::PreliminaryMask> premasks;
  /// All records with normalized descriptors and cluster labels.
  std::vector<premask::SegmentRecord> records;
  cluster::ClusterAssignment assignment;
  std::optional<int> foreground;
  std::vector<double> premask_seconds;
  double cluster_seconds = 0.0;
};

/// Premask and clustering for one sequence; does not fail when no
/// foreground cluster qualifies (foreground is then empty).
ClusterStage run_cluster_stage(const SequenceData& data, const PipelineConfig& cfg, int jobs);

/// Sequence directories under `root`: root itself when it holds a frames/
/// directory, otherwise every subdirectory that does, sorted by name.
std::vector<fs::path> discover_sequences(const fs::path& root);

/// Runs every sequence under input_root, writing <output_root>/<name>/%05d.png
/// and <output_root>/summary.json. A failing sequence is recorded in the
/// summary and does not stop the others. Returns the summary.
nlohmann::json run_pipeline(const PipelineConfig& cfg, const fs::path& input_root,
                            const fs::path& output_root);

/// Scores predictions <pred_root>/<name>/%05d.png against every ground-truth
/// sequence under gt_root (masks in <gt_root>/<name>/gt/ or <gt_root>/<name>/).
/// Missing predictions count as empty masks.
metrics::EvalReport evaluate(const fs::path& pred_root, const fs::path& gt_root,
                             const PipelineConfig& cfg);

/// Cluster assignment of one sequence as JSON.
nlohmann::json cluster_dump(const PipelineConfig& cfg, const fs::path& seq_dir);

/// Copy of `j` without any "timing" members, for comparing runs.
nlohmann::json strip_timing(const nlohmann::json& j);

}  // namespace ffvos::pipeline
