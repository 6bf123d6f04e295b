#pragma once

// Region similarity (Jaccard) and its per-dataset aggregates.

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "ffvos/core/raster.hpp"

namespace ffvos::metrics {

/// |m & g| / |m | g|; 1 when both are empty. Throws InvalidInput on a size mismatch.
double jaccard(const BinaryMask& m, const BinaryMask& g);

struct SequenceScores {
  std::string name;
  std::vector<double> per_frame_j;
};

struct EvalReport {
  std::vector<SequenceScores> sequences;
};

enum class RecallMode {
  /// Per sequence, the fraction of frames with J > tau; averaged over sequences.
  frame,
  /// Fraction of sequences whose mean J exceeds tau.
  sequence,
};

std::string_view to_string(RecallMode m);
/// Accepts "frame" and "sequence". Throws ConfigError.
RecallMode parse_recall_mode(std::string_view s);

/// Mean over sequences of the per-sequence mean J. Throws InvalidInput when
/// the report or any sequence is empty.
double j_mean(const EvalReport& r);

double j_recall(const EvalReport& r, double tau = 0.5, RecallMode mode = RecallMode::frame);

/// Per sequence, the mean of the first quarter of frames minus the mean of
/// the last quarter (bins differ by at most one frame, earlier bins take the
/// remainder), averaged over sequences. Throws InvalidInput for a sequence
/// shorter than 4 frames.
double j_decay(const EvalReport& r);

/// Start offsets of the four bins plus the end, e.g. 6 frames -> {0,2,4,5,6}.
std::vector<std::size_t> decay_bins(std::size_t n);

nlohmann::json report_json(const EvalReport& r, double tau, RecallMode mode);
/// One row per sequence: name,frames,j_mean,j_recall,j_decay.
std::string report_csv(const EvalReport& r, double tau, RecallMode mode);

void write_report(const EvalReport& r, double tau, RecallMode mode,
                  const std::filesystem::path& json_path, const std::filesystem::path& csv_path);

}  // namespace ffvos::metrics
