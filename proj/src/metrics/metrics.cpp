#include "ffvos/metrics.hpp"

#include <cstdio>
#include <fstream>
#include <numeric>

#include "ffvos/core/error.hpp"
#include "ffvos/simd/kernels.hpp"

namespace ffvos::metrics {
namespace {

double mean(const std::vector<double>& v, std::size_t begin, std::size_t end) {
  double s = 0.0;
  for (std::size_t i = begin; i < end; ++i) s += v[i];
  return s / static_cast<double>(end - begin);
}

void require_frames(const EvalReport& r) {
  if (r.sequences.empty()) throw InvalidInput("metrics: report has no sequences");
  for (const auto& s : r.sequences) {
    if (s.per_frame_j.empty()) throw InvalidInput("metrics: sequence '" + s.name + "' has no frames");
  }
}

double sequence_recall(const SequenceScores& s, double tau) {
  std::size_t above = 0;
  for (double j : s.per_frame_j) above += j > tau ? 1 : 0;
  return static_cast<double>(above) / static_cast<double>(s.per_frame_j.size());
}

double sequence_decay(const SequenceScores& s) {
  const auto bins = decay_bins(s.per_frame_j.size());
  return mean(s.per_frame_j, bins[0], bins[1]) - mean(s.per_frame_j, bins[3], bins[4]);
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

double jaccard(const BinaryMask& m, const BinaryMask& g) {
  if (!m.same_size(g)) throw InvalidInput("jaccard: mask sizes differ");
  const auto c = simd::kernels().mask_overlap(m.bytes().data(), g.bytes().data(), m.pixel_count());
  if (c.uni == 0) return 1.0;
  return static_cast<double>(c.intersection) / static_cast<double>(c.uni);
}

std::string_view to_string(RecallMode m) { return m == RecallMode::frame ? "frame" : "sequence"; }

RecallMode parse_recall_mode(std::string_view s) {
  if (s == "frame") return RecallMode::frame;
  if (s == "sequence") return RecallMode::sequence;
  throw ConfigError("unknown recall mode '" + std::string(s) + "' (expected frame or sequence)");
}

double j_mean(const EvalReport& r) {
  require_frames(r);
  double s = 0.0;
  for (const auto& seq : r.sequences) s += mean(seq.per_frame_j, 0, seq.per_frame_j.size());
  return s / static_cast<double>(r.sequences.size());
}

double j_recall(const EvalReport& r, double tau, RecallMode mode) {
  if (!(tau > 0.0 && tau < 1.0)) throw InvalidInput("j_recall: tau must be in (0,1)");
  require_frames(r);
  double s = 0.0;
  for (const auto& seq : r.sequences) {
    if (mode == RecallMode::frame) {
      s += sequence_recall(seq, tau);
    } else {
      s += mean(seq.per_frame_j, 0, seq.per_frame_j.size()) > tau ? 1.0 : 0.0;
    }
  }
  return s / static_cast<double>(r.sequences.size());
}

std::vector<std::size_t> decay_bins(std::size_t n) {
  if (n < 4) throw InvalidInput("j_decay: a sequence needs at least 4 frames");
  std::vector<std::size_t> b{0};
  const std::size_t base = n / 4, extra = n % 4;
  for (std::size_t k = 0; k < 4; ++k) b.push_back(b.back() + base + (k < extra ? 1 : 0));
  return b;
}

double j_decay(const EvalReport& r) {
  require_frames(r);
  double s = 0.0;
  for (const auto& seq : r.sequences) s += sequence_decay(seq);
  return s / static_cast<double>(r.sequences.size());
}

nlohmann::json report_json(const EvalReport& r, double tau, RecallMode mode) {
  nlohmann::json seqs = nlohmann::json::array();
  for (const auto& s : r.sequences) seqs.push_back({{"name", s.name}, {"per_frame_j", s.per_frame_j}});
  nlohmann::json out{{"sequences", seqs},
                     {"j_mean", j_mean(r)},
                     {"j_recall", j_recall(r, tau, mode)},
                     {"recall_mode", std::string(to_string(mode))},
                     {"tau", tau}};
  bool decay_defined = true;
  for (const auto& s : r.sequences) decay_defined = decay_defined && s.per_frame_j.size() >= 4;
  out["j_decay"] = decay_defined ? nlohmann::json(j_decay(r)) : nlohmann::json(nullptr);
  return out;
}

std::string report_csv(const EvalReport& r, double tau, RecallMode mode) {
  std::string out = "name,frames,j_mean,j_recall,j_decay\n";
  for (const auto& s : r.sequences) {
    EvalReport one{{s}};
    out += s.name + "," + std::to_string(s.per_frame_j.size()) + "," + format_double(j_mean(one)) +
           "," + format_double(j_recall(one, tau, mode)) + "," +
           (s.per_frame_j.size() >= 4 ? format_double(j_decay(one)) : std::string()) + "\n";
  }
  return out;
}

void write_report(const EvalReport& r, double tau, RecallMode mode,
                  const std::filesystem::path& json_path, const std::filesystem::path& csv_path) {
  std::ofstream js(json_path);
  js << report_json(r, tau, mode).dump(2) << "\n";
  std::ofstream csv(csv_path);
  csv << report_csv(r, tau, mode);
  if (!js || !csv) throw WriteError("cannot write report to " + json_path.string());
}

}  // namespace ffvos::metrics
