#include "ffvos/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <fstream>
#include <set>

#include <spdlog/spdlog.h>

#include "ffvos/core/error.hpp"
#include "ffvos/core/parallel.hpp"
#include "ffvos/transfer/fill.hpp"

namespace ffvos::pipeline {
namespace {

using nlohmann::json;
using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

json box_json(const BoundingBox& b) { return json::array({b.x, b.y, b.w, b.h}); }

json cluster_stats(const ClusterStage& st, int frame_count) {
  std::vector<int> sizes(static_cast<std::size_t>(st.assignment.cluster_count()), 0);
  for (int l : st.assignment.labels) ++sizes[static_cast<std::size_t>(l)];
  json j{{"records", st.records.size()},
         {"clusters", st.assignment.cluster_count()},
         {"bandwidth", st.assignment.bandwidth},
         {"cluster_sizes", sizes},
         {"foreground", st.foreground ? json(*st.foreground) : json(nullptr)}};
  if (st.foreground) {
    std::set<int> frames;
    for (const auto& r : st.records) {
      if (r.cluster_label == st.foreground) frames.insert(r.frame_index);
    }
    j["foreground_members"] = sizes[static_cast<std::size_t>(*st.foreground)];
    j["foreground_frames"] = frames.size();
    j["foreground_coverage"] = static_cast<double>(frames.size()) / frame_count;
  }
  return j;
}

// Runs one sequence and writes its masks. Throws on failure.
json run_sequence(const PipelineConfig& cfg, const fs::path& seq_dir, const fs::path& out_dir,
                  int jobs) {
  const SequenceData data = load_sequence_data(seq_dir);
  const int n = data.video.size();
  ClusterStage st = run_cluster_stage(data, cfg, jobs);
  if (!st.foreground) {
    throw PipelineError("no_foreground_cluster", -1,
                        "no cluster spans the minimum number of frames");
  }
  const auto masks = cluster::cluster_masks(st.records, *st.foreground, n);

  const auto tracker = track::make_tracker(cfg.tracker_name, cfg.tracker);
  const auto fills = transfer::fill_undetected(data.video, masks, *tracker, cfg.grabcut, cfg.seed, jobs);

  std::vector<BinaryMask> final_masks(static_cast<std::size_t>(n));
  std::vector<double> track_s(n, 0.0), transfer_s(n, 0.0), write_s(n, 0.0);
  for (int i = 0; i < n; ++i) {
    if (masks[i]) final_masks[i] = *masks[i];
  }
  std::vector<int> filled;
  json fill_json = json::array();
  for (const auto& f : fills) {
    final_masks[f.frame] = f.mask;
    track_s[f.frame] = f.track_seconds;
    transfer_s[f.frame] = f.transfer_seconds;
    filled.push_back(f.frame);
    fill_json.push_back({{"frame", f.frame},
                         {"source_frame", f.source_frame},
                         {"donors", f.donors},
                         {"window", box_json(f.window)},
                         {"rounds", f.rounds},
                         {"fell_back", f.fell_back},
                         {"foreground_pixels", f.mask.area()}});
    if (f.fell_back) spdlog::warn("{}: frame {} kept its soft-mask labels", data.name, f.frame);
  }
  std::sort(filled.begin(), filled.end());

  fs::create_directories(out_dir);
  for (int i = 0; i < n; ++i) {
    const auto t0 = Clock::now();
    ingest::write_binary_mask(final_masks[i], out_dir / (ingest::frame_stem(i) + ".png"));
    write_s[i] = seconds_since(t0);
  }

  json per_frame = json::array();
  const double cluster_share = st.cluster_seconds / n;
  for (int i = 0; i < n; ++i) {
    per_frame.push_back({{"frame", i},
                         {"premask", st.premask_seconds[i]},
                         {"cluster", cluster_share},
                         {"track", track_s[i]},
                         {"transfer", transfer_s[i]},
                         {"write", write_s[i]}});
  }
  return {{"name", data.name},
          {"status", "ok"},
          {"frames", n},
          {"cluster", cluster_stats(st, n)},
          {"filled_frames", filled},
          {"fills", fill_json},
          {"timing", {{"per_frame", per_frame}, {"cluster_total", st.cluster_seconds}}}};
}

int exit_code_for(const std::exception_ptr& e) {
  try {
    std::rethrow_exception(e);
  } catch (const ConfigError&) {
    return 2;
  } catch (const IngestError&) {
    return 3;
  } catch (...) {
    return 4;
  }
}

json failure_json(const std::string& name, const std::exception_ptr& e) {
  std::string code = "internal_error", message;
  int frame = -1;
  try {
    std::rethrow_exception(e);
  } catch (const PipelineError& pe) {
    code = pe.code();
    frame = pe.frame();
    message = pe.what();
  } catch (const ConfigError& ce) {
    code = "config_error";
    message = ce.what();
  } catch (const IngestError& ie) {
    code = "ingest_error";
    message = ie.what();
  } catch (const WriteError& we) {
    code = "write_error";
    message = we.what();
  } catch (const std::exception& ex) {
    message = ex.what();
  }
  return {{"name", name},
          {"status", "failed"},
          {"error", {{"code", code}, {"frame", frame}, {"message", message}}},
          {"exit_code", exit_code_for(e)}};
}

fs::path gt_dir_for(const fs::path& seq) {
  return fs::is_directory(seq / "gt") ? seq / "gt" : seq;
}

std::vector<fs::path> discover_gt_sequences(const fs::path& root) {
  if (!fs::is_directory(root)) throw IngestError("ground-truth root is not a directory: " + root.string());
  if (fs::is_directory(root / "gt")) return {root};
  std::vector<fs::path> out;
  for (const auto& e : fs::directory_iterator(root)) {
    if (!e.is_directory()) continue;
    const fs::path d = gt_dir_for(e.path());
    if (!ingest::list_numbered_images(d).empty()) out.push_back(e.path());
  }
  std::sort(out.begin(), out.end());
  if (out.empty()) throw IngestError("no ground-truth sequences under " + root.string());
  return out;
}

}  // namespace

SequenceData load_sequence_data(const fs::path& seq_dir) {
  const ingest::SequenceLayout layout{seq_dir};
  SequenceData d;
  d.name = layout.name();
  d.video = ingest::load_sequence(layout.frames_dir());
  d.video.name = d.name;
  const int n = d.video.size();
  const auto size = std::make_pair(d.video.width(), d.video.height());
  for (int i = 0; i < n; ++i) {
    d.proposals.push_back(ingest::load_proposal_set(layout.proposals_dir(), i, size));
    auto desc = ingest::load_descriptor_file(layout.features_file(i));
    if (desc.size() != d.proposals.back().proposals.size()) {
      throw IngestError(layout.features_file(i).string() + ": " + std::to_string(desc.size()) +
                        " descriptors for " + std::to_string(d.proposals.back().proposals.size()) +
                        " proposals");
    }
    d.descriptors.push_back(std::move(desc));
  }
  return d;
}

ClusterStage run_cluster_stage(const SequenceData& data, const PipelineConfig& cfg, int jobs) {
  const int n = data.video.size();
  ClusterStage st;
  st.premasks.resize(n);
  st.premask_seconds.assign(n, 0.0);
  parallel_for(static_cast<std::size_t>(n), jobs, [&](std::size_t i) {
    const auto t0 = Clock::now();
    st.premasks[i] = premask::preliminary_mask(data.proposals[i], data.descriptors[i], cfg.k,
                                               cfg.tau_binarize, data.video.width(),
                                               data.video.height());
    st.premask_seconds[i] = seconds_since(t0);
  });

  const auto t0 = Clock::now();
  for (const auto& pm : st.premasks) {
    for (const auto& r : pm.records) st.records.push_back(r);
  }
  if (st.records.empty()) {
    throw PipelineError("no_proposals", -1, "no proposal survives binarization in any frame");
  }
  std::vector<ingest::Descriptor> points;
  points.reserve(st.records.size());
  for (auto& r : st.records) {
    try {
      r.descriptor = cluster::l2_normalize(r.descriptor);
    } catch (const NormalizationError& e) {
      throw PipelineError("zero_descriptor", r.frame_index, e.what());
    }
    points.push_back(r.descriptor);
  }
  cluster::MeanShiftParams ms;
  ms.bandwidth = cfg.bandwidth ? *cfg.bandwidth : cluster::auto_bandwidth(points, cfg.bandwidth_scale);
  ms.jobs = jobs;
  st.assignment = cluster::mean_shift(points, ms);
  cluster::apply_labels(st.assignment, st.records);
  st.foreground = cluster::select_foreground(st.assignment, st.records, n, cfg.min_frac, cfg.min_size_mode);
  st.cluster_seconds = seconds_since(t0);
  return st;
}

std::vector<fs::path> discover_sequences(const fs::path& root) {
  if (!fs::is_directory(root)) throw IngestError("input is not a directory: " + root.string());
  if (fs::is_directory(root / "frames")) return {root};
  std::vector<fs::path> out;
  for (const auto& e : fs::directory_iterator(root)) {
    if (e.is_directory() && fs::is_directory(e.path() / "frames")) out.push_back(e.path());
  }
  std::sort(out.begin(), out.end());
  if (out.empty()) throw IngestError("no sequence directories (with frames/) under " + root.string());
  return out;
}

json run_pipeline(const PipelineConfig& cfg, const fs::path& input_root, const fs::path& output_root) {
  cfg.validate();
  const auto t0 = Clock::now();
  const auto seqs = discover_sequences(input_root);
  // Sequences run in parallel; a lone sequence gets the workers instead.
  const int outer = seqs.size() > 1 ? cfg.jobs : 1;
  const int inner = seqs.size() > 1 ? 1 : cfg.jobs;
  std::vector<json> results(seqs.size());
  parallel_for(seqs.size(), outer, [&](std::size_t i) {
    const std::string name = seqs[i].filename().string();
    const auto ts = Clock::now();
    try {
      results[i] = run_sequence(cfg, seqs[i], output_root / name, inner);
    } catch (...) {
      results[i] = failure_json(name, std::current_exception());
      spdlog::error("{}: {}", name, results[i]["error"]["message"].get<std::string>());
    }
    results[i]["timing"]["total_seconds"] = seconds_since(ts);
  });

  int failed = 0;
  for (const auto& r : results) failed += r["status"] == "failed" ? 1 : 0;
  json summary{{"version", 1},
               {"config", cfg.to_json()},
               {"input", input_root.string()},
               {"sequences", results},
               {"succeeded", static_cast<int>(results.size()) - failed},
               {"failed", failed},
               {"timing", {{"total_seconds", seconds_since(t0)}}}};
  fs::create_directories(output_root);
  std::ofstream out(output_root / "summary.json");
  out << summary.dump(2) << "\n";
  if (!out) throw WriteError("cannot write " + (output_root / "summary.json").string());
  return summary;
}

metrics::EvalReport evaluate(const fs::path& pred_root, const fs::path& gt_root,
                             const PipelineConfig& cfg) {
  metrics::EvalReport report;
  const auto seqs = discover_gt_sequences(gt_root);
  for (const auto& seq : seqs) {
    const std::string name = seq.filename().string();
    fs::path pred_dir = pred_root / name;
    if (!fs::is_directory(pred_dir) && seqs.size() == 1) pred_dir = pred_root;
    auto gt_files = ingest::list_numbered_images(gt_dir_for(seq));
    if (cfg.exclude_endpoints) {
      if (gt_files.size() <= 2) {
        throw InvalidInput("sequence '" + name + "' is too short to exclude its endpoints");
      }
      gt_files = {gt_files.begin() + 1, gt_files.end() - 1};
    }
    metrics::SequenceScores scores{name, {}};
    for (const auto& gt_path : gt_files) {
      const BinaryMask gt = ingest::read_binary_mask(gt_path);
      const fs::path pred_path = pred_dir / (gt_path.stem().string() + ".png");
      BinaryMask pred(gt.width(), gt.height());
      if (fs::exists(pred_path)) {
        pred = ingest::read_binary_mask(pred_path);
        if (!pred.same_size(gt)) {
          throw IngestError(pred_path.string() + ": size differs from ground truth");
        }
      } else {
        spdlog::warn("{}: no prediction {}, scoring as empty", name, pred_path.string());
      }
      scores.per_frame_j.push_back(metrics::jaccard(pred, gt));
    }
    report.sequences.push_back(std::move(scores));
  }
  return report;
}

json cluster_dump(const PipelineConfig& cfg, const fs::path& seq_dir) {
  cfg.validate();
  const SequenceData data = load_sequence_data(seq_dir);
  const ClusterStage st = run_cluster_stage(data, cfg, cfg.jobs);
  json records = json::array();
  for (const auto& r : st.records) {
    records.push_back({{"frame", r.frame_index},
                       {"proposal", r.proposal_index},
                       {"label", *r.cluster_label},
                       {"area", r.mask.area()}});
  }
  json j = cluster_stats(st, data.video.size());
  j["sequence"] = data.name;
  j["frames"] = data.video.size();
  j["assignments"] = records;
  return j;
}

json strip_timing(const json& j) {
  if (j.is_object()) {
    json out = json::object();
    for (const auto& [k, v] : j.items()) {
      if (k != "timing") out[k] = strip_timing(v);
    }
    return out;
  }
  if (j.is_array()) {
    json out = json::array();
    for (const auto& v : j) out.push_back(strip_timing(v));
    return out;
  }
  return j;
}

}  // namespace ffvos::pipeline
