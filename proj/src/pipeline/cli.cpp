#include "ffvos/cli.hpp"

#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <spdlog/spdlog.h>

#include "ffvos/core/error.hpp"
#include "ffvos/ingest/synth.hpp"
#include "ffvos/pipeline.hpp"

namespace ffvos::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;
using pipeline::PipelineConfig;

struct ConfigFlags {
  std::string config;
  std::uint64_t seed = 0;
  int jobs = 1;
  int k = 5;
  double tau = 0.2;
  double min_frac = 0.6;
  std::string min_size_mode;
  double bandwidth = 0.0;
  int p = 10;
  double gamma = 50.0;
  std::string recall_mode;
  double recall_tau = 0.5;
  bool exclude_endpoints = false;

  std::vector<std::pair<CLI::Option*, std::function<void(PipelineConfig&)>>> setters;

  template <class T>
  void add(CLI::App* app, const std::string& name, T& var, const std::string& help,
           std::function<void(PipelineConfig&)> apply) {
    setters.emplace_back(app->add_option(name, var, help), std::move(apply));
  }

  void attach(CLI::App* app) {
    app->add_option("--config", config, "JSON config file; flags override its values");
    add(app, "--seed", seed, "Global seed", [this](auto& c) { c.seed = seed; });
    add(app, "--jobs", jobs, "Worker threads", [this](auto& c) { c.jobs = jobs; });
    add(app, "--k", k, "Proposals per frame", [this](auto& c) { c.k = k; });
    add(app, "--tau", tau, "Proposal binarization threshold",
        [this](auto& c) { c.tau_binarize = tau; });
    add(app, "--min-frac", min_frac, "Minimum foreground cluster size (fraction)",
        [this](auto& c) { c.min_frac = min_frac; });
    add(app, "--min-size-mode", min_size_mode, "frames|records", [this](auto& c) {
      if (min_size_mode == "frames") c.min_size_mode = cluster::MinSizeMode::frames;
      else if (min_size_mode == "records") c.min_size_mode = cluster::MinSizeMode::records;
      else throw ConfigError("--min-size-mode must be frames or records");
    });
    add(app, "--bandwidth", bandwidth, "Mean-shift bandwidth (default: automatic)",
        [this](auto& c) { c.bandwidth = bandwidth; });
    add(app, "--p", p, "Donor frames per filled frame", [this](auto& c) { c.grabcut.p = p; });
    add(app, "--gamma", gamma, "GrabCut pairwise strength",
        [this](auto& c) { c.grabcut.gamma = gamma; });
    add(app, "--recall-mode", recall_mode, "frame|sequence",
        [this](auto& c) { c.recall_mode = metrics::parse_recall_mode(recall_mode); });
    add(app, "--recall-tau", recall_tau, "J threshold for recall",
        [this](auto& c) { c.tau_recall = recall_tau; });
    setters.emplace_back(app->add_flag("--exclude-endpoints", exclude_endpoints,
                                       "Skip the first and last frame when scoring"),
                         [this](auto& c) { c.exclude_endpoints = exclude_endpoints; });
  }

  PipelineConfig build() const {
    PipelineConfig cfg = config.empty() ? PipelineConfig{} : pipeline::load_config(config);
    for (const auto& [opt, apply] : setters) {
      if (opt->count() > 0) apply(cfg);
    }
    cfg.validate();
    return cfg;
  }
};

void diagnose(const std::string& code, int frame, const std::string& message,
              const std::string& sequence = {}) {
  json d{{"error", code}, {"frame", frame}, {"message", message}};
  if (!sequence.empty()) d["sequence"] = sequence;
  std::cerr << d.dump() << std::endl;
}

int cmd_run(const ConfigFlags& flags, const std::string& input, const std::string& output) {
  const PipelineConfig cfg = flags.build();
  const json summary = pipeline::run_pipeline(cfg, input, output);
  for (const auto& s : summary["sequences"]) {
    if (s["status"] == "failed") {
      const auto& e = s["error"];
      diagnose(e["code"], e["frame"], e["message"], s["name"]);
      return s["exit_code"].get<int>();
    }
  }
  std::cout << (fs::path(output) / "summary.json").string() << std::endl;
  return 0;
}

int cmd_eval(const ConfigFlags& flags, const std::string& input, const std::string& gt,
             std::string output) {
  const PipelineConfig cfg = flags.build();
  const auto report = pipeline::evaluate(input, gt, cfg);
  if (output.empty()) output = input;
  fs::create_directories(output);
  metrics::write_report(report, cfg.tau_recall, cfg.recall_mode, fs::path(output) / "eval.json",
                        fs::path(output) / "eval.csv");
  const json j = metrics::report_json(report, cfg.tau_recall, cfg.recall_mode);
  std::cout << json{{"j_mean", j["j_mean"]},
                    {"j_recall", j["j_recall"]},
                    {"j_decay", j["j_decay"]},
                    {"recall_mode", j["recall_mode"]},
                    {"tau", j["tau"]}}
                   .dump()
            << std::endl;
  return 0;
}

int cmd_cluster_dump(const ConfigFlags& flags, const std::string& input, const std::string& output) {
  const PipelineConfig cfg = flags.build();
  const json j = pipeline::cluster_dump(cfg, input);
  if (output.empty()) {
    std::cout << j.dump(2) << std::endl;
  } else {
    std::ofstream out(output);
    out << j.dump(2) << "\n";
    if (!out) throw WriteError("cannot write " + output);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Flow-free video object segmentation"};
  app.require_subcommand(1);

  ConfigFlags run_flags, eval_flags, dump_flags;
  std::string input, output, gt;

  auto* run = app.add_subcommand("run", "Segment every sequence under --input");
  run->add_option("--input", input, "Sequence directory or a directory of sequences")->required();
  run->add_option("--output", output, "Output root for masks and summary.json")->required();
  run_flags.attach(run);

  auto* eval = app.add_subcommand("eval", "Score predicted masks against ground truth");
  eval->add_option("--input", input, "Prediction root (<input>/<sequence>/%05d.png)")->required();
  eval->add_option("--gt", gt, "Ground-truth root (<gt>/<sequence>/gt/%05d.png)")->required();
  eval->add_option("--output", output, "Directory for eval.json and eval.csv (default: --input)");
  eval_flags.attach(eval);

  auto* dump = app.add_subcommand("cluster-dump", "Print the cluster assignment of one sequence");
  dump->add_option("--input", input, "Sequence directory")->required();
  dump->add_option("--output", output, "JSON file (default: stdout)");
  dump_flags.attach(dump);

  ingest::SynthConfig synth_cfg;
  std::uint64_t synth_seed = 0;
  std::vector<int> dropped;
  auto* synth = app.add_subcommand("synth", "Write a synthetic sequence in the input layout");
  synth->add_option("--output", output, "Root directory; the case goes to <output>/<name>")->required();
  synth->add_option("--seed", synth_seed, "Generator seed");
  synth->add_option("--name", synth_cfg.name, "Sequence name");
  synth->add_option("--frames", synth_cfg.frames, "Frame count");
  synth->add_option("--width", synth_cfg.width, "Frame width");
  synth->add_option("--height", synth_cfg.height, "Frame height");
  synth->add_option("--drop-fraction", synth_cfg.drop_fraction,
                    "Fraction of frames without an object proposal");
  auto* dropped_opt = synth->add_option("--dropped", dropped, "Explicit dropped frame indices");
  synth->add_option("--distractors", synth_cfg.distractors, "Distractor proposals per frame");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    diagnose("config_error", -1, e.what());
    return 2;
  }

  try {
    if (*run) return cmd_run(run_flags, input, output);
    if (*eval) return cmd_eval(eval_flags, input, gt, output);
    if (*dump) return cmd_cluster_dump(dump_flags, input, output);
    if (*synth) {
      if (dropped_opt->count() > 0) synth_cfg.dropped = dropped;
      const auto c = ingest::generate_synthetic_case(synth_cfg, synth_seed);
      std::cout << ingest::write_synthetic_case(c, output).string() << std::endl;
      return 0;
    }
  } catch (const ConfigError& e) {
    diagnose("config_error", -1, e.what());
    return 2;
  } catch (const IngestError& e) {
    diagnose("ingest_error", -1, e.what());
    return 3;
  } catch (const PipelineError& e) {
    diagnose(e.code(), e.frame(), e.what());
    return 4;
  } catch (const std::exception& e) {
    diagnose("internal_error", -1, e.what());
    return 4;
  }
  return 2;
}

}  // namespace ffvos::cli
