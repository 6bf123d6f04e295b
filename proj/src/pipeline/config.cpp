#include <cmath>
#include <fstream>

#include "ffvos/core/error.hpp"
#include "ffvos/pipeline.hpp"

namespace ffvos::pipeline {
namespace {

using nlohmann::json;

template <class T>
T get(const json& j, const std::string& key) {
  try {
    return j.get<T>();
  } catch (const json::exception& e) {
    throw ConfigError("config key '" + key + "': " + e.what());
  }
}

void read_grabcut(const json& j, transfer::GrabCutParams& g) {
  if (!j.is_object()) throw ConfigError("config key 'grabcut' must be an object");
  for (const auto& [key, v] : j.items()) {
    const std::string k = "grabcut." + key;
    if (key == "K") g.K = get<int>(v, k);
    else if (key == "gamma") g.gamma = get<double>(v, k);
    else if (key == "p") g.p = get<int>(v, k);
    else if (key == "prob_clamp") g.prob_clamp = get<double>(v, k);
    else if (key == "max_rounds") g.max_rounds = get<int>(v, k);
    else if (key == "convergence_frac") g.convergence_frac = get<double>(v, k);
    else if (key == "gmm_reg") g.gmm_reg = get<double>(v, k);
    else if (key == "background_band") g.background_band = get<int>(v, k);
    else if (key == "gmm_max_samples") g.gmm_max_samples = get<int>(v, k);
    else throw ConfigError("unknown config key '" + k + "'");
  }
}

void read_tracker(const json& j, PipelineConfig& c) {
  if (!j.is_object()) throw ConfigError("config key 'tracker' must be an object");
  for (const auto& [key, v] : j.items()) {
    const std::string k = "tracker." + key;
    if (key == "name") c.tracker_name = get<std::string>(v, k);
    else if (key == "search_radius") c.tracker.search_radius = get<int>(v, k);
    else if (key == "template_update_rate") c.tracker.template_update_rate = get<double>(v, k);
    else throw ConfigError("unknown config key '" + k + "'");
  }
}

}  // namespace

void PipelineConfig::validate() const {
  if (k < 1) throw ConfigError("k must be >= 1");
  if (!(tau_binarize > 0.0 && tau_binarize < 1.0)) throw ConfigError("tau must be in (0,1)");
  if (!(min_frac > 0.0 && min_frac <= 1.0)) throw ConfigError("min_frac must be in (0,1]");
  if (bandwidth && !(*bandwidth > 0.0 && std::isfinite(*bandwidth))) {
    throw ConfigError("bandwidth must be > 0");
  }
  if (!(bandwidth_scale > 0.0)) throw ConfigError("bandwidth_scale must be > 0");
  if (!(tau_recall > 0.0 && tau_recall < 1.0)) throw ConfigError("tau_recall must be in (0,1)");
  if (jobs < 1) throw ConfigError("jobs must be >= 1");
  grabcut.validate();
  tracker.validate();
  track::make_tracker(tracker_name, tracker);
}

PipelineConfig PipelineConfig::from_json(const json& j, PipelineConfig c) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  for (const auto& [key, v] : j.items()) {
    if (key == "k") c.k = get<int>(v, key);
    else if (key == "tau_binarize") c.tau_binarize = get<double>(v, key);
    else if (key == "min_frac") c.min_frac = get<double>(v, key);
    else if (key == "min_size_mode") {
      const auto s = get<std::string>(v, key);
      if (s == "frames") c.min_size_mode = cluster::MinSizeMode::frames;
      else if (s == "records") c.min_size_mode = cluster::MinSizeMode::records;
      else throw ConfigError("min_size_mode must be 'frames' or 'records'");
    } else if (key == "bandwidth") {
      if (v.is_null()) c.bandwidth.reset();
      else c.bandwidth = get<double>(v, key);
    } else if (key == "bandwidth_scale") c.bandwidth_scale = get<double>(v, key);
    else if (key == "p") c.grabcut.p = get<int>(v, key);
    else if (key == "grabcut") read_grabcut(v, c.grabcut);
    else if (key == "tracker") read_tracker(v, c);
    else if (key == "seed") c.seed = get<std::uint64_t>(v, key);
    else if (key == "recall_mode") c.recall_mode = metrics::parse_recall_mode(get<std::string>(v, key));
    else if (key == "tau_recall") c.tau_recall = get<double>(v, key);
    else if (key == "exclude_endpoints") c.exclude_endpoints = get<bool>(v, key);
    else if (key == "jobs") c.jobs = get<int>(v, key);
    else throw ConfigError("unknown config key '" + key + "'");
  }
  return c;
}

PipelineConfig PipelineConfig::from_json(const json& j) { return from_json(j, PipelineConfig{}); }

json PipelineConfig::to_json() const {
  return {{"k", k},
          {"tau_binarize", tau_binarize},
          {"min_frac", min_frac},
          {"min_size_mode", min_size_mode == cluster::MinSizeMode::frames ? "frames" : "records"},
          {"bandwidth", bandwidth ? json(*bandwidth) : json(nullptr)},
          {"bandwidth_scale", bandwidth_scale},
          {"grabcut",
           {{"K", grabcut.K},
            {"gamma", grabcut.gamma},
            {"p", grabcut.p},
            {"prob_clamp", grabcut.prob_clamp},
            {"max_rounds", grabcut.max_rounds},
            {"convergence_frac", grabcut.convergence_frac},
            {"gmm_reg", grabcut.gmm_reg},
            {"background_band", grabcut.background_band},
            {"gmm_max_samples", grabcut.gmm_max_samples}}},
          {"tracker",
           {{"name", tracker_name},
            {"search_radius", tracker.search_radius},
            {"template_update_rate", tracker.template_update_rate}}},
          {"seed", seed},
          {"recall_mode", std::string(metrics::to_string(recall_mode))},
          {"tau_recall", tau_recall},
          {"exclude_endpoints", exclude_endpoints}};
}

PipelineConfig load_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  json j;
  try {
    j = json::parse(in, nullptr, true, /*ignore_comments=*/true);
  } catch (const json::parse_error& e) {
    throw ConfigError("config file " + path.string() + ": " + e.what());
  }
  return PipelineConfig::from_json(j);
}

}  // namespace ffvos::pipeline
