#include "ffvos/transfer/fill.hpp"

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <string>

#include "ffvos/core/error.hpp"
#include "ffvos/core/parallel.hpp"

namespace ffvos::transfer {
namespace {

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

std::vector<int> find_undetected(std::span<const std::optional<BinaryMask>> masks) {
  std::vector<int> out;
  for (std::size_t i = 0; i < masks.size(); ++i) {
    if (!masks[i] || masks[i]->empty()) out.push_back(static_cast<int>(i));
  }
  if (out.size() == masks.size()) {
    throw PipelineError("unfillable_sequence", -1, "no frame contains the foreground object");
  }
  return out;
}

std::vector<int> nearest_detected(int x, std::span<const int> detected, int p) {
  if (detected.empty()) throw InvalidInput("nearest_detected: no detected frames");
  if (p < 1) throw InvalidInput("nearest_detected: p must be >= 1");
  std::vector<int> d(detected.begin(), detected.end());
  std::sort(d.begin(), d.end(), [x](int a, int b) {
    const int da = std::abs(a - x), db = std::abs(b - x);
    return da != db ? da < db : a < b;
  });
  d.resize(std::min<std::size_t>(d.size(), static_cast<std::size_t>(p)));
  return d;
}

SoftMask build_soft_mask(std::span<const Donor> donors, const BoundingBox& target) {
  if (target.w < 1 || target.h < 1) throw InvalidInput("build_soft_mask: degenerate target box");
  const std::size_t n = static_cast<std::size_t>(target.w) * target.h;
  std::vector<double> sum(n, 0.0);
  int used = 0;
  for (const Donor& d : donors) {
    if (d.mask.empty()) continue;
    const BinaryMask window = resize_nearest(crop(d.mask, d.box), target.w, target.h);
    for (std::size_t i = 0; i < n; ++i) sum[i] += window[i] ? 1.0 : 0.0;
    ++used;
  }
  if (used == 0) throw PipelineError("unfillable_frame", -1, "every donor mask is empty");
  for (double& v : sum) v /= used;
  return SoftMask(target.w, target.h, std::move(sum));
}

std::vector<FillOutcome> fill_undetected(const VideoSequence& seq,
                                         std::span<const std::optional<BinaryMask>> masks,
                                         const track::Tracker& tracker, const GrabCutParams& params,
                                         std::uint64_t seed, int jobs) {
  params.validate();
  if (masks.size() != static_cast<std::size_t>(seq.size())) {
    throw InvalidInput("fill_undetected: one mask slot per frame required");
  }
  const std::vector<int> undetected = find_undetected(masks);
  std::vector<int> detected;
  std::vector<BoundingBox> boxes(masks.size());
  for (std::size_t i = 0; i < masks.size(); ++i) {
    if (masks[i] && !masks[i]->empty()) {
      detected.push_back(static_cast<int>(i));
      boxes[i] = bbox_of(*masks[i]);
    }
  }

  std::vector<FillOutcome> out(undetected.size());
  parallel_for(undetected.size(), jobs, [&](std::size_t u) {
    const int x = undetected[u];
    FillOutcome& o = out[u];
    o.frame = x;
    o.donors = nearest_detected(x, detected, params.p);
    o.source_frame = o.donors.front();
    try {
      auto t0 = std::chrono::steady_clock::now();
      o.window = tracker.track(seq, o.source_frame, boxes[o.source_frame], x);
      o.track_seconds = seconds_since(t0);

      t0 = std::chrono::steady_clock::now();
      std::vector<Donor> donors;
      donors.reserve(o.donors.size());
      for (int f : o.donors) donors.push_back({*masks[f], boxes[f]});
      const SoftMask M = build_soft_mask(donors, o.window);
      GrabCutResult r = grabcut_fill(seq.frames[x], o.window, M, params,
                                     seed + static_cast<std::uint64_t>(x));
      o.mask = std::move(r.mask);
      o.fell_back = r.fell_back;
      o.rounds = r.rounds;
      o.transfer_seconds = seconds_since(t0);
    } catch (const PipelineError& e) {
      throw PipelineError(e.code(), x, e.what());
    }
  });

  std::stable_sort(out.begin(), out.end(), [](const FillOutcome& a, const FillOutcome& b) {
    const int da = std::abs(a.frame - a.source_frame), db = std::abs(b.frame - b.source_frame);
    return da != db ? da < db : a.frame < b.frame;
  });
  return out;
}

}  // namespace ffvos::transfer
