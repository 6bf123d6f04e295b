#pragma once

// Box propagation between frames behind a swappable tracker interface.

#include <memory>
#include <string>
#include <string_view>

#include "ffvos/core/raster.hpp"

namespace ffvos::track {

struct TrackerParams {
  int search_radius = 16;
  double template_update_rate = 0.05;

  /// Throws ConfigError.
  void validate() const;
};

class Tracker {
 public:
  virtual ~Tracker() = default;
  virtual std::string_view name() const = 0;

  /// Box in frame `dst` corresponding to `box` in frame `src`. Always returns
  /// a box inside the frame with the same size as `box`.
  virtual BoundingBox track(const VideoSequence& seq, int src, const BoundingBox& box,
                            int dst) const = 0;
};

/// Steps one frame at a time toward `dst`. Each step searches +-search_radius
/// around the previous position for the best normalized cross-correlation of
/// grayscale intensity against the template, then blends the matched patch
/// into the template at template_update_rate. Equal scores prefer the smaller
/// offset, then row-major order.
class NccTracker final : public Tracker {
 public:
  explicit NccTracker(TrackerParams params = {});

  std::string_view name() const override { return "ncc"; }
  BoundingBox track(const VideoSequence& seq, int src, const BoundingBox& box,
                    int dst) const override;

  const TrackerParams& params() const noexcept { return params_; }

 private:
  TrackerParams params_;
};

/// Known names: "ncc". Throws ConfigError for anything else.
std::unique_ptr<Tracker> make_tracker(std::string_view name, const TrackerParams& params);

/// Convenience wrapper running the default tracker.
BoundingBox track_bbox(const VideoSequence& seq, int src, const BoundingBox& box, int dst,
                       const TrackerParams& params);

}  // namespace ffvos::track
