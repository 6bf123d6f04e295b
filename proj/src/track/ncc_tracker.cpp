#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "ffvos/core/error.hpp"
#include "ffvos/simd/kernels.hpp"
#include "ffvos/track.hpp"

namespace ffvos::track {
namespace {

struct GrayImage {
  int width = 0;
  int height = 0;
  std::vector<double> px;
  // Summed-area tables with a zero first row/column.
  std::vector<double> sum, sum_sq;

  explicit GrayImage(const Frame& f) : width(f.width()), height(f.height()) {
    px.resize(f.pixel_count());
    for (int y = 0; y < height; ++y) {
      for (int x = 0; x < width; ++x) px[static_cast<std::size_t>(y) * width + x] = f.gray(x, y);
    }
    const std::size_t stride = width + 1;
    sum.assign(stride * (height + 1), 0.0);
    sum_sq.assign(stride * (height + 1), 0.0);
    for (int y = 0; y < height; ++y) {
      double row = 0.0, row_sq = 0.0;
      for (int x = 0; x < width; ++x) {
        const double v = px[static_cast<std::size_t>(y) * width + x];
        row += v;
        row_sq += v * v;
        sum[(y + 1) * stride + x + 1] = sum[y * stride + x + 1] + row;
        sum_sq[(y + 1) * stride + x + 1] = sum_sq[y * stride + x + 1] + row_sq;
      }
    }
  }

  const double* row(int x, int y) const { return px.data() + static_cast<std::size_t>(y) * width + x; }

  double box_sum(const std::vector<double>& table, const BoundingBox& b) const {
    const std::size_t stride = width + 1;
    return table[b.bottom() * stride + b.right()] - table[b.y * stride + b.right()] -
           table[b.bottom() * stride + b.x] + table[b.y * stride + b.x];
  }
};

std::vector<double> patch(const GrayImage& g, const BoundingBox& b) {
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(b.w) * b.h);
  for (int y = 0; y < b.h; ++y) out.insert(out.end(), g.row(b.x, b.y + y), g.row(b.x, b.y + y) + b.w);
  return out;
}

}  // namespace

void TrackerParams::validate() const {
  if (search_radius < 1) throw ConfigError("tracker: search_radius must be >= 1");
  if (!(template_update_rate >= 0.0 && template_update_rate <= 1.0)) {
    throw ConfigError("tracker: template_update_rate must be in [0,1]");
  }
}

NccTracker::NccTracker(TrackerParams params) : params_(params) { params_.validate(); }

BoundingBox NccTracker::track(const VideoSequence& seq, int src, const BoundingBox& box,
                              int dst) const {
  const int W = seq.width(), H = seq.height();
  if (box.w < 1 || box.h < 1 || box.w > W || box.h > H) {
    throw InvalidInput("track: degenerate box " + std::to_string(box.w) + "x" +
                       std::to_string(box.h) + " for " + std::to_string(W) + "x" +
                       std::to_string(H) + " frames");
  }
  if (!box.fits(W, H)) throw InvalidInput("track: box outside frame bounds");
  if (src < 0 || src >= seq.size() || dst < 0 || dst >= seq.size()) {
    throw InvalidInput("track: frame index out of range");
  }
  if (src == dst) return box;

  const auto& k = simd::kernels();
  const std::size_t n = static_cast<std::size_t>(box.w) * box.h;
  std::vector<double> templ = patch(GrayImage(seq.frames[src]), box);
  std::vector<double> centered(n);
  BoundingBox pos = box;
  const int step = dst > src ? 1 : -1;
  const double eps = 1e-12 * static_cast<double>(n);

  for (int f = src + step;; f += step) {
    const GrayImage img(seq.frames[f]);

    double mean = 0.0;
    for (double v : templ) mean += v;
    mean /= static_cast<double>(n);
    double t_norm2 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      centered[i] = templ[i] - mean;
      t_norm2 += centered[i] * centered[i];
    }

    const int x_lo = std::max(0, pos.x - params_.search_radius);
    const int x_hi = std::min(W - box.w, pos.x + params_.search_radius);
    const int y_lo = std::max(0, pos.y - params_.search_radius);
    const int y_hi = std::min(H - box.h, pos.y + params_.search_radius);

    double best_score = -2.0;
    long best_dist = 0;
    BoundingBox best = pos;
    for (int cy = y_lo; cy <= y_hi; ++cy) {
      for (int cx = x_lo; cx <= x_hi; ++cx) {
        const BoundingBox cand{cx, cy, box.w, box.h};
        double score = 0.0;
        const double s = img.box_sum(img.sum, cand);
        const double var = img.box_sum(img.sum_sq, cand) - s * s / static_cast<double>(n);
        if (t_norm2 > eps && var > eps) {
          double num = 0.0;
          for (int y = 0; y < box.h; ++y) {
            num += k.dot(centered.data() + static_cast<std::size_t>(y) * box.w, img.row(cx, cy + y),
                         box.w);
          }
          score = num / std::sqrt(t_norm2 * var);
        }
        const long dx = cx - pos.x, dy = cy - pos.y;
        const long dist = dx * dx + dy * dy;
        if (score > best_score || (score == best_score && dist < best_dist)) {
          best_score = score;
          best_dist = dist;
          best = cand;
        }
      }
    }

    pos = best;
    const double r = params_.template_update_rate;
    if (r > 0.0) {
      const std::vector<double> matched = patch(img, pos);
      for (std::size_t i = 0; i < n; ++i) templ[i] = (1.0 - r) * templ[i] + r * matched[i];
    }
    if (f == dst) break;
  }
  return pos;
}

std::unique_ptr<Tracker> make_tracker(std::string_view name, const TrackerParams& params) {
  if (name == "ncc") return std::make_unique<NccTracker>(params);
  throw ConfigError("unknown tracker: " + std::string(name));
}

BoundingBox track_bbox(const VideoSequence& seq, int src, const BoundingBox& box, int dst,
                       const TrackerParams& params) {
  return NccTracker(params).track(seq, src, box, dst);
}

}  // namespace ffvos::track
