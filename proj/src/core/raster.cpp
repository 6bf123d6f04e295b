#include "ffvos/core/raster.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "ffvos/core/error.hpp"
#include "ffvos/simd/kernels.hpp"

namespace ffvos {
namespace {

void require_positive_size(int w, int h, const char* what) {
  if (w < 1 || h < 1) {
    throw InvalidInput(std::string(what) + ": dimensions must be >= 1, got " +
                       std::to_string(w) + "x" + std::to_string(h));
  }
}

void require_same_size(const BinaryMask& a, const BinaryMask& b, const char* what) {
  if (!a.same_size(b)) {
    throw InvalidInput(std::string(what) + ": dimension mismatch " + std::to_string(a.width()) +
                       "x" + std::to_string(a.height()) + " vs " + std::to_string(b.width()) +
                       "x" + std::to_string(b.height()));
  }
}

}  // namespace

Frame::Frame(int width, int height)
    : width_(width), height_(height), rgb_(3 * static_cast<std::size_t>(width) * height, 0.0f) {
  require_positive_size(width, height, "Frame");
}

Frame::Frame(int width, int height, std::vector<float> rgb)
    : width_(width), height_(height), rgb_(std::move(rgb)) {
  require_positive_size(width, height, "Frame");
  if (rgb_.size() != 3 * pixel_count()) throw InvalidInput("Frame: channel buffer size mismatch");
  for (float v : rgb_) {
    if (!(v >= 0.0f && v <= 1.0f)) throw InvalidInput("Frame: channel value outside [0,1]");
  }
}

void VideoSequence::validate() const {
  if (frames.empty()) throw InvalidInput("VideoSequence '" + name + "' has no frames");
  for (std::size_t i = 1; i < frames.size(); ++i) {
    if (frames[i].width() != width() || frames[i].height() != height()) {
      throw InvalidInput("VideoSequence '" + name + "': frame " + std::to_string(i) +
                         " size differs from frame 0");
    }
  }
}

BinaryMask::BinaryMask(int width, int height, bool value)
    : width_(width),
      height_(height),
      bits_(static_cast<std::size_t>(width) * height, value ? 1 : 0) {
  require_positive_size(width, height, "BinaryMask");
}

std::size_t BinaryMask::area() const noexcept {
  return simd::kernels().mask_overlap(bits_.data(), bits_.data(), bits_.size()).intersection;
}

SoftMask::SoftMask(int width, int height, double value)
    : width_(width), height_(height), values_(static_cast<std::size_t>(width) * height, value) {
  require_positive_size(width, height, "SoftMask");
}

SoftMask::SoftMask(int width, int height, std::vector<double> values)
    : width_(width), height_(height), values_(std::move(values)) {
  require_positive_size(width, height, "SoftMask");
  if (values_.size() != pixel_count()) throw InvalidInput("SoftMask: value buffer size mismatch");
  for (double v : values_) {
    if (!(v >= 0.0 && v <= 1.0)) throw InvalidInput("SoftMask: value outside [0,1]");
  }
}

ColorPlanes extract_region(const Frame& frame, const BoundingBox& box) {
  if (!box.fits(frame.width(), frame.height())) {
    throw InvalidInput("extract_region: box outside frame");
  }
  ColorPlanes p;
  p.width = box.w;
  p.height = box.h;
  const std::size_t n = static_cast<std::size_t>(box.w) * box.h;
  p.r.resize(n);
  p.g.resize(n);
  p.b.resize(n);
  std::size_t i = 0;
  for (int y = box.y; y < box.bottom(); ++y) {
    for (int x = box.x; x < box.right(); ++x, ++i) {
      const Rgb c = frame.at(x, y);
      p.r[i] = c.r;
      p.g[i] = c.g;
      p.b[i] = c.b;
    }
  }
  return p;
}

BinaryMask mask_union(const BinaryMask& a, const BinaryMask& b) {
  require_same_size(a, b, "mask_union");
  BinaryMask out(a.width(), a.height());
  for (std::size_t i = 0; i < a.pixel_count(); ++i) out.set(i, a[i] || b[i]);
  return out;
}

BinaryMask mask_intersection(const BinaryMask& a, const BinaryMask& b) {
  require_same_size(a, b, "mask_intersection");
  BinaryMask out(a.width(), a.height());
  for (std::size_t i = 0; i < a.pixel_count(); ++i) out.set(i, a[i] && b[i]);
  return out;
}

BoundingBox bbox_of(const BinaryMask& m) {
  int x0 = m.width(), y0 = m.height(), x1 = -1, y1 = -1;
  for (int y = 0; y < m.height(); ++y) {
    for (int x = 0; x < m.width(); ++x) {
      if (!m.at(x, y)) continue;
      x0 = std::min(x0, x);
      y0 = std::min(y0, y);
      x1 = std::max(x1, x);
      y1 = std::max(y1, y);
    }
  }
  if (x1 < 0) throw EmptyMaskError("bbox_of: mask has no set pixels");
  return {x0, y0, x1 - x0 + 1, y1 - y0 + 1};
}

SoftMask resize_soft(const SoftMask& m, int w, int h) {
  require_positive_size(w, h, "resize_soft");
  if (w == m.width() && h == m.height()) return m;

  const double sx = static_cast<double>(m.width()) / w;
  const double sy = static_cast<double>(m.height()) / h;
  std::vector<double> out(static_cast<std::size_t>(w) * h);
  for (int y = 0; y < h; ++y) {
    const double fy = std::clamp((y + 0.5) * sy - 0.5, 0.0, static_cast<double>(m.height() - 1));
    const int y0 = static_cast<int>(fy);
    const int y1 = std::min(y0 + 1, m.height() - 1);
    const double ty = fy - y0;
    for (int x = 0; x < w; ++x) {
      const double fx = std::clamp((x + 0.5) * sx - 0.5, 0.0, static_cast<double>(m.width() - 1));
      const int x0 = static_cast<int>(fx);
      const int x1 = std::min(x0 + 1, m.width() - 1);
      const double tx = fx - x0;
      const double top = m.at(x0, y0) * (1.0 - tx) + m.at(x1, y0) * tx;
      const double bot = m.at(x0, y1) * (1.0 - tx) + m.at(x1, y1) * tx;
      // Convex combination of values in [0,1]; clamp only guards rounding.
      out[static_cast<std::size_t>(y) * w + x] = std::clamp(top * (1.0 - ty) + bot * ty, 0.0, 1.0);
    }
  }
  return SoftMask(w, h, std::move(out));
}

BinaryMask resize_nearest(const BinaryMask& m, int w, int h) {
  require_positive_size(w, h, "resize_nearest");
  if (w == m.width() && h == m.height()) return m;
  BinaryMask out(w, h);
  for (int y = 0; y < h; ++y) {
    const int sy = std::min(static_cast<int>((y + 0.5) * m.height() / h), m.height() - 1);
    for (int x = 0; x < w; ++x) {
      const int sx = std::min(static_cast<int>((x + 0.5) * m.width() / w), m.width() - 1);
      out.set(x, y, m.at(sx, sy));
    }
  }
  return out;
}

BinaryMask crop(const BinaryMask& m, const BoundingBox& box) {
  if (!box.fits(m.width(), m.height())) throw InvalidInput("crop: box outside mask");
  BinaryMask out(box.w, box.h);
  for (int y = 0; y < box.h; ++y) {
    for (int x = 0; x < box.w; ++x) out.set(x, y, m.at(box.x + x, box.y + y));
  }
  return out;
}

BinaryMask embed(const BinaryMask& window, const BoundingBox& box, int frame_width,
                 int frame_height) {
  if (!box.fits(frame_width, frame_height) || window.width() != box.w ||
      window.height() != box.h) {
    throw InvalidInput("embed: window does not match box or box outside frame");
  }
  BinaryMask out(frame_width, frame_height);
  for (int y = 0; y < box.h; ++y) {
    for (int x = 0; x < box.w; ++x) out.set(box.x + x, box.y + y, window.at(x, y));
  }
  return out;
}

}  // namespace ffvos
