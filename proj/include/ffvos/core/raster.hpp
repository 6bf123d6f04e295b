#pragma once

// Raster and geometry primitives shared by every stage.
// All rasters are row-major with the origin at the top-left pixel.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace ffvos {

struct Rgb {
  double r = 0.0;
  double g = 0.0;
  double b = 0.0;

  friend bool operator==(const Rgb&, const Rgb&) = default;
};

/// One video frame. Channels are interleaved RGB in [0,1].
class Frame {
 public:
  Frame() = default;
  Frame(int width, int height);
  Frame(int width, int height, std::vector<float> rgb);

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  std::size_t pixel_count() const noexcept {
    return static_cast<std::size_t>(width_) * static_cast<std::size_t>(height_);
  }

  Rgb at(int x, int y) const noexcept {
    const std::size_t i = 3 * (static_cast<std::size_t>(y) * width_ + x);
    return {rgb_[i], rgb_[i + 1], rgb_[i + 2]};
  }
  void set(int x, int y, const Rgb& c) noexcept {
    const std::size_t i = 3 * (static_cast<std::size_t>(y) * width_ + x);
    rgb_[i] = static_cast<float>(c.r);
    rgb_[i + 1] = static_cast<float>(c.g);
    rgb_[i + 2] = static_cast<float>(c.b);
  }

  /// Luma in [0,1] (ITU-R BT.601 weights).
  double gray(int x, int y) const noexcept {
    const std::size_t i = 3 * (static_cast<std::size_t>(y) * width_ + x);
    return 0.299 * rgb_[i] + 0.587 * rgb_[i + 1] + 0.114 * rgb_[i + 2];
  }

  const std::vector<float>& data() const noexcept { return rgb_; }

  friend bool operator==(const Frame&, const Frame&) = default;

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<float> rgb_;
};

struct VideoSequence {
  std::string name;
  std::vector<Frame> frames;

  int width() const { return frames.empty() ? 0 : frames.front().width(); }
  int height() const { return frames.empty() ? 0 : frames.front().height(); }
  int size() const { return static_cast<int>(frames.size()); }

  /// Throws InvalidInput unless every frame shares the first frame's size.
  void validate() const;
};

struct BoundingBox {
  int x = 0;
  int y = 0;
  int w = 1;
  int h = 1;

  int right() const noexcept { return x + w; }
  int bottom() const noexcept { return y + h; }
  bool contains(int px, int py) const noexcept {
    return px >= x && px < x + w && py >= y && py < y + h;
  }
  bool fits(int frame_width, int frame_height) const noexcept {
    return x >= 0 && y >= 0 && w >= 1 && h >= 1 && x + w <= frame_width &&
           y + h <= frame_height;
  }

  friend bool operator==(const BoundingBox&, const BoundingBox&) = default;
};

/// Per-pixel {0,1} mask. Storage is one byte per pixel.
class BinaryMask {
 public:
  BinaryMask() = default;
  BinaryMask(int width, int height, bool value = false);

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  std::size_t pixel_count() const noexcept { return bits_.size(); }

  bool at(int x, int y) const noexcept {
    return bits_[static_cast<std::size_t>(y) * width_ + x] != 0;
  }
  void set(int x, int y, bool v) noexcept {
    bits_[static_cast<std::size_t>(y) * width_ + x] = v ? 1 : 0;
  }
  bool operator[](std::size_t i) const noexcept { return bits_[i] != 0; }
  void set(std::size_t i, bool v) noexcept { bits_[i] = v ? 1 : 0; }

  const std::vector<std::uint8_t>& bytes() const noexcept { return bits_; }

  std::size_t area() const noexcept;
  bool empty() const noexcept { return area() == 0; }
  bool same_size(const BinaryMask& o) const noexcept {
    return width_ == o.width_ && height_ == o.height_;
  }

  friend bool operator==(const BinaryMask&, const BinaryMask&) = default;

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<std::uint8_t> bits_;
};

/// Per-pixel real in [0,1].
class SoftMask {
 public:
  SoftMask() = default;
  SoftMask(int width, int height, double value = 0.0);
  SoftMask(int width, int height, std::vector<double> values);

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  std::size_t pixel_count() const noexcept { return values_.size(); }

  double at(int x, int y) const noexcept {
    return values_[static_cast<std::size_t>(y) * width_ + x];
  }
  void set(int x, int y, double v) noexcept {
    values_[static_cast<std::size_t>(y) * width_ + x] = v;
  }
  double operator[](std::size_t i) const noexcept { return values_[i]; }

  const std::vector<double>& values() const noexcept { return values_; }

  friend bool operator==(const SoftMask&, const SoftMask&) = default;

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<double> values_;
};

/// Planar double-precision copy of a rectangular frame region, the layout the
/// vector kernels consume.
struct ColorPlanes {
  int width = 0;
  int height = 0;
  std::vector<double> r, g, b;

  std::size_t size() const noexcept { return r.size(); }
  Rgb at(std::size_t i) const noexcept { return {r[i], g[i], b[i]}; }
};

ColorPlanes extract_region(const Frame& frame, const BoundingBox& box);

BinaryMask mask_union(const BinaryMask& a, const BinaryMask& b);
BinaryMask mask_intersection(const BinaryMask& a, const BinaryMask& b);

/// Tightest box around the set bits. Throws EmptyMaskError on an empty mask.
BoundingBox bbox_of(const BinaryMask& m);

/// Bilinear resize sampling at pixel centers (align-centers convention).
SoftMask resize_soft(const SoftMask& m, int w, int h);

/// Nearest-neighbour resize sampling at pixel centers.
BinaryMask resize_nearest(const BinaryMask& m, int w, int h);

BinaryMask crop(const BinaryMask& m, const BoundingBox& box);

/// Writes `window` into a frame-sized mask at `box`; all other pixels are 0.
BinaryMask embed(const BinaryMask& window, const BoundingBox& box, int frame_width,
                 int frame_height);

}  // namespace ffvos
