#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace fbg {

struct Point {
  int x = 0;
  int y = 0;
  friend bool operator==(const Point&, const Point&) = default;
};

struct Rect {
  int x = 0;
  int y = 0;
  int width = 0;
  int height = 0;
  friend bool operator==(const Rect&, const Rect&) = default;
};

/// Row-major grayscale image with intensities in [0,1].
class GrayImage {
 public:
  GrayImage() = default;
  GrayImage(int width, int height, double fill = 0.0);
  GrayImage(int width, int height, std::vector<double> values);

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  std::size_t size() const noexcept { return values_.size(); }

  double at(int x, int y) const { return values_[index(x, y)]; }
  void set(int x, int y, double v);
  /// Sample with coordinates clamped to the image bounds.
  double clamped(int x, int y) const;

  std::span<const double> values() const noexcept { return values_; }

 private:
  std::size_t index(int x, int y) const {
    return static_cast<std::size_t>(y) * width_ + x;
  }

  int width_ = 0;
  int height_ = 0;
  std::vector<double> values_;
};

class BinaryMask {
 public:
  BinaryMask() = default;
  BinaryMask(int width, int height, bool fill = false);

  static BinaryMask full(int width, int height) {
    return BinaryMask(width, height, true);
  }

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }

  bool test(int x, int y) const { return bits_[index(x, y)] != 0; }
  bool contains(int x, int y) const {
    return x >= 0 && y >= 0 && x < width_ && y < height_ && test(x, y);
  }
  void set(int x, int y, bool v = true) { bits_[index(x, y)] = v ? 1 : 0; }

  std::size_t count() const;
  bool empty() const { return count() == 0; }
  /// Tight bounding box of the member pixels; zero-sized when empty.
  Rect bounding_box() const;

  std::span<const std::uint8_t> bits() const noexcept { return bits_; }

  friend bool operator==(const BinaryMask&, const BinaryMask&) = default;

 private:
  std::size_t index(int x, int y) const {
    return static_cast<std::size_t>(y) * width_ + x;
  }

  int width_ = 0;
  int height_ = 0;
  std::vector<std::uint8_t> bits_;
};

/// Exact Euclidean distances, center to center. Squared distances are kept as
/// integers so that thresholds and oracle comparisons are exact.
class DistanceField {
 public:
  DistanceField() = default;
  DistanceField(int width, int height, std::vector<std::int64_t> squared);

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }

  std::int64_t squared(int x, int y) const {
    return squared_[static_cast<std::size_t>(y) * width_ + x];
  }
  double at(int x, int y) const;
  double max() const;

  std::span<const std::int64_t> squared_values() const noexcept {
    return squared_;
  }

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<std::int64_t> squared_;
};

enum class Seeds { kInside, kOutside };
enum class ImageBoundary { kBackground, kIgnore };

/// Distance from every pixel to the nearest seed pixel. With kBackground the
/// ring of virtual pixels just outside the image counts as outside-mask.
/// Throws Error(kNoSeeds) when no seed exists.
DistanceField euclidean_distance_transform(const BinaryMask& mask, Seeds seeds,
                                           ImageBoundary boundary);

/// Pixels within `radius` of the mask (inside seeds, image edge ignored).
BinaryMask dilate_disc(const BinaryMask& mask, double radius);

}  // namespace fbg
