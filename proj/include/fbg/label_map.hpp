#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace fbg {

inline constexpr std::uint8_t kVoidLabel = 255;
inline constexpr std::uint8_t kBackgroundLabel = 0;

/// Per-pixel category index; 0 is background and 255 is void.
class LabelMap {
 public:
  LabelMap() = default;
  LabelMap(int width, int height, std::uint8_t fill = kBackgroundLabel)
      : width_(width),
        height_(height),
        labels_(static_cast<std::size_t>(width) * height, fill) {}
  LabelMap(int width, int height, std::vector<std::uint8_t> labels)
      : width_(width), height_(height), labels_(std::move(labels)) {}

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  std::uint8_t at(int x, int y) const { return labels_[index(x, y)]; }
  void set(int x, int y, std::uint8_t v) { labels_[index(x, y)] = v; }

  std::span<const std::uint8_t> labels() const noexcept { return labels_; }
  std::span<std::uint8_t> labels() noexcept { return labels_; }

  friend bool operator==(const LabelMap&, const LabelMap&) = default;

 private:
  std::size_t index(int x, int y) const {
    return static_cast<std::size_t>(y) * width_ + x;
  }

  int width_ = 0;
  int height_ = 0;
  std::vector<std::uint8_t> labels_;
};

}  // namespace fbg
