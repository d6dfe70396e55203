#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "fbg/partition.hpp"
#include "fbg/raster.hpp"

namespace fbg {

enum class DescriptorKind : std::uint8_t { kESift = 0, kEMSift = 1, kELbp = 2 };

std::string to_string(DescriptorKind kind);
/// Accepts the long (eSIFT) and short (eS) names.
DescriptorKind parse_descriptor_kind(const std::string& s);

inline constexpr int kSiftCells = 4;
inline constexpr int kSiftOrientations = 8;
inline constexpr int kSiftGradientDim = kSiftCells * kSiftCells * kSiftOrientations;
inline constexpr int kSiftDim = kSiftGradientDim + 4;
inline constexpr int kLbpBins = 59;  // 58 uniform patterns + 1 catch-all
inline constexpr int kLbpDim = kLbpBins + 3;
inline constexpr double kSiftClip = 0.2;

int descriptor_dim(DescriptorKind kind);

struct DenseGrid {
  int stride = 4;
  std::vector<int> scales{16, 24, 32};

  /// Throws Error(kInvalidArgument) unless stride >= 1 and every scale is
  /// even and >= 8.
  void validate() const;
};

struct GridSample {
  Point center;
  int scale = 0;
};

/// Patch of side `scale` around `center`: columns [x - s/2, x + s/2).
Rect patch_rect(Point center, int scale);

/// Grid samples whose patch fits in the image, in scan order (y, x, scale).
std::vector<GridSample> grid_samples(int width, int height,
                                     const DenseGrid& grid);

struct LocalDescriptor {
  Point center;
  int scale = 0;
  std::vector<double> vector;
};

/// Precomputed central-difference gradients of one image, reused by every
/// descriptor extracted from it.
class GradientField {
 public:
  explicit GradientField(const GrayImage& image);

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  double magnitude(int x, int y) const { return magnitude_[index(x, y)]; }
  /// Orientation in bin units, [0, 8).
  double orientation(int x, int y) const { return orientation_[index(x, y)]; }

 private:
  std::size_t index(int x, int y) const {
    return static_cast<std::size_t>(y) * width_ + x;
  }
  int width_;
  int height_;
  std::vector<double> magnitude_;
  std::vector<double> orientation_;
};

class SiftExtractor {
 public:
  explicit SiftExtractor(const GrayImage& image);

  /// One enriched SIFT vector. With a mask, gradient magnitude of pixels
  /// outside the mask is zeroed before binning.
  LocalDescriptor compute(const GridSample& sample, const BinaryMask* mask,
                          const Rect& frame) const;

  const GrayImage& image() const noexcept { return *image_; }

 private:
  const GrayImage* image_;
  GradientField gradients_;
  std::vector<double> integral_;  // summed-area table for patch means

  double patch_mean(const Rect& patch) const;
};

std::vector<LocalDescriptor> dense_sift(const GrayImage& image,
                                        const DenseGrid& grid,
                                        const BinaryMask* mask,
                                        const Rect& frame);

/// Bin of an 8-bit LBP code: uniform patterns 0..57 by ascending code, every
/// other pattern 58.
int lbp_bin(std::uint8_t pattern);
std::uint8_t lbp_pattern(const GrayImage& image, int x, int y);
/// L1-normalized uniform-LBP histogram of the pixels in `patch`.
std::array<double, kLbpBins> lbp_histogram(const GrayImage& image,
                                           const Rect& patch);

std::vector<LocalDescriptor> dense_lbp(const GrayImage& image,
                                       const DenseGrid& grid,
                                       const Rect& frame);

/// Enrichment values shared by all kinds: center and scale relative to
/// `frame`, each clamped to [0,1].
std::array<double, 3> relative_geometry(const GridSample& sample,
                                        const Rect& frame);

/// Pools keyed by the region under each descriptor's center pixel.
std::map<RegionId, std::vector<LocalDescriptor>> assign_to_pools(
    const std::vector<LocalDescriptor>& descriptors,
    const RegionPartition& partition);

}  // namespace fbg
