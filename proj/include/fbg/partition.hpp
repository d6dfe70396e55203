#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "fbg/image_io.hpp"
#include "fbg/raster.hpp"

namespace fbg {

enum class RegionTag : std::uint8_t { kFigure = 0, kBorder = 1, kGround = 2 };

/// A pooling region. Only Figure regions may carry a spatial-pyramid cell.
/// The ordering is the canonical concatenation order: the whole Figure,
/// Figure cells by index, Border, Ground.
struct RegionId {
  RegionTag tag = RegionTag::kGround;
  std::optional<std::uint8_t> cell;

  static RegionId figure() { return {RegionTag::kFigure, std::nullopt}; }
  static RegionId figure_cell(int c) {
    return {RegionTag::kFigure, static_cast<std::uint8_t>(c)};
  }
  static RegionId border() { return {RegionTag::kBorder, std::nullopt}; }
  static RegionId ground() { return {RegionTag::kGround, std::nullopt}; }

  bool is_figure() const { return tag == RegionTag::kFigure; }

  friend bool operator==(const RegionId&, const RegionId&) = default;
  friend std::strong_ordering operator<=>(const RegionId& a,
                                          const RegionId& b) {
    if (auto c = a.tag <=> b.tag; c != 0) return c;
    const int ca = a.cell ? *a.cell : -1;
    const int cb = b.cell ? *b.cell : -1;
    return ca <=> cb;
  }
};

std::string to_string(const RegionId& id);

enum class SpKind { kNone, kCrown, kCartesian };

struct SpConfig {
  SpKind kind = SpKind::kNone;
  int layers = 4;  // crown only

  int cell_count() const {
    switch (kind) {
      case SpKind::kNone: return 0;
      case SpKind::kCrown: return layers;
      case SpKind::kCartesian: return 4;
    }
    return 0;
  }
  friend bool operator==(const SpConfig&, const SpConfig&) = default;
};

/// Which side of the contour the Border crown occupies.
enum class BorderSide { kExterior, kInterior, kStraddle };

std::string to_string(SpKind kind);
std::string to_string(BorderSide side);
SpKind parse_sp_kind(const std::string& s);
BorderSide parse_border_side(const std::string& s);

/// Per-pixel Figure cell index (-1 outside the Figure).
struct FigureCells {
  int width = 0;
  int height = 0;
  int cell_count = 0;
  std::vector<int> cells;

  int at(int x, int y) const {
    return cells[static_cast<std::size_t>(y) * width + x];
  }
  std::vector<std::size_t> cell_sizes() const;
};

/// Interior-distance thresholds d_max/2, d_max/4, ... separating crown layers.
struct LayerSpec {
  double d_max = 0.0;
  std::vector<double> thresholds;

  static LayerSpec logarithmic(double d_max, int layers);
  /// Layer index (0 = innermost) of a pixel with interior distance d > 0.
  int layer_of(double d) const;
};

class RegionPartition {
 public:
  RegionPartition(int width, int height, std::vector<RegionId> assignment,
                  double border_width, SpConfig sp, BorderSide side);

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  double border_width() const noexcept { return border_width_; }
  const SpConfig& sp() const noexcept { return sp_; }
  BorderSide border_side() const noexcept { return side_; }

  const RegionId& at(int x, int y) const {
    return assignment_[static_cast<std::size_t>(y) * width_ + x];
  }
  const std::vector<RegionId>& assignment() const noexcept {
    return assignment_;
  }

  /// Whole-Figure membership (all cells merged).
  BinaryMask figure_mask() const;
  /// Member pixels of one region. `RegionId::figure()` selects all cells.
  BinaryMask region_mask(const RegionId& id) const;
  std::size_t count(const RegionId& id) const;
  /// Regions that may be pooled: the whole Figure, every configured cell,
  /// Border and Ground, in canonical order.
  std::vector<RegionId> pooling_regions() const;

  /// Whether the pixel belongs to `id`, treating `figure()` as a wildcard
  /// over all Figure cells.
  bool in_region(int x, int y, const RegionId& id) const;

 private:
  int width_;
  int height_;
  std::vector<RegionId> assignment_;
  double border_width_;
  SpConfig sp_;
  BorderSide side_;
};

/// Figure = mask, Border = crown of `border_width` around it, Ground = rest.
/// Throws Error(kEmptyFigure) on an empty mask.
RegionPartition fbg_partition(const BinaryMask& mask, double border_width = 5.0,
                              BorderSide side = BorderSide::kExterior);

FigureCells crown_layers(const BinaryMask& mask, int layers = 4);

/// Quadrants about the Figure's center of mass: NW=0, NE=1, SW=2, SE=3.
/// Pixels on the centroid lines go to the east / south side.
FigureCells cartesian_quadrants(const BinaryMask& mask);

RegionPartition compose_partition(const BinaryMask& mask, double border_width,
                                  SpConfig sp,
                                  BorderSide side = BorderSide::kExterior);

/// Palette used to render partitions: Ground black (0), Figure without cells
/// (1), Figure cells 0..7 (2..9), Border gray (10).
const std::vector<Rgb>& partition_palette();
std::vector<std::uint8_t> partition_palette_indices(const RegionPartition& p);
void save_partition_png(const std::filesystem::path& path,
                        const RegionPartition& p);

}  // namespace fbg
