#include "fbg/partition.hpp"

#include <algorithm>
#include <cmath>

#include "fbg/error.hpp"

namespace fbg {

namespace {

void require_figure(const BinaryMask& mask) {
  if (mask.width() < 1 || mask.empty()) {
    throw Error(ErrorCode::kEmptyFigure, "object candidate mask has no pixels");
  }
}

constexpr int kGroundIndex = 0;
constexpr int kWholeFigureIndex = 1;
constexpr int kFirstCellIndex = 2;
constexpr int kCellHues = 8;
constexpr int kBorderIndex = kFirstCellIndex + kCellHues;

}  // namespace

std::string to_string(const RegionId& id) {
  switch (id.tag) {
    case RegionTag::kFigure:
      return id.cell ? "F" + std::to_string(*id.cell) : "F";
    case RegionTag::kBorder: return "B";
    case RegionTag::kGround: return "G";
  }
  return "?";
}

std::string to_string(SpKind kind) {
  switch (kind) {
    case SpKind::kNone: return "none";
    case SpKind::kCrown: return "crown";
    case SpKind::kCartesian: return "cartesian";
  }
  return "?";
}

std::string to_string(BorderSide side) {
  switch (side) {
    case BorderSide::kExterior: return "exterior";
    case BorderSide::kInterior: return "interior";
    case BorderSide::kStraddle: return "straddle";
  }
  return "?";
}

SpKind parse_sp_kind(const std::string& s) {
  if (s == "none") return SpKind::kNone;
  if (s == "crown") return SpKind::kCrown;
  if (s == "cartesian") return SpKind::kCartesian;
  throw Error(ErrorCode::kInvalidArgument,
              "unknown spatial pyramid '" + s + "' (none|crown|cartesian)");
}

BorderSide parse_border_side(const std::string& s) {
  if (s == "exterior") return BorderSide::kExterior;
  if (s == "interior") return BorderSide::kInterior;
  if (s == "straddle") return BorderSide::kStraddle;
  throw Error(ErrorCode::kInvalidArgument,
              "unknown border side '" + s + "' (exterior|interior|straddle)");
}

std::vector<std::size_t> FigureCells::cell_sizes() const {
  std::vector<std::size_t> sizes(cell_count, 0);
  for (int c : cells) {
    if (c >= 0) ++sizes[c];
  }
  return sizes;
}

LayerSpec LayerSpec::logarithmic(double d_max, int layers) {
  LayerSpec spec;
  spec.d_max = d_max;
  for (int k = 0; k + 1 < layers; ++k) {
    spec.thresholds.push_back(std::ldexp(d_max, -(k + 1)));
  }
  return spec;
}

int LayerSpec::layer_of(double d) const {
  for (std::size_t k = 0; k < thresholds.size(); ++k) {
    if (d > thresholds[k]) return static_cast<int>(k);
  }
  return static_cast<int>(thresholds.size());
}

RegionPartition::RegionPartition(int width, int height,
                                 std::vector<RegionId> assignment,
                                 double border_width, SpConfig sp,
                                 BorderSide side)
    : width_(width),
      height_(height),
      assignment_(std::move(assignment)),
      border_width_(border_width),
      sp_(sp),
      side_(side) {
  if (assignment_.size() != static_cast<std::size_t>(width) * height) {
    throw Error(ErrorCode::kDimensionMismatch,
                "partition assignment size does not match dimensions");
  }
}

bool RegionPartition::in_region(int x, int y, const RegionId& id) const {
  const auto& r = at(x, y);
  if (id == RegionId::figure()) return r.is_figure();
  return r == id;
}

BinaryMask RegionPartition::figure_mask() const {
  return region_mask(RegionId::figure());
}

BinaryMask RegionPartition::region_mask(const RegionId& id) const {
  BinaryMask out(width_, height_);
  for (int y = 0; y < height_; ++y) {
    for (int x = 0; x < width_; ++x) {
      if (in_region(x, y, id)) out.set(x, y);
    }
  }
  return out;
}

std::size_t RegionPartition::count(const RegionId& id) const {
  if (id == RegionId::figure()) {
    return static_cast<std::size_t>(
        std::count_if(assignment_.begin(), assignment_.end(),
                      [](const RegionId& r) { return r.is_figure(); }));
  }
  return static_cast<std::size_t>(
      std::count(assignment_.begin(), assignment_.end(), id));
}

std::vector<RegionId> RegionPartition::pooling_regions() const {
  std::vector<RegionId> regions{RegionId::figure()};
  for (int c = 0; c < sp_.cell_count(); ++c) {
    regions.push_back(RegionId::figure_cell(c));
  }
  regions.push_back(RegionId::border());
  regions.push_back(RegionId::ground());
  return regions;
}

RegionPartition fbg_partition(const BinaryMask& mask, double border_width,
                              BorderSide side) {
  require_figure(mask);
  if (!(border_width >= 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "border width must be >= 0");
  }
  const int w = mask.width();
  const int h = mask.height();
  std::vector<RegionId> assignment(static_cast<std::size_t>(w) * h,
                                   RegionId::ground());

  // Exterior reach and interior depth; each is only needed on one side.
  const bool full = mask.count() == static_cast<std::size_t>(w) * h;
  double outer = 0.0;
  double inner = 0.0;
  switch (side) {
    case BorderSide::kExterior: outer = border_width; break;
    case BorderSide::kInterior: inner = border_width; break;
    case BorderSide::kStraddle:
      outer = border_width / 2.0;
      inner = border_width / 2.0;
      break;
  }
  DistanceField exterior;
  if (!full && outer > 0.0) {
    exterior = euclidean_distance_transform(mask, Seeds::kInside,
                                            ImageBoundary::kIgnore);
  }
  DistanceField interior;
  if (inner > 0.0) {
    interior = euclidean_distance_transform(mask, Seeds::kOutside,
                                            ImageBoundary::kBackground);
  }
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      auto& r = assignment[static_cast<std::size_t>(y) * w + x];
      if (mask.test(x, y)) {
        r = (inner > 0.0 && interior.at(x, y) <= inner) ? RegionId::border()
                                                        : RegionId::figure();
      } else if (outer > 0.0 && exterior.at(x, y) <= outer) {
        r = RegionId::border();
      }
    }
  }
  return RegionPartition(w, h, std::move(assignment), border_width,
                         SpConfig{}, side);
}

FigureCells crown_layers(const BinaryMask& mask, int layers) {
  require_figure(mask);
  if (layers < 1) {
    throw Error(ErrorCode::kInvalidArgument, "crown needs at least one layer");
  }
  const auto depth = euclidean_distance_transform(mask, Seeds::kOutside,
                                                  ImageBoundary::kBackground);
  double d_max = 0.0;
  for (int y = 0; y < mask.height(); ++y) {
    for (int x = 0; x < mask.width(); ++x) {
      if (mask.test(x, y)) d_max = std::max(d_max, depth.at(x, y));
    }
  }
  const auto spec = LayerSpec::logarithmic(d_max, layers);
  FigureCells out{mask.width(), mask.height(), layers,
                  std::vector<int>(static_cast<std::size_t>(mask.width()) *
                                       mask.height(),
                                   -1)};
  for (int y = 0; y < mask.height(); ++y) {
    for (int x = 0; x < mask.width(); ++x) {
      if (mask.test(x, y)) {
        out.cells[static_cast<std::size_t>(y) * mask.width() + x] =
            spec.layer_of(depth.at(x, y));
      }
    }
  }
  return out;
}

FigureCells cartesian_quadrants(const BinaryMask& mask) {
  require_figure(mask);
  std::int64_t n = 0;
  std::int64_t sum_x = 0;
  std::int64_t sum_y = 0;
  for (int y = 0; y < mask.height(); ++y) {
    for (int x = 0; x < mask.width(); ++x) {
      if (!mask.test(x, y)) continue;
      ++n;
      sum_x += x;
      sum_y += y;
    }
  }
  FigureCells out{mask.width(), mask.height(), 4,
                  std::vector<int>(static_cast<std::size_t>(mask.width()) *
                                       mask.height(),
                                   -1)};
  // x >= sum_x / n, compared exactly in integers.
  for (int y = 0; y < mask.height(); ++y) {
    for (int x = 0; x < mask.width(); ++x) {
      if (!mask.test(x, y)) continue;
      const bool east = x * n >= sum_x;
      const bool south = y * n >= sum_y;
      out.cells[static_cast<std::size_t>(y) * mask.width() + x] =
          (south ? 2 : 0) + (east ? 1 : 0);
    }
  }
  return out;
}

RegionPartition compose_partition(const BinaryMask& mask, double border_width,
                                  SpConfig sp, BorderSide side) {
  auto base = fbg_partition(mask, border_width, side);
  if (sp.kind == SpKind::kNone) return base;
  if (sp.kind == SpKind::kCrown && sp.layers < 1) {
    throw Error(ErrorCode::kInvalidArgument, "crown needs at least one layer");
  }
  if (sp.cell_count() > 255) {
    throw Error(ErrorCode::kInvalidArgument, "too many spatial pyramid cells");
  }
  auto assignment = base.assignment();
  const auto figure = base.figure_mask();
  if (!figure.empty()) {
    const auto cells = sp.kind == SpKind::kCrown
                           ? crown_layers(figure, sp.layers)
                           : cartesian_quadrants(figure);
    for (std::size_t i = 0; i < assignment.size(); ++i) {
      if (assignment[i].is_figure()) {
        assignment[i] = RegionId::figure_cell(cells.cells[i]);
      }
    }
  }
  return RegionPartition(mask.width(), mask.height(), std::move(assignment),
                         border_width, sp, side);
}

const std::vector<Rgb>& partition_palette() {
  static const std::vector<Rgb> palette = {
      {0, 0, 0},        // Ground
      {230, 25, 75},    // Figure
      {230, 25, 75},    {60, 180, 75},  {0, 130, 200}, {255, 225, 25},
      {245, 130, 48},   {145, 30, 180}, {70, 240, 240}, {240, 50, 230},
      {128, 128, 128},  // Border
  };
  return palette;
}

std::vector<std::uint8_t> partition_palette_indices(const RegionPartition& p) {
  std::vector<std::uint8_t> indices(p.assignment().size());
  for (std::size_t i = 0; i < indices.size(); ++i) {
    const auto& r = p.assignment()[i];
    int index = kGroundIndex;
    if (r.tag == RegionTag::kBorder) {
      index = kBorderIndex;
    } else if (r.is_figure()) {
      index = r.cell ? kFirstCellIndex + (*r.cell % kCellHues)
                     : kWholeFigureIndex;
    }
    indices[i] = static_cast<std::uint8_t>(index);
  }
  return indices;
}

void save_partition_png(const std::filesystem::path& path,
                        const RegionPartition& p) {
  save_indexed_png(path, p.width(), p.height(), partition_palette_indices(p),
                   partition_palette());
}

}  // namespace fbg
