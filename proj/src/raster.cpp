#include "fbg/raster.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "fbg/error.hpp"

namespace fbg {

namespace {

constexpr std::int64_t kUnreached = std::numeric_limits<std::int64_t>::max();

void check_dims(int width, int height) {
  if (width < 1 || height < 1) {
    throw Error(ErrorCode::kInvalidArgument,
                "raster dimensions must be positive, got " +
                    std::to_string(width) + "x" + std::to_string(height));
  }
}

// Squared distance along a row to the nearest seed in that row.
void row_pass(std::span<const std::uint8_t> seed_row,
              std::span<std::int64_t> out) {
  const auto n = static_cast<std::int64_t>(seed_row.size());
  std::int64_t last = -1;
  for (std::int64_t x = 0; x < n; ++x) {
    if (seed_row[x]) last = x;
    out[x] = last < 0 ? kUnreached : (x - last);
  }
  last = -1;
  for (std::int64_t x = n - 1; x >= 0; --x) {
    if (seed_row[x]) last = x;
    if (last >= 0 && (out[x] == kUnreached || last - x < out[x])) {
      out[x] = last - x;
    }
  }
  for (auto& v : out) {
    if (v != kUnreached) v *= v;
  }
}

// Lower envelope of parabolas f(q) + (y - q)^2 over one column.
void column_pass(std::span<const std::int64_t> f, std::span<std::int64_t> out,
                 std::vector<std::int64_t>& sites,
                 std::vector<double>& bounds) {
  const auto n = static_cast<std::int64_t>(f.size());
  sites.clear();
  bounds.clear();
  for (std::int64_t q = 0; q < n; ++q) {
    if (f[q] == kUnreached) continue;
    if (sites.empty()) {
      sites.push_back(q);
      bounds.push_back(-std::numeric_limits<double>::infinity());
      continue;
    }
    double s = 0.0;
    while (true) {
      const std::int64_t v = sites.back();
      s = static_cast<double>((f[q] + q * q) - (f[v] + v * v)) /
          static_cast<double>(2 * (q - v));
      if (s <= bounds.back() && sites.size() > 1) {
        sites.pop_back();
        bounds.pop_back();
        continue;
      }
      break;
    }
    sites.push_back(q);
    bounds.push_back(s);
  }
  if (sites.empty()) {
    std::fill(out.begin(), out.end(), kUnreached);
    return;
  }
  std::size_t k = 0;
  for (std::int64_t y = 0; y < n; ++y) {
    while (k + 1 < sites.size() && bounds[k + 1] < static_cast<double>(y)) ++k;
    const std::int64_t dy = y - sites[k];
    out[y] = dy * dy + f[sites[k]];
  }
}

std::vector<std::int64_t> squared_edt(const std::vector<std::uint8_t>& seeds,
                                      int width, int height) {
  std::vector<std::int64_t> rows(seeds.size());
  for (int y = 0; y < height; ++y) {
    const auto offset = static_cast<std::size_t>(y) * width;
    row_pass(std::span(seeds).subspan(offset, width),
             std::span(rows).subspan(offset, width));
  }
  std::vector<std::int64_t> column(height);
  std::vector<std::int64_t> result(height);
  std::vector<std::int64_t> out(seeds.size());
  std::vector<std::int64_t> sites;
  std::vector<double> bounds;
  for (int x = 0; x < width; ++x) {
    for (int y = 0; y < height; ++y) {
      column[y] = rows[static_cast<std::size_t>(y) * width + x];
    }
    column_pass(column, result, sites, bounds);
    for (int y = 0; y < height; ++y) {
      out[static_cast<std::size_t>(y) * width + x] = result[y];
    }
  }
  return out;
}

}  // namespace

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kNoSeeds: return "NoSeeds";
    case ErrorCode::kEmptyFigure: return "EmptyFigure";
    case ErrorCode::kNumericalInput: return "NumericalInput";
    case ErrorCode::kDuplicateBlock: return "DuplicateBlock";
    case ErrorCode::kDimensionMismatch: return "DimensionMismatch";
    case ErrorCode::kConfigMismatch: return "ConfigMismatch";
    case ErrorCode::kMissingFile: return "MissingFile";
    case ErrorCode::kDuplicateId: return "DuplicateId";
    case ErrorCode::kBadCategoryTable: return "BadCategoryTable";
    case ErrorCode::kBadManifest: return "BadManifest";
    case ErrorCode::kEmptySplit: return "EmptySplit";
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kIo: return "Io";
  }
  return "Unknown";
}

GrayImage::GrayImage(int width, int height, double fill)
    : width_(width), height_(height) {
  check_dims(width, height);
  values_.assign(static_cast<std::size_t>(width) * height, fill);
}

GrayImage::GrayImage(int width, int height, std::vector<double> values)
    : width_(width), height_(height), values_(std::move(values)) {
  check_dims(width, height);
  if (values_.size() != static_cast<std::size_t>(width) * height) {
    throw Error(ErrorCode::kDimensionMismatch,
                "gray image value count does not match dimensions");
  }
  for (double v : values_) {
    if (!std::isfinite(v) || v < 0.0 || v > 1.0) {
      throw Error(ErrorCode::kNumericalInput,
                  "gray image values must be finite and in [0,1]");
    }
  }
}

void GrayImage::set(int x, int y, double v) {
  if (!std::isfinite(v) || v < 0.0 || v > 1.0) {
    throw Error(ErrorCode::kNumericalInput,
                "gray image values must be finite and in [0,1]");
  }
  values_[index(x, y)] = v;
}

double GrayImage::clamped(int x, int y) const {
  return at(std::clamp(x, 0, width_ - 1), std::clamp(y, 0, height_ - 1));
}

BinaryMask::BinaryMask(int width, int height, bool fill)
    : width_(width), height_(height) {
  check_dims(width, height);
  bits_.assign(static_cast<std::size_t>(width) * height, fill ? 1 : 0);
}

std::size_t BinaryMask::count() const {
  return static_cast<std::size_t>(std::count(bits_.begin(), bits_.end(), 1));
}

Rect BinaryMask::bounding_box() const {
  int x0 = width_, y0 = height_, x1 = -1, y1 = -1;
  for (int y = 0; y < height_; ++y) {
    for (int x = 0; x < width_; ++x) {
      if (!test(x, y)) continue;
      x0 = std::min(x0, x);
      y0 = std::min(y0, y);
      x1 = std::max(x1, x);
      y1 = std::max(y1, y);
    }
  }
  if (x1 < 0) return {};
  return {x0, y0, x1 - x0 + 1, y1 - y0 + 1};
}

DistanceField::DistanceField(int width, int height,
                             std::vector<std::int64_t> squared)
    : width_(width), height_(height), squared_(std::move(squared)) {}

double DistanceField::at(int x, int y) const {
  return std::sqrt(static_cast<double>(squared(x, y)));
}

double DistanceField::max() const {
  if (squared_.empty()) return 0.0;
  return std::sqrt(
      static_cast<double>(*std::max_element(squared_.begin(), squared_.end())));
}

DistanceField euclidean_distance_transform(const BinaryMask& mask, Seeds seeds,
                                           ImageBoundary boundary) {
  const int w = mask.width();
  const int h = mask.height();
  const bool pad =
      seeds == Seeds::kOutside && boundary == ImageBoundary::kBackground;
  const int pw = pad ? w + 2 : w;
  const int ph = pad ? h + 2 : h;
  const int off = pad ? 1 : 0;

  std::vector<std::uint8_t> seed_bits(static_cast<std::size_t>(pw) * ph,
                                      pad ? 1 : 0);
  bool any = pad;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const bool member = mask.test(x, y);
      const bool is_seed = seeds == Seeds::kInside ? member : !member;
      seed_bits[static_cast<std::size_t>(y + off) * pw + x + off] =
          is_seed ? 1 : 0;
      any = any || is_seed;
    }
  }
  if (!any) {
    throw Error(ErrorCode::kNoSeeds,
                "distance transform has an empty seed set");
  }

  const auto padded = squared_edt(seed_bits, pw, ph);
  if (!pad) return DistanceField(w, h, padded);
  std::vector<std::int64_t> cropped(static_cast<std::size_t>(w) * h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      cropped[static_cast<std::size_t>(y) * w + x] =
          padded[static_cast<std::size_t>(y + 1) * pw + x + 1];
    }
  }
  return DistanceField(w, h, std::move(cropped));
}

BinaryMask dilate_disc(const BinaryMask& mask, double radius) {
  if (!(radius >= 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "dilation radius must be >= 0");
  }
  BinaryMask out(mask.width(), mask.height());
  if (mask.empty()) return out;
  const auto dist = euclidean_distance_transform(mask, Seeds::kInside,
                                                 ImageBoundary::kIgnore);
  for (int y = 0; y < mask.height(); ++y) {
    for (int x = 0; x < mask.width(); ++x) {
      if (dist.at(x, y) <= radius) out.set(x, y);
    }
  }
  return out;
}

}  // namespace fbg
