#include "fbg/descriptors.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "fbg/error.hpp"

namespace fbg {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

std::array<int, 256> make_lbp_table() {
  std::array<int, 256> table{};
  int next = 0;
  for (int code = 0; code < 256; ++code) {
    int transitions = 0;
    for (int b = 0; b < 8; ++b) {
      const int cur = (code >> b) & 1;
      const int nxt = (code >> ((b + 1) % 8)) & 1;
      transitions += cur != nxt;
    }
    table[code] = transitions <= 2 ? next++ : kLbpBins - 1;
  }
  return table;
}

const std::array<int, 256>& lbp_table() {
  static const auto table = make_lbp_table();
  return table;
}

// Bilinear sample at (x + sx*a, y + sy*a) written symmetrically in the four
// contributing pixels, so point reflections of the image give identical sums.
double diagonal_sample(const GrayImage& image, int x, int y, int sx, int sy) {
  constexpr double a = std::numbers::sqrt2 / 2.0;
  constexpr double w_center = (1.0 - a) * (1.0 - a);
  constexpr double w_side = a * (1.0 - a);
  constexpr double w_diag = a * a;
  return image.clamped(x, y) * w_center + image.clamped(x + sx, y) * w_side +
         image.clamped(x, y + sy) * w_side +
         image.clamped(x + sx, y + sy) * w_diag;
}

void clip_normalize(std::span<double> v) {
  double sq = 0.0;
  for (double x : v) sq += x * x;
  if (sq == 0.0) return;
  double norm = std::sqrt(sq);
  sq = 0.0;
  for (double& x : v) {
    x = std::min(x / norm, kSiftClip);
    sq += x * x;
  }
  norm = std::sqrt(sq);
  for (double& x : v) x /= norm;
}

}  // namespace

std::string to_string(DescriptorKind kind) {
  switch (kind) {
    case DescriptorKind::kESift: return "eSIFT";
    case DescriptorKind::kEMSift: return "eMSIFT";
    case DescriptorKind::kELbp: return "eLBP";
  }
  return "?";
}

DescriptorKind parse_descriptor_kind(const std::string& s) {
  if (s == "eSIFT" || s == "eS") return DescriptorKind::kESift;
  if (s == "eMSIFT" || s == "eMS") return DescriptorKind::kEMSift;
  if (s == "eLBP" || s == "eL") return DescriptorKind::kELbp;
  throw Error(ErrorCode::kInvalidArgument,
              "unknown descriptor '" + s + "' (eSIFT|eMSIFT|eLBP)");
}

int descriptor_dim(DescriptorKind kind) {
  return kind == DescriptorKind::kELbp ? kLbpDim : kSiftDim;
}

void DenseGrid::validate() const {
  if (stride < 1) {
    throw Error(ErrorCode::kInvalidArgument, "grid stride must be >= 1");
  }
  if (scales.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "grid needs at least one scale");
  }
  for (int s : scales) {
    if (s < 8 || s % 2 != 0) {
      throw Error(ErrorCode::kInvalidArgument,
                  "grid scale " + std::to_string(s) + " must be even and >= 8");
    }
  }
}

Rect patch_rect(Point center, int scale) {
  return {center.x - scale / 2, center.y - scale / 2, scale, scale};
}

std::vector<GridSample> grid_samples(int width, int height,
                                     const DenseGrid& grid) {
  grid.validate();
  auto scales = grid.scales;
  std::sort(scales.begin(), scales.end());
  std::vector<GridSample> out;
  for (int y = 0; y < height; y += grid.stride) {
    for (int x = 0; x < width; x += grid.stride) {
      for (int s : scales) {
        const auto r = patch_rect({x, y}, s);
        if (r.x < 0 || r.y < 0 || r.x + r.width > width ||
            r.y + r.height > height) {
          continue;
        }
        out.push_back({{x, y}, s});
      }
    }
  }
  return out;
}

std::array<double, 3> relative_geometry(const GridSample& sample,
                                        const Rect& frame) {
  const double w = std::max(frame.width, 1);
  const double h = std::max(frame.height, 1);
  return {std::clamp((sample.center.x - frame.x) / w, 0.0, 1.0),
          std::clamp((sample.center.y - frame.y) / h, 0.0, 1.0),
          std::clamp(sample.scale / std::max(w, h), 0.0, 1.0)};
}

GradientField::GradientField(const GrayImage& image)
    : width_(image.width()),
      height_(image.height()),
      magnitude_(image.size()),
      orientation_(image.size()) {
  for (int y = 0; y < height_; ++y) {
    for (int x = 0; x < width_; ++x) {
      const double gx = (image.clamped(x + 1, y) - image.clamped(x - 1, y)) / 2;
      const double gy = (image.clamped(x, y + 1) - image.clamped(x, y - 1)) / 2;
      double theta = std::atan2(gy, gx);
      if (theta < 0.0) theta += kTwoPi;
      double o = theta * kSiftOrientations / kTwoPi;
      if (o >= kSiftOrientations) o -= kSiftOrientations;
      magnitude_[index(x, y)] = std::hypot(gx, gy);
      orientation_[index(x, y)] = o;
    }
  }
}

SiftExtractor::SiftExtractor(const GrayImage& image)
    : image_(&image),
      gradients_(image),
      integral_(static_cast<std::size_t>(image.width() + 1) *
                    (image.height() + 1),
                0.0) {
  const int stride = image.width() + 1;
  for (int y = 0; y < image.height(); ++y) {
    double row = 0.0;
    for (int x = 0; x < image.width(); ++x) {
      row += image.at(x, y);
      integral_[static_cast<std::size_t>(y + 1) * stride + x + 1] =
          integral_[static_cast<std::size_t>(y) * stride + x + 1] + row;
    }
  }
}

double SiftExtractor::patch_mean(const Rect& p) const {
  const int stride = image_->width() + 1;
  auto at = [&](int x, int y) {
    return integral_[static_cast<std::size_t>(y) * stride + x];
  };
  const double sum = at(p.x + p.width, p.y + p.height) - at(p.x, p.y + p.height) -
                     at(p.x + p.width, p.y) + at(p.x, p.y);
  return std::clamp(sum / (static_cast<double>(p.width) * p.height), 0.0, 1.0);
}

LocalDescriptor SiftExtractor::compute(const GridSample& sample,
                                       const BinaryMask* mask,
                                       const Rect& frame) const {
  const auto patch = patch_rect(sample.center, sample.scale);
  const double s = sample.scale;
  const double sigma = s / 2.0;
  const double inv_two_sigma2 = 1.0 / (2.0 * sigma * sigma);
  const double cx = patch.x + s / 2.0;
  const double cy = patch.y + s / 2.0;

  LocalDescriptor d{sample.center, sample.scale,
                    std::vector<double>(kSiftDim, 0.0)};
  auto hist = std::span(d.vector).first(kSiftGradientDim);
  for (int py = patch.y; py < patch.y + patch.height; ++py) {
    const double v = (py - patch.y + 0.5) / s * kSiftCells - 0.5;
    const int v0 = static_cast<int>(std::floor(v));
    const double fv = v - v0;
    const double dy = py + 0.5 - cy;
    for (int px = patch.x; px < patch.x + patch.width; ++px) {
      if (mask != nullptr && !mask->test(px, py)) continue;
      const double mag = gradients_.magnitude(px, py);
      if (mag == 0.0) continue;
      const double dx = px + 0.5 - cx;
      const double weight = mag * std::exp(-(dx * dx + dy * dy) * inv_two_sigma2);
      const double u = (px - patch.x + 0.5) / s * kSiftCells - 0.5;
      const int u0 = static_cast<int>(std::floor(u));
      const double fu = u - u0;
      const double o = gradients_.orientation(px, py);
      const int o0 = static_cast<int>(std::floor(o));
      const double fo = o - o0;
      for (int j = 0; j < 2; ++j) {
        const int cell_y = v0 + j;
        if (cell_y < 0 || cell_y >= kSiftCells) continue;
        const double wy = j == 0 ? 1.0 - fv : fv;
        for (int i = 0; i < 2; ++i) {
          const int cell_x = u0 + i;
          if (cell_x < 0 || cell_x >= kSiftCells) continue;
          const double wx = i == 0 ? 1.0 - fu : fu;
          const int base = (cell_y * kSiftCells + cell_x) * kSiftOrientations;
          const double w = weight * wx * wy;
          hist[base + o0 % kSiftOrientations] += w * (1.0 - fo);
          hist[base + (o0 + 1) % kSiftOrientations] += w * fo;
        }
      }
    }
  }
  clip_normalize(hist);
  const auto geo = relative_geometry(sample, frame);
  d.vector[kSiftGradientDim + 0] = geo[0];
  d.vector[kSiftGradientDim + 1] = geo[1];
  d.vector[kSiftGradientDim + 2] = geo[2];
  d.vector[kSiftGradientDim + 3] = patch_mean(patch);
  return d;
}

std::vector<LocalDescriptor> dense_sift(const GrayImage& image,
                                        const DenseGrid& grid,
                                        const BinaryMask* mask,
                                        const Rect& frame) {
  if (mask != nullptr &&
      (mask->width() != image.width() || mask->height() != image.height())) {
    throw Error(ErrorCode::kDimensionMismatch,
                "descriptor mask does not match the image");
  }
  const SiftExtractor extractor(image);
  std::vector<LocalDescriptor> out;
  for (const auto& sample : grid_samples(image.width(), image.height(), grid)) {
    out.push_back(extractor.compute(sample, mask, frame));
  }
  return out;
}

int lbp_bin(std::uint8_t pattern) { return lbp_table()[pattern]; }

std::uint8_t lbp_pattern(const GrayImage& image, int x, int y) {
  const double center = image.at(x, y);
  const double neighbors[8] = {
      image.clamped(x + 1, y),
      diagonal_sample(image, x, y, 1, -1),
      image.clamped(x, y - 1),
      diagonal_sample(image, x, y, -1, -1),
      image.clamped(x - 1, y),
      diagonal_sample(image, x, y, -1, 1),
      image.clamped(x, y + 1),
      diagonal_sample(image, x, y, 1, 1),
  };
  std::uint8_t code = 0;
  for (int p = 0; p < 8; ++p) {
    if (neighbors[p] >= center) code |= static_cast<std::uint8_t>(1u << p);
  }
  return code;
}

std::array<double, kLbpBins> lbp_histogram(const GrayImage& image,
                                           const Rect& patch) {
  std::array<double, kLbpBins> hist{};
  std::size_t n = 0;
  for (int y = patch.y; y < patch.y + patch.height; ++y) {
    for (int x = patch.x; x < patch.x + patch.width; ++x) {
      hist[lbp_bin(lbp_pattern(image, x, y))] += 1.0;
      ++n;
    }
  }
  if (n > 0) {
    for (double& h : hist) h /= static_cast<double>(n);
  }
  return hist;
}

std::vector<LocalDescriptor> dense_lbp(const GrayImage& image,
                                       const DenseGrid& grid,
                                       const Rect& frame) {
  std::vector<LocalDescriptor> out;
  for (const auto& sample : grid_samples(image.width(), image.height(), grid)) {
    LocalDescriptor d{sample.center, sample.scale,
                      std::vector<double>(kLbpDim, 0.0)};
    const auto hist =
        lbp_histogram(image, patch_rect(sample.center, sample.scale));
    std::copy(hist.begin(), hist.end(), d.vector.begin());
    const auto geo = relative_geometry(sample, frame);
    std::copy(geo.begin(), geo.end(), d.vector.begin() + kLbpBins);
    out.push_back(std::move(d));
  }
  return out;
}

std::map<RegionId, std::vector<LocalDescriptor>> assign_to_pools(
    const std::vector<LocalDescriptor>& descriptors,
    const RegionPartition& partition) {
  std::map<RegionId, std::vector<LocalDescriptor>> pools;
  for (const auto& d : descriptors) {
    if (d.center.x < 0 || d.center.y < 0 || d.center.x >= partition.width() ||
        d.center.y >= partition.height()) {
      throw Error(ErrorCode::kInvalidArgument,
                  "descriptor center lies outside the partition");
    }
    pools[partition.at(d.center.x, d.center.y)].push_back(d);
  }
  return pools;
}

}  // namespace fbg
