#include "fbg/features.hpp"

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <sstream>

#include "fbg/error.hpp"

namespace fbg {

namespace {

constexpr std::array<DescriptorKind, 3> kAllKinds = {
    DescriptorKind::kESift, DescriptorKind::kEMSift, DescriptorKind::kELbp};

std::string format_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> parts;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, sep)) parts.push_back(cur);
  return parts;
}

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

}  // namespace

std::string to_string(RegionSlot slot) {
  switch (slot) {
    case RegionSlot::kFigure: return "F";
    case RegionSlot::kSpFigure: return "SPF";
    case RegionSlot::kBorder: return "B";
    case RegionSlot::kGround: return "G";
  }
  return "?";
}

RegionSlot parse_region_slot(const std::string& s) {
  if (s == "F") return RegionSlot::kFigure;
  if (s == "SPF") return RegionSlot::kSpFigure;
  if (s == "B") return RegionSlot::kBorder;
  if (s == "G") return RegionSlot::kGround;
  throw Error(ErrorCode::kInvalidArgument,
              "unknown region '" + s + "' (F|SPF|B|G)");
}

FeatureConfig FeatureConfig::uniform(const std::vector<RegionSlot>& slots,
                                     const std::vector<DescriptorKind>& kinds) {
  FeatureConfig c;
  for (auto slot : slots) {
    auto& list = c.layout[static_cast<int>(slot)];
    for (auto k : kinds) {
      if (std::find(list.begin(), list.end(), k) == list.end()) {
        list.push_back(k);
      }
    }
    std::sort(list.begin(), list.end());
  }
  return c;
}

void FeatureConfig::set_layout(const std::string& spec) {
  layout = {};
  for (const auto& entry : split(spec, ';')) {
    if (entry.empty()) continue;
    const auto eq = entry.find('=');
    if (eq == std::string::npos) {
      throw Error(ErrorCode::kInvalidArgument,
                  "layout entry '" + entry + "' needs REGION=KINDS");
    }
    auto& list = layout[static_cast<int>(parse_region_slot(entry.substr(0, eq)))];
    for (const auto& k : split(entry.substr(eq + 1), '+')) {
      const auto kind = parse_descriptor_kind(k);
      if (std::find(list.begin(), list.end(), kind) != list.end()) {
        throw Error(ErrorCode::kDuplicateBlock,
                    "descriptor " + k + " repeated in layout entry '" + entry +
                        "'");
      }
      list.push_back(kind);
    }
    std::sort(list.begin(), list.end());
  }
}

std::string FeatureConfig::layout_string() const {
  std::string out;
  for (int s = 0; s < kRegionSlots; ++s) {
    if (layout[s].empty()) continue;
    if (!out.empty()) out += ';';
    out += to_string(static_cast<RegionSlot>(s)) + "=";
    for (std::size_t i = 0; i < layout[s].size(); ++i) {
      if (i > 0) out += '+';
      out += to_string(layout[s][i]);
    }
  }
  return out;
}

void FeatureConfig::validate() const {
  if (!(border_width >= 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "border width must be >= 0");
  }
  if (sp.kind == SpKind::kCrown && sp.layers < 1) {
    throw Error(ErrorCode::kInvalidArgument, "crown needs at least one layer");
  }
  if (!layout[static_cast<int>(RegionSlot::kSpFigure)].empty() &&
      sp.kind == SpKind::kNone) {
    throw Error(ErrorCode::kInvalidArgument,
                "region SPF needs a spatial pyramid (crown or cartesian)");
  }
  if (blocks().empty()) {
    throw Error(ErrorCode::kInvalidArgument,
                "feature layout selects no (descriptor, region) block");
  }
  grid.validate();
  o2p.validate();
}

std::vector<std::pair<DescriptorKind, RegionId>> FeatureConfig::blocks()
    const {
  std::vector<std::pair<DescriptorKind, RegionId>> out;
  auto has = [&](RegionSlot slot, DescriptorKind k) {
    const auto& list = layout[static_cast<int>(slot)];
    return std::find(list.begin(), list.end(), k) != list.end();
  };
  for (auto k : kAllKinds) {
    if (has(RegionSlot::kFigure, k)) out.emplace_back(k, RegionId::figure());
    if (has(RegionSlot::kSpFigure, k)) {
      for (int c = 0; c < sp.cell_count(); ++c) {
        out.emplace_back(k, RegionId::figure_cell(c));
      }
    }
    if (has(RegionSlot::kBorder, k)) out.emplace_back(k, RegionId::border());
    if (has(RegionSlot::kGround, k)) out.emplace_back(k, RegionId::ground());
  }
  return out;
}

std::size_t FeatureConfig::feature_dim() const {
  std::size_t dim = 0;
  for (const auto& [kind, region] : blocks()) {
    dim += pooled_dim(descriptor_dim(kind));
  }
  return dim;
}

bool FeatureConfig::uses(DescriptorKind kind) const {
  for (const auto& list : layout) {
    if (std::find(list.begin(), list.end(), kind) != list.end()) return true;
  }
  return false;
}

std::string FeatureConfig::canonical() const {
  std::string s = "fbg-features/1";
  s += ";border=" + format_number(border_width);
  s += ";side=" + to_string(border_side);
  s += ";sp=" + to_string(sp.kind);
  if (sp.kind == SpKind::kCrown) s += ";layers=" + std::to_string(sp.layers);
  s += ";layout=" + layout_string();
  s += ";stride=" + std::to_string(grid.stride) + ";scales=";
  auto scales = grid.scales;
  std::sort(scales.begin(), scales.end());
  for (std::size_t i = 0; i < scales.size(); ++i) {
    if (i > 0) s += ',';
    s += std::to_string(scales[i]);
  }
  s += ";epsilon=" + format_number(o2p.epsilon);
  s += ";power=" + format_number(o2p.power);
  return s;
}

std::string FeatureConfig::digest() const {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(fnv1a(canonical())));
  return buf;
}

nlohmann::ordered_json FeatureConfig::to_json() const {
  nlohmann::ordered_json j;
  j["border_width"] = border_width;
  j["border_side"] = to_string(border_side);
  j["sp"] = to_string(sp.kind);
  if (sp.kind == SpKind::kCrown) j["layers"] = sp.layers;
  j["layout"] = layout_string();
  j["stride"] = grid.stride;
  auto scales = grid.scales;
  std::sort(scales.begin(), scales.end());
  j["scales"] = scales;
  j["epsilon"] = o2p.epsilon;
  j["power"] = o2p.power;
  j["feature_dim"] = feature_dim();
  j["digest"] = digest();
  return j;
}

ImageFeatureExtractor::ImageFeatureExtractor(const GrayImage& image,
                                             const FeatureConfig& config)
    : image_(image), config_(config) {
  config_.validate();
  samples_ = grid_samples(image.width(), image.height(), config.grid);
  const Rect whole{0, 0, image.width(), image.height()};
  if (config.uses(DescriptorKind::kESift) ||
      config.uses(DescriptorKind::kEMSift)) {
    sift_.emplace(image);
  }
  if (config.uses(DescriptorKind::kESift)) {
    esift_.reserve(samples_.size());
    for (const auto& s : samples_) {
      esift_.push_back(sift_->compute(s, nullptr, whole));
    }
  }
  if (config.uses(DescriptorKind::kELbp)) {
    elbp_ = dense_lbp(image, config.grid, whole);
  }
}

std::vector<PooledFeature> ImageFeatureExtractor::blocks(
    const BinaryMask& candidate) const {
  if (candidate.width() != image_.width() ||
      candidate.height() != image_.height()) {
    throw Error(ErrorCode::kDimensionMismatch,
                "candidate mask differs from the image size");
  }
  const auto partition = compose_partition(candidate, config_.border_width,
                                           config_.sp, config_.border_side);
  std::vector<PooledFeature> out;
  std::vector<LocalDescriptor> pool;
  for (const auto& [kind, region] : config_.blocks()) {
    pool.clear();
    if (kind == DescriptorKind::kEMSift) {
      const auto mask = partition.region_mask(region);
      const auto frame = mask.bounding_box();
      for (const auto& s : samples_) {
        if (partition.in_region(s.center.x, s.center.y, region)) {
          pool.push_back(sift_->compute(s, &mask, frame));
        }
      }
    } else {
      const auto& source =
          kind == DescriptorKind::kESift ? esift_ : elbp_;
      for (const auto& d : source) {
        if (partition.in_region(d.center.x, d.center.y, region)) {
          pool.push_back(d);
        }
      }
    }
    out.push_back(
        o2p_pool(pool, config_.o2p, descriptor_dim(kind), region, kind));
  }
  return out;
}

std::vector<double> ImageFeatureExtractor::feature(
    const BinaryMask& candidate) const {
  return concat_features(blocks(candidate));
}

}  // namespace fbg
