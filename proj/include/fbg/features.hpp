#pragma once

#include <array>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "fbg/descriptors.hpp"
#include "fbg/partition.hpp"
#include "fbg/pooling.hpp"

namespace fbg {

/// Pooling slots of a feature layout: the whole Figure, the spatial-pyramid
/// cells of the Figure, Border and Ground.
enum class RegionSlot { kFigure = 0, kSpFigure = 1, kBorder = 2, kGround = 3 };
inline constexpr int kRegionSlots = 4;

std::string to_string(RegionSlot slot);
/// F, SPF, B or G.
RegionSlot parse_region_slot(const std::string& s);

/// Everything that determines a candidate's feature vector.
struct FeatureConfig {
  double border_width = 5.0;
  BorderSide border_side = BorderSide::kExterior;
  SpConfig sp;
  /// Descriptor kinds pooled in each slot.
  std::array<std::vector<DescriptorKind>, kRegionSlots> layout;
  DenseGrid grid;
  O2PConfig o2p;

  /// Every kind in `kinds` pooled over every slot in `slots`.
  static FeatureConfig uniform(const std::vector<RegionSlot>& slots,
                               const std::vector<DescriptorKind>& kinds);
  /// Per-slot kinds, e.g. "F=eS+eMS+eL;SPF=eS;B=eS;G=eS".
  void set_layout(const std::string& spec);
  std::string layout_string() const;

  void validate() const;
  /// (kind, region) blocks in concatenation order.
  std::vector<std::pair<DescriptorKind, RegionId>> blocks() const;
  std::size_t feature_dim() const;
  bool uses(DescriptorKind kind) const;

  /// Stable text naming every setting; the digest is derived from it.
  std::string canonical() const;
  std::string digest() const;
  nlohmann::ordered_json to_json() const;
};

/// Per-image descriptor cache producing candidate features.
class ImageFeatureExtractor {
 public:
  /// `image` and `config` must outlive the extractor.
  ImageFeatureExtractor(const GrayImage& image, const FeatureConfig& config);

  std::vector<PooledFeature> blocks(const BinaryMask& candidate) const;
  std::vector<double> feature(const BinaryMask& candidate) const;

 private:
  const GrayImage& image_;
  const FeatureConfig& config_;
  std::vector<GridSample> samples_;
  std::optional<SiftExtractor> sift_;
  std::vector<LocalDescriptor> esift_;
  std::vector<LocalDescriptor> elbp_;
};

}  // namespace fbg
