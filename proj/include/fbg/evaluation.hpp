#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fbg/label_map.hpp"
#include "fbg/raster.hpp"

namespace fbg {

/// IoU of `mask` with the ground-truth support of every category index
/// 0..category_count-1. Void pixels count in neither intersection nor union.
std::vector<double> candidate_targets(const BinaryMask& mask,
                                      const LabelMap& ground_truth,
                                      std::size_t category_count);

struct ScoredCandidate {
  int rank = 0;
  BinaryMask mask;
  /// One score per entry of the `labels` table passed to infer_labeling.
  std::vector<double> scores;
};

struct Labeling {
  struct Accepted {
    std::size_t candidate = 0;
    std::uint8_t label = 0;
    double score = 0.0;
  };

  LabelMap labels;
  std::vector<Accepted> accepted;
  /// Index of the candidate that painted each pixel, -1 for background.
  std::vector<int> owner;
};

/// Greedy paster: (candidate, category) pairs by descending score, ties by
/// rank then label. A pair is accepted when its score reaches `tau` and at
/// least half of the candidate is still unlabeled; it paints only unlabeled
/// pixels. Everything left over is background.
Labeling infer_labeling(std::span<const ScoredCandidate> candidates,
                        std::span<const std::uint8_t> labels, double tau,
                        int width, int height);

struct AacImage {
  std::string id;
  const LabelMap* prediction = nullptr;
  const LabelMap* ground_truth = nullptr;
};

struct AacResult {
  /// Percent IoU per category; empty when the category never occurs in
  /// either prediction or ground truth.
  std::vector<std::optional<double>> accuracy;
  std::vector<std::uint64_t> true_positive;
  std::vector<std::uint64_t> false_positive;
  std::vector<std::uint64_t> false_negative;
  double mean = 0.0;
  std::size_t averaged = 0;
};

/// Dataset-global TP / (TP + FP + FN) per category over non-void pixels.
AacResult aac(std::span<const AacImage> images, std::size_t category_count,
              bool include_background = true);

}  // namespace fbg
