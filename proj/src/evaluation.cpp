#include "fbg/evaluation.hpp"

#include <algorithm>
#include <tuple>

#include "fbg/error.hpp"

namespace fbg {

std::vector<double> candidate_targets(const BinaryMask& mask,
                                      const LabelMap& ground_truth,
                                      std::size_t category_count) {
  if (mask.width() != ground_truth.width() ||
      mask.height() != ground_truth.height()) {
    throw Error(ErrorCode::kDimensionMismatch,
                "candidate mask and ground truth differ in size");
  }
  std::vector<std::uint64_t> inter(category_count, 0);
  std::vector<std::uint64_t> gt_count(category_count, 0);
  std::uint64_t mask_count = 0;
  for (int y = 0; y < mask.height(); ++y) {
    for (int x = 0; x < mask.width(); ++x) {
      const auto g = ground_truth.at(x, y);
      if (g == kVoidLabel) continue;
      const bool m = mask.test(x, y);
      mask_count += m;
      if (g < category_count) {
        ++gt_count[g];
        inter[g] += m;
      }
    }
  }
  std::vector<double> iou(category_count, 0.0);
  for (std::size_t c = 0; c < category_count; ++c) {
    const auto uni = mask_count + gt_count[c] - inter[c];
    if (uni > 0) iou[c] = static_cast<double>(inter[c]) / static_cast<double>(uni);
  }
  return iou;
}

Labeling infer_labeling(std::span<const ScoredCandidate> candidates,
                        std::span<const std::uint8_t> labels, double tau,
                        int width, int height) {
  struct Pair {
    double score;
    int rank;
    std::uint8_t label;
    std::size_t candidate;
  };
  std::vector<Pair> pairs;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    const auto& c = candidates[i];
    if (c.mask.width() != width || c.mask.height() != height) {
      throw Error(ErrorCode::kDimensionMismatch,
                  "candidate mask differs from the image size");
    }
    if (c.scores.size() != labels.size()) {
      throw Error(ErrorCode::kDimensionMismatch,
                  "candidate needs one score per category");
    }
    for (std::size_t k = 0; k < labels.size(); ++k) {
      pairs.push_back({c.scores[k], c.rank, labels[k], i});
    }
  }
  std::sort(pairs.begin(), pairs.end(), [](const Pair& a, const Pair& b) {
    if (a.score != b.score) return a.score > b.score;
    return std::tie(a.rank, a.label, a.candidate) <
           std::tie(b.rank, b.label, b.candidate);
  });

  Labeling out{LabelMap(width, height, kBackgroundLabel), {},
               std::vector<int>(static_cast<std::size_t>(width) * height, -1)};
  for (const auto& p : pairs) {
    if (!(p.score >= tau)) break;
    const auto& mask = candidates[p.candidate].mask;
    std::size_t total = 0;
    std::size_t free = 0;
    for (int y = 0; y < height; ++y) {
      for (int x = 0; x < width; ++x) {
        if (!mask.test(x, y)) continue;
        ++total;
        free += out.owner[static_cast<std::size_t>(y) * width + x] < 0;
      }
    }
    if (total == 0 || 2 * free < total) continue;
    for (int y = 0; y < height; ++y) {
      for (int x = 0; x < width; ++x) {
        auto& owner = out.owner[static_cast<std::size_t>(y) * width + x];
        if (mask.test(x, y) && owner < 0) {
          owner = static_cast<int>(p.candidate);
          out.labels.set(x, y, p.label);
        }
      }
    }
    out.accepted.push_back({p.candidate, p.label, p.score});
  }
  return out;
}

AacResult aac(std::span<const AacImage> images, std::size_t category_count,
              bool include_background) {
  AacResult r;
  r.true_positive.assign(category_count, 0);
  r.false_positive.assign(category_count, 0);
  r.false_negative.assign(category_count, 0);
  for (const auto& img : images) {
    const auto& pred = *img.prediction;
    const auto& gt = *img.ground_truth;
    if (pred.width() != gt.width() || pred.height() != gt.height()) {
      throw Error(ErrorCode::kDimensionMismatch,
                  "prediction and ground truth differ in size for image " +
                      img.id);
    }
    const auto p = pred.labels();
    const auto g = gt.labels();
    for (std::size_t i = 0; i < g.size(); ++i) {
      if (g[i] == kVoidLabel) continue;
      if (p[i] == g[i]) {
        if (g[i] < category_count) ++r.true_positive[g[i]];
        continue;
      }
      if (g[i] < category_count) ++r.false_negative[g[i]];
      if (p[i] < category_count) ++r.false_positive[p[i]];
    }
  }
  r.accuracy.assign(category_count, std::nullopt);
  double sum = 0.0;
  for (std::size_t c = 0; c < category_count; ++c) {
    const auto denom =
        r.true_positive[c] + r.false_positive[c] + r.false_negative[c];
    if (denom == 0) continue;
    const double acc = 100.0 * static_cast<double>(r.true_positive[c]) /
                       static_cast<double>(denom);
    r.accuracy[c] = acc;
    if (c == kBackgroundLabel && !include_background) continue;
    sum += acc;
    ++r.averaged;
  }
  r.mean = r.averaged > 0 ? sum / static_cast<double>(r.averaged) : 0.0;
  return r;
}

}  // namespace fbg
