#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"

#include "fbg/dataset.hpp"
#include "fbg/evaluation.hpp"
#include "fbg/features.hpp"
#include "fbg/model.hpp"

namespace fbg {

struct RunOptions {
  /// Ridge regularizer; values <= 0 select default_lambda(example count).
  double lambda = 0.0;
  double tau = 0.3;
  /// Worker threads; <= 0 means one per logical core.
  int jobs = 0;
  bool include_background = true;
  std::string train_split = "train";
  /// Empty picks "val" when the manifest has it, else "test".
  std::string eval_split;
};

struct CandidateFeature {
  std::string id;
  int rank = 0;
  BinaryMask mask;
  std::vector<double> feature;
};

struct ImageFeatures {
  const ImageEntry* entry = nullptr;
  LabelMap ground_truth;
  std::vector<CandidateFeature> candidates;
};

/// Loads every image of `entries`, its label map and candidates, and computes
/// candidate features. Output order follows `entries` regardless of `jobs`.
std::vector<ImageFeatures> extract_features(
    std::span<const ImageEntry* const> entries, const FeatureConfig& config,
    int jobs);

/// One example per candidate; targets are IoUs with the foreground
/// categories 1..K-1 of `categories`.
std::vector<TrainExample> training_examples(
    std::span<const ImageFeatures> images, std::size_t category_count);

/// Fits one scorer per foreground category. Scorer k predicts label k + 1.
LinearModel train_model(std::span<const ImageFeatures> images,
                        const std::vector<std::string>& categories,
                        const FeatureConfig& config, double lambda);

/// Scores and pastes the candidates of each image.
std::vector<Labeling> predict_images(std::span<const ImageFeatures> images,
                                     const LinearModel& model,
                                     const std::string& digest, double tau,
                                     int jobs);

struct ExperimentReport {
  nlohmann::ordered_json json;
  AacResult aac;
  std::vector<std::string> categories;
  std::vector<Labeling> labelings;
  std::vector<std::string> eval_ids;

  /// Aligned plain-text table: one row per category plus the mean.
  std::string table() const;
};

std::string resolve_eval_split(const DatasetManifest& manifest,
                               const RunOptions& options);

/// Extract, train on the train split, then score, paste and evaluate the
/// evaluation split.
ExperimentReport run_experiment(const DatasetManifest& manifest,
                                const FeatureConfig& config,
                                const RunOptions& options);

/// AAC of stored prediction label maps against the manifest's ground truth.
AacResult evaluate_predictions(const DatasetManifest& manifest,
                               const std::string& split,
                               const std::filesystem::path& prediction_dir,
                               bool include_background);

nlohmann::ordered_json aac_json(const AacResult& result,
                                const std::vector<std::string>& categories);
std::string aac_table(const AacResult& result,
                      const std::vector<std::string>& categories);

}  // namespace fbg
