#include "fbg/experiment.hpp"

#include <algorithm>
#include <cstdio>
#include <sstream>

#include "fbg/error.hpp"
#include "fbg/image_io.hpp"
#include "fbg/parallel.hpp"

namespace fbg {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

[[noreturn]] void rethrow_with(const std::string& where) {
  try {
    throw;
  } catch (const Error& e) {
    throw Error(e.code(), where + ": " + e.message());
  } catch (const std::exception& e) {
    throw Error(ErrorCode::kIo, where + ": " + e.what());
  }
}

ImageFeatures extract_one(const ImageEntry& entry, const FeatureConfig& config) {
  const auto where = "image '" + entry.id + "'";
  ImageFeatures out;
  out.entry = &entry;
  GrayImage image;
  std::vector<CandidateRecord> records;
  try {
    image = load_gray(entry.image);
    out.ground_truth = load_label_map(entry.labels);
    if (out.ground_truth.width() != image.width() ||
        out.ground_truth.height() != image.height()) {
      throw Error(ErrorCode::kDimensionMismatch,
                  "label map size differs from the image");
    }
    records = load_candidates(entry);
  } catch (...) {
    rethrow_with(where);
  }
  ImageFeatureExtractor extractor(image, config);
  for (auto& r : records) {
    try {
      auto f = extractor.feature(r.mask);
      out.candidates.push_back({r.id, r.rank, std::move(r.mask), std::move(f)});
    } catch (...) {
      rethrow_with(where + " candidate '" + r.id + "'");
    }
  }
  return out;
}

std::vector<std::uint8_t> foreground_labels(const LinearModel& model) {
  std::vector<std::uint8_t> labels;
  for (std::size_t k = 0; k < model.categories().size(); ++k) {
    labels.push_back(static_cast<std::uint8_t>(k + 1));
  }
  return labels;
}

std::string format_fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
  return buf;
}

}  // namespace

std::vector<ImageFeatures> extract_features(
    std::span<const ImageEntry* const> entries, const FeatureConfig& config,
    int jobs) {
  config.validate();
  std::vector<ImageFeatures> out(entries.size());
  parallel_for(entries.size(), jobs,
               [&](std::size_t i) { out[i] = extract_one(*entries[i], config); });
  return out;
}

std::vector<TrainExample> training_examples(
    std::span<const ImageFeatures> images, std::size_t category_count) {
  std::vector<TrainExample> examples;
  for (const auto& img : images) {
    for (const auto& c : img.candidates) {
      auto iou = candidate_targets(c.mask, img.ground_truth, category_count);
      TrainExample ex;
      ex.feature = c.feature;
      ex.targets.assign(iou.begin() + 1, iou.end());
      examples.push_back(std::move(ex));
    }
  }
  return examples;
}

LinearModel train_model(std::span<const ImageFeatures> images,
                        const std::vector<std::string>& categories,
                        const FeatureConfig& config, double lambda) {
  if (categories.size() < 2) {
    throw Error(ErrorCode::kBadCategoryTable,
                "training needs at least one foreground category");
  }
  const auto examples = training_examples(images, categories.size());
  if (examples.empty()) {
    throw Error(ErrorCode::kEmptySplit, "training split has no candidates");
  }
  RidgeOptions opts;
  opts.lambda = lambda > 0.0 ? lambda : default_lambda(examples.size());
  std::vector<std::string> fg(categories.begin() + 1, categories.end());
  return train_ridge(examples, opts, std::move(fg), config.digest());
}

std::vector<Labeling> predict_images(std::span<const ImageFeatures> images,
                                     const LinearModel& model,
                                     const std::string& digest, double tau,
                                     int jobs) {
  const auto labels = foreground_labels(model);
  std::vector<Labeling> out(images.size());
  parallel_for(images.size(), jobs, [&](std::size_t i) {
    const auto& img = images[i];
    std::vector<ScoredCandidate> scored;
    scored.reserve(img.candidates.size());
    for (const auto& c : img.candidates) {
      scored.push_back({c.rank, c.mask, model.score(c.feature, digest)});
    }
    out[i] = infer_labeling(scored, labels, tau, img.ground_truth.width(),
                            img.ground_truth.height());
  });
  return out;
}

std::string resolve_eval_split(const DatasetManifest& manifest,
                               const RunOptions& options) {
  if (!options.eval_split.empty()) return options.eval_split;
  return manifest.has_split("val") ? "val" : "test";
}

json aac_json(const AacResult& result,
              const std::vector<std::string>& categories) {
  json per = json::array();
  for (std::size_t c = 0; c < categories.size(); ++c) {
    json row;
    row["index"] = c;
    row["name"] = categories[c];
    row["accuracy"] = result.accuracy[c] ? json(*result.accuracy[c]) : json();
    row["tp"] = result.true_positive[c];
    row["fp"] = result.false_positive[c];
    row["fn"] = result.false_negative[c];
    per.push_back(std::move(row));
  }
  json j;
  j["categories"] = per;
  j["mean"] = result.mean;
  j["averaged_categories"] = result.averaged;
  return j;
}

std::string aac_table(const AacResult& result,
                      const std::vector<std::string>& categories) {
  std::size_t width = 4;
  for (const auto& n : categories) width = std::max(width, n.size());
  std::ostringstream out;
  auto row = [&](const std::string& name, const std::string& value) {
    out << name << std::string(width - name.size() + 2, ' ');
    out << std::string(value.size() < 8 ? 8 - value.size() : 0, ' ') << value
        << "\n";
  };
  row("category", "accuracy");
  for (std::size_t c = 0; c < categories.size(); ++c) {
    row(categories[c],
        result.accuracy[c] ? format_fixed(*result.accuracy[c], 2) : "-");
  }
  row("mean", format_fixed(result.mean, 2));
  return out.str();
}

std::string ExperimentReport::table() const { return aac_table(aac, categories); }

ExperimentReport run_experiment(const DatasetManifest& manifest,
                                const FeatureConfig& config,
                                const RunOptions& options) {
  config.validate();
  if (!(options.tau >= 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "tau must be >= 0");
  }
  const auto eval_name = resolve_eval_split(manifest, options);
  const auto train_entries = manifest.split(options.train_split);
  const auto eval_entries = manifest.split(eval_name);
  if (train_entries.empty()) {
    throw Error(ErrorCode::kEmptySplit,
                "split '" + options.train_split + "' has no images");
  }
  if (eval_entries.empty()) {
    throw Error(ErrorCode::kEmptySplit,
                "split '" + eval_name + "' has no images");
  }

  const auto train_feats = extract_features(train_entries, config, options.jobs);
  const auto model =
      train_model(train_feats, manifest.categories, config, options.lambda);
  const auto eval_feats = extract_features(eval_entries, config, options.jobs);

  ExperimentReport report;
  report.categories = manifest.categories;
  report.labelings = predict_images(eval_feats, model, config.digest(),
                                    options.tau, options.jobs);
  std::vector<AacImage> pairs;
  for (std::size_t i = 0; i < eval_feats.size(); ++i) {
    report.eval_ids.push_back(eval_feats[i].entry->id);
    pairs.push_back({eval_feats[i].entry->id, &report.labelings[i].labels,
                     &eval_feats[i].ground_truth});
  }
  report.aac =
      aac(pairs, manifest.categories.size(), options.include_background);

  std::size_t train_candidates = 0;
  for (const auto& f : train_feats) train_candidates += f.candidates.size();

  json j;
  j["features"] = config.to_json();
  json run;
  run["lambda"] = model.lambda();
  run["tau"] = options.tau;
  run["include_background"] = options.include_background;
  run["train_split"] = options.train_split;
  run["eval_split"] = eval_name;
  run["max_candidates"] = manifest.max_candidates;
  j["run"] = run;
  json data;
  data["train_images"] = train_feats.size();
  data["train_candidates"] = train_candidates;
  data["eval_images"] = eval_feats.size();
  j["data"] = data;
  j["aac"] = aac_json(report.aac, manifest.categories);
  report.json = std::move(j);
  return report;
}

AacResult evaluate_predictions(const DatasetManifest& manifest,
                               const std::string& split,
                               const fs::path& prediction_dir,
                               bool include_background) {
  const auto entries = manifest.split(split);
  if (entries.empty()) {
    throw Error(ErrorCode::kEmptySplit, "split '" + split + "' has no images");
  }
  std::vector<LabelMap> preds;
  std::vector<LabelMap> gts;
  preds.reserve(entries.size());
  gts.reserve(entries.size());
  std::vector<AacImage> pairs;
  for (const auto* e : entries) {
    const auto path = prediction_dir / (e->id + ".png");
    if (!fs::exists(path)) throw Error(ErrorCode::kMissingFile, path.string());
    preds.push_back(load_label_map(path));
    gts.push_back(load_label_map(e->labels));
  }
  for (std::size_t i = 0; i < entries.size(); ++i) {
    pairs.push_back({entries[i]->id, &preds[i], &gts[i]});
  }
  return aac(pairs, manifest.categories.size(), include_background);
}

}  // namespace fbg
