#include <gtest/gtest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>

#include "fbg/dataset.hpp"
#include "fbg/error.hpp"
#include "fbg/evaluation.hpp"
#include "fbg/experiment.hpp"
#include "fbg/image_io.hpp"
#include "fbg/raster.hpp"
#include "fbg/synth.hpp"
#include "oracles.hpp"

using namespace fbg;
namespace fs = std::filesystem;

namespace {

BinaryMask rect(int w, int h, int x0, int y0, int x1, int y1) {
  BinaryMask m(w, h);
  for (int y = y0; y < y1; ++y) {
    for (int x = x0; x < x1; ++x) m.set(x, y);
  }
  return m;
}

class TempDir {
 public:
  explicit TempDir(const std::string& name)
      : path_(fs::temp_directory_path() / name) {
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  const fs::path& path() const { return path_; }

 private:
  fs::path path_;
};

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error raised";
  return ErrorCode::kIo;
}

// Writes a one-image dataset and returns the manifest path.
fs::path tiny_dataset(const fs::path& dir, const std::string& manifest_body) {
  save_gray_png(dir / "a.png", GrayImage(8, 8, 0.5));
  save_label_map_png(dir / "a_gt.png", LabelMap(8, 8));
  fs::create_directories(dir / "cand");
  save_mask_png(dir / "cand" / "m.png", rect(8, 8, 0, 0, 4, 4));
  std::ofstream(dir / "manifest.json") << manifest_body;
  return dir / "manifest.json";
}

const char* kImage =
    R"({"id": "a", "image": "a.png", "labels": "a_gt.png", "candidates": "cand"})";

}  // namespace

TEST(Targets, IouPerCategory) {
  LabelMap gt(8, 8);
  for (int y = 0; y < 8; ++y) {
    for (int x = 4; x < 8; ++x) gt.set(x, y, 1);
  }
  // Candidate: columns 2..5 (32 px); class 1 support 32 px; overlap 16.
  const auto t = candidate_targets(rect(8, 8, 2, 0, 6, 8), gt, 2);
  EXPECT_DOUBLE_EQ(t[1], 16.0 / 48.0);
  EXPECT_DOUBLE_EQ(t[0], 16.0 / 48.0);
}

TEST(Targets, VoidPixelsIgnored) {
  LabelMap gt(4, 4, kVoidLabel);
  gt.set(0, 0, 1);
  const auto t = candidate_targets(BinaryMask::full(4, 4), gt, 2);
  EXPECT_DOUBLE_EQ(t[1], 1.0);
  EXPECT_DOUBLE_EQ(t[0], 0.0);
}

TEST(Inference, GreedyPasteRules) {
  const std::vector<std::uint8_t> labels{1, 2};
  std::vector<ScoredCandidate> c{
      {0, rect(10, 10, 0, 0, 6, 10), {0.9, 0.1}},
      {1, rect(10, 10, 3, 0, 10, 10), {0.2, 0.8}},   // 3/7 covered: accepted
      {2, rect(10, 10, 0, 0, 5, 10), {0.7, 0.0}},    // fully covered: rejected
      {3, rect(10, 10, 0, 0, 10, 10), {0.25, 0.29}}, // below tau
  };
  const auto out = infer_labeling(c, labels, 0.3, 10, 10);
  ASSERT_EQ(out.accepted.size(), 2u);
  EXPECT_EQ(out.accepted[0].candidate, 0u);
  EXPECT_EQ(out.accepted[1].candidate, 1u);
  EXPECT_EQ(out.labels.at(2, 5), 1);
  EXPECT_EQ(out.labels.at(5, 5), 1);
  EXPECT_EQ(out.labels.at(6, 5), 2);
  EXPECT_EQ(out.owner[5 * 10 + 7], 1);
}

TEST(Inference, NothingAboveThresholdIsBackground) {
  const std::vector<std::uint8_t> labels{1};
  std::vector<ScoredCandidate> c{{0, BinaryMask::full(5, 5), {0.1}}};
  const auto out = infer_labeling(c, labels, 0.3, 5, 5);
  EXPECT_TRUE(out.accepted.empty());
  for (auto v : out.labels.labels()) EXPECT_EQ(v, kBackgroundLabel);
}

TEST(Inference, TiesBrokenByRankThenLabel) {
  const std::vector<std::uint8_t> labels{1, 2};
  const auto m = BinaryMask::full(4, 4);
  std::vector<ScoredCandidate> c{{5, m, {0.5, 0.5}}, {2, m, {0.5, 0.5}}};
  const auto out = infer_labeling(c, labels, 0.3, 4, 4);
  ASSERT_EQ(out.accepted.size(), 1u);
  EXPECT_EQ(out.accepted[0].candidate, 1u);
  EXPECT_EQ(out.accepted[0].label, 1);
}

TEST(Aac, TenWrongPixels) {
  LabelMap gt(20, 20);
  for (int y = 0; y < 20; ++y) {
    for (int x = 0; x < 10; ++x) gt.set(x, y, 1);
  }
  LabelMap pred = gt;
  for (int y = 0; y < 10; ++y) pred.set(0, y, 0);
  const std::vector<AacImage> imgs{{"a", &pred, &gt}};
  const auto r = aac(imgs, 2, true);
  EXPECT_DOUBLE_EQ(*r.accuracy[1], 100.0 * 190.0 / 200.0);
  EXPECT_DOUBLE_EQ(*r.accuracy[0], 100.0 * 200.0 / 210.0);
  const auto fg = aac(imgs, 2, false);
  EXPECT_EQ(fg.averaged, 1u);
  EXPECT_DOUBLE_EQ(fg.mean, 95.0);
}

TEST(Aac, VoidPixelsDoNotCount) {
  LabelMap gt(6, 6, 1);
  LabelMap pred(6, 6, 1);
  const auto base = aac(std::vector<AacImage>{{"a", &pred, &gt}}, 3, true);
  for (int x = 0; x < 6; ++x) {
    gt.set(x, 0, kVoidLabel);
    pred.set(x, 0, 2);
  }
  const auto r = aac(std::vector<AacImage>{{"a", &pred, &gt}}, 3, true);
  EXPECT_EQ(r.accuracy, base.accuracy);
  EXPECT_FALSE(r.accuracy[2].has_value());
  EXPECT_DOUBLE_EQ(r.mean, 100.0);
}

TEST(Aac, MatchesTripleLoop) {
  std::mt19937_64 rng(21);
  std::uniform_int_distribution<int> lab(0, 3);
  std::bernoulli_distribution flip(0.3), hole(0.05);
  for (int trial = 0; trial < 10; ++trial) {
    std::vector<LabelMap> preds, truths;
    for (int i = 0; i < 3; ++i) {
      LabelMap gt(12, 9), pr(12, 9);
      for (int y = 0; y < 9; ++y) {
        for (int x = 0; x < 12; ++x) {
          const auto g = static_cast<std::uint8_t>(lab(rng));
          gt.set(x, y, hole(rng) ? kVoidLabel : g);
          pr.set(x, y, flip(rng) ? static_cast<std::uint8_t>(lab(rng)) : g);
        }
      }
      truths.push_back(gt);
      preds.push_back(pr);
    }
    std::vector<AacImage> imgs;
    for (int i = 0; i < 3; ++i) imgs.push_back({"i", &preds[i], &truths[i]});
    for (bool bg : {true, false}) {
      const auto got = aac(imgs, 4, bg);
      const auto want = oracle::aac(preds, truths, 4, bg);
      for (int c = 0; c < 4; ++c) {
        ASSERT_EQ(got.accuracy[c].has_value(), want.accuracy[c].has_value());
        if (got.accuracy[c]) EXPECT_NEAR(*got.accuracy[c], *want.accuracy[c], 1e-9);
      }
      EXPECT_NEAR(got.mean, want.mean, 1e-9);
    }
  }
}

TEST(Dataset, MissingFileNamesThePath) {
  TempDir dir("fbg_ds_missing");
  const auto manifest = tiny_dataset(
      dir.path(), std::string(R"({"schema_version": 1, "categories": ["background", "x"],
        "splits": {"train": ["a"]}, "images": [)") + kImage + "]}");
  fs::remove(dir.path() / "a_gt.png");
  try {
    load_dataset(manifest);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kMissingFile);
    EXPECT_NE(e.message().find("a_gt.png"), std::string::npos);
  }
}

TEST(Dataset, StructuralErrors) {
  TempDir dir("fbg_ds_errors");
  const std::string images = std::string("[") + kImage + "]";
  auto load = [&](const std::string& body) {
    tiny_dataset(dir.path(), body);
    return load_dataset(dir.path() / "manifest.json");
  };
  EXPECT_EQ(code_of([&] {
              load(std::string(R"({"schema_version": 1, "categories": ["background", "x"], "images": [)") +
                   kImage + "," + kImage + "]}");
            }),
            ErrorCode::kDuplicateId);
  EXPECT_EQ(code_of([&] {
              load(R"({"schema_version": 1, "categories": ["background", "x", "x"], "images": )" +
                   images + "}");
            }),
            ErrorCode::kBadCategoryTable);
  EXPECT_EQ(code_of([&] { load(R"({"schema_version": 1, "categories": [], "images": )" + images + "}"); }),
            ErrorCode::kBadCategoryTable);
  EXPECT_EQ(code_of([&] {
              load(R"({"schema_version": 1, "categories": ["background"], "splits": {"train": ["zz"]},
                       "images": )" + images + "}");
            }),
            ErrorCode::kBadManifest);
  EXPECT_EQ(code_of([&] { load("{not json"); }), ErrorCode::kBadManifest);
}

TEST(Dataset, EmptySplitIsReportedByTheRunner) {
  TempDir dir("fbg_ds_empty");
  const auto manifest = tiny_dataset(
      dir.path(), std::string(R"({"schema_version": 1, "categories": ["background", "x"],
        "splits": {"train": [], "test": ["a"]}, "images": [)") + kImage + "]}");
  const auto m = load_dataset(manifest);
  EXPECT_TRUE(m.split("train").empty());
  RunOptions opts;
  opts.jobs = 1;
  EXPECT_EQ(code_of([&] {
              run_experiment(m, FeatureConfig::uniform({RegionSlot::kFigure},
                                                       {DescriptorKind::kELbp}),
                             opts);
            }),
            ErrorCode::kEmptySplit);
}

TEST(Dataset, VocImport) {
  TempDir dir("fbg_voc");
  const auto voc = dir.path() / "VOC";
  for (const char* sub : {"JPEGImages", "SegmentationClass", "SegmentationObject",
                          "ImageSets/Segmentation"}) {
    fs::create_directories(voc / sub);
  }
  std::mt19937_64 rng(3);
  const std::vector<std::string> ids{"2007_000001", "2007_000002", "2007_000003"};
  for (std::size_t i = 0; i < ids.size(); ++i) {
    save_gray_jpeg(voc / "JPEGImages" / (ids[i] + ".jpg"),
                   oracle::random_image(rng, 24, 16));
    LabelMap cls(24, 16), obj(24, 16);
    for (int y = 2; y < 10; ++y) {
      for (int x = 2; x < 10; ++x) {
        cls.set(x, y, static_cast<std::uint8_t>(5 + i));
        obj.set(x, y, 1);
      }
      cls.set(10, y, kVoidLabel);
      obj.set(10, y, kVoidLabel);
    }
    if (i == 2) {
      for (int x = 14; x < 20; ++x) {
        cls.set(x, 12, 15);
        obj.set(x, 12, 2);
      }
    }
    save_label_map_png(voc / "SegmentationClass" / (ids[i] + ".png"), cls);
    save_label_map_png(voc / "SegmentationObject" / (ids[i] + ".png"), obj);
  }
  std::ofstream(voc / "ImageSets/Segmentation/train.txt") << ids[0] << "\n" << ids[1] << "\n";
  std::ofstream(voc / "ImageSets/Segmentation/val.txt") << ids[2] << "\n";

  import_voc(voc, dir.path() / "out");
  const auto m = load_dataset(dir.path() / "out" / "manifest.json");
  ASSERT_EQ(m.categories.size(), 21u);
  EXPECT_EQ(m.categories[0], "background");
  EXPECT_EQ(m.split("train").size(), 2u);
  EXPECT_EQ(m.split("val").size(), 1u);
  EXPECT_EQ(m.image(ids[2]).candidates.size(), 2u);
  const auto cands = load_candidates(m.image(ids[0]));
  ASSERT_EQ(cands.size(), 1u);
  EXPECT_EQ(cands[0].mask.count(), 64u);
  const auto gt = load_label_map(m.image(ids[1]).labels);
  EXPECT_EQ(gt.at(3, 3), 6);
  EXPECT_EQ(gt.at(10, 3), kVoidLabel);
}

TEST(Synth, DeterministicInTheSeed) {
  SynthOptions o;
  o.n_train = 3;
  o.n_test = 2;
  o.image_size = 64;
  const auto a = synth_samples(o);
  const auto b = synth_samples(o);
  ASSERT_EQ(a.size(), 5u);
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].id, b[i].id);
    EXPECT_TRUE(std::ranges::equal(a[i].image.values(), b[i].image.values()));
    EXPECT_EQ(a[i].rank_order, b[i].rank_order);
  }
  o.seed = 2;
  EXPECT_FALSE(std::ranges::equal(synth_samples(o)[0].image.values(),
                                  a[0].image.values()));
}

TEST(Synth, SampleStructure) {
  SynthOptions o;
  o.n_train = 6;
  o.n_test = 1;
  o.image_size = 64;
  for (const auto& s : synth_samples(o)) {
    EXPECT_EQ(s.candidates.front(), s.object);
    auto order = s.rank_order;
    std::sort(order.begin(), order.end());
    for (std::size_t k = 0; k < order.size(); ++k) EXPECT_EQ(order[k], static_cast<int>(k));
    const auto dist = euclidean_distance_transform(s.object, Seeds::kInside,
                                                   ImageBoundary::kIgnore);
    for (int y = 0; y < 64; ++y) {
      for (int x = 0; x < 64; ++x) {
        EXPECT_EQ(s.labels.at(x, y), s.object.test(x, y) ? s.label : 0);
        if (s.halo.test(x, y)) {
          EXPECT_FALSE(s.object.test(x, y));
          EXPECT_LE(dist.squared(x, y), 25);
        }
      }
    }
  }
}

TEST(Synth, HaloOrientationEncodesTheClass) {
  SynthOptions o;
  o.n_train = 10;
  o.n_test = 1;
  o.image_size = 64;
  o.halo_amplitude = 0.3;
  for (const auto& s : synth_samples(o)) {
    double gx = 0.0, gy = 0.0;
    for (int y = 1; y + 1 < 64; ++y) {
      for (int x = 1; x + 1 < 64; ++x) {
        if (!s.halo.test(x, y) || !s.halo.test(x + 1, y) || !s.halo.test(x, y + 1)) {
          continue;
        }
        gx += std::abs(s.image.at(x + 1, y) - s.image.at(x, y));
        gy += std::abs(s.image.at(x, y + 1) - s.image.at(x, y));
      }
    }
    if (s.label == 1) {
      EXPECT_GT(gx, 2.0 * gy) << s.id;
    } else {
      EXPECT_GT(gy, 2.0 * gx) << s.id;
    }
  }
}

TEST(Experiment, MemorizesItsTrainingSet) {
  TempDir dir("fbg_memorize");
  SynthOptions o;
  o.n_train = 8;
  o.n_test = 1;
  o.image_size = 64;
  o.halo_amplitude = 0.3;
  auto m = synth_border_benchmark(o, dir.path());
  m.splits["test"] = m.splits["train"];
  auto config = FeatureConfig::uniform({RegionSlot::kFigure, RegionSlot::kBorder},
                                       {DescriptorKind::kESift});
  config.grid.stride = 8;
  RunOptions opts;
  opts.jobs = 1;
  opts.lambda = 1e-3;
  const auto r = run_experiment(m, config, opts);
  EXPECT_DOUBLE_EQ(r.aac.mean, 100.0);
  EXPECT_EQ(r.eval_ids.size(), 8u);
}
