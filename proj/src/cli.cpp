#include "fbg/cli.hpp"

#include <algorithm>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"

#include "fbg/error.hpp"
#include "fbg/experiment.hpp"
#include "fbg/feature_io.hpp"
#include "fbg/image_io.hpp"
#include "fbg/synth.hpp"

namespace fbg {

namespace fs = std::filesystem;

namespace {

// A flag combination rejected after CLI11 accepted each flag on its own.
struct UsageError {
  std::string flag;
  std::string message;
};

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, ',')) {
    if (!cur.empty()) out.push_back(cur);
  }
  return out;
}

struct PartitionFlags {
  double border_width = 5.0;
  std::string border_side = "exterior";
  std::string sp = "none";
  int layers = 4;
  CLI::Option* layers_opt = nullptr;
};

struct FeatureFlags {
  PartitionFlags partition;
  std::string descriptors = "eSIFT";
  std::string regions = "F,B";
  std::string layout;
  int stride = 4;
  std::string scales = "16,24,32";
  double epsilon = 1e-3;
  double power = 0.5;
};

void add_partition_flags(CLI::App* app, PartitionFlags& f) {
  app->add_option("--border-width", f.border_width, "Border width in pixels")
      ->capture_default_str()
      ->check(CLI::NonNegativeNumber);
  app->add_option("--border-side", f.border_side,
                  "Side of the contour the Border occupies")
      ->capture_default_str()
      ->check(CLI::IsMember({"exterior", "interior", "straddle"}));
  app->add_option("--sp", f.sp, "Spatial pyramid over the Figure")
      ->capture_default_str()
      ->check(CLI::IsMember({"none", "crown", "cartesian"}));
  f.layers_opt = app->add_option("--layers", f.layers, "Crown layers")
                     ->capture_default_str()
                     ->check(CLI::PositiveNumber);
}

void add_grid_flags(CLI::App* app, FeatureFlags& f) {
  app->add_option("--descriptors", f.descriptors,
                  "Comma list of eSIFT, eMSIFT, eLBP")
      ->capture_default_str();
  app->add_option("--stride", f.stride, "Dense grid stride")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  app->add_option("--scales", f.scales, "Comma list of patch sizes")
      ->capture_default_str();
}

void add_feature_flags(CLI::App* app, FeatureFlags& f) {
  add_partition_flags(app, f.partition);
  add_grid_flags(app, f);
  app->add_option("--regions", f.regions, "Comma list of F, SPF, B, G")
      ->capture_default_str();
  app->add_option("--layout", f.layout,
                  "Per-region kinds, e.g. F=eS+eL;SPF=eS;B=eS (overrides "
                  "--regions and --descriptors)");
  app->add_option("--epsilon", f.epsilon, "O2P regularizer")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  app->add_option("--power", f.power, "Power-normalization exponent")
      ->capture_default_str()
      ->check(CLI::Range(0.0, 1.0));
}

SpConfig sp_config(const PartitionFlags& f) {
  SpConfig sp;
  sp.kind = parse_sp_kind(f.sp);
  if (f.layers_opt && f.layers_opt->count() > 0 && sp.kind != SpKind::kCrown) {
    throw UsageError{"--layers", "--layers requires --sp crown"};
  }
  sp.layers = f.layers;
  return sp;
}

std::vector<DescriptorKind> parse_kinds(const std::string& list) {
  std::vector<DescriptorKind> kinds;
  for (const auto& k : split_list(list)) {
    try {
      kinds.push_back(parse_descriptor_kind(k));
    } catch (const Error& e) {
      throw UsageError{"--descriptors", e.message()};
    }
  }
  if (kinds.empty()) throw UsageError{"--descriptors", "no descriptor named"};
  return kinds;
}

DenseGrid parse_grid(const FeatureFlags& f) {
  DenseGrid grid;
  grid.stride = f.stride;
  grid.scales.clear();
  for (const auto& s : split_list(f.scales)) {
    try {
      std::size_t used = 0;
      const int v = std::stoi(s, &used);
      if (used != s.size()) throw std::invalid_argument(s);
      grid.scales.push_back(v);
    } catch (const std::exception&) {
      throw UsageError{"--scales", "'" + s + "' is not an integer"};
    }
  }
  try {
    grid.validate();
  } catch (const Error& e) {
    throw UsageError{"--scales", e.message()};
  }
  return grid;
}

FeatureConfig feature_config(const FeatureFlags& f) {
  FeatureConfig c;
  if (f.layout.empty()) {
    std::vector<RegionSlot> slots;
    for (const auto& r : split_list(f.regions)) {
      try {
        slots.push_back(parse_region_slot(r));
      } catch (const Error& e) {
        throw UsageError{"--regions", e.message()};
      }
    }
    c = FeatureConfig::uniform(slots, parse_kinds(f.descriptors));
  } else {
    try {
      c.set_layout(f.layout);
    } catch (const Error& e) {
      throw UsageError{"--layout", e.message()};
    }
  }
  c.border_width = f.partition.border_width;
  c.border_side = parse_border_side(f.partition.border_side);
  c.sp = sp_config(f.partition);
  c.grid = parse_grid(f);
  c.o2p.epsilon = f.epsilon;
  c.o2p.power = f.power;
  try {
    c.validate();
  } catch (const Error& e) {
    throw UsageError{f.layout.empty() ? "--regions" : "--layout", e.message()};
  }
  return c;
}

void write_json(const fs::path& path, const nlohmann::ordered_json& j) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  out << j.dump(2) << "\n";
}

struct Context {
  std::ostream& out;
  std::ostream& err;
};

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out,
            std::ostream& err) {
  CLI::App app{"Figure/Border/Ground pooling for candidate-based semantic "
               "segmentation",
               "fbgseg"};
  app.require_subcommand(1);

  // partition
  PartitionFlags part;
  std::string part_mask, part_out;
  auto* partition = app.add_subcommand(
      "partition", "Write the Figure/Border/Ground partition of a mask");
  partition->add_option("--mask", part_mask, "Candidate mask PNG")->required();
  partition->add_option("--out", part_out, "Indexed PNG output")->required();
  add_partition_flags(partition, part);

  // describe
  FeatureFlags desc;
  std::string desc_image, desc_mask, desc_out;
  auto* describe =
      app.add_subcommand("describe", "Dump dense local descriptors");
  describe->add_option("--image", desc_image, "Input image")->required();
  describe->add_option("--mask", desc_mask, "Mask (required by eMSIFT)");
  describe->add_option("--out", desc_out, "Row dump output")->required();
  add_grid_flags(describe, desc);

  // pool
  FeatureFlags pool_flags;
  std::string pool_image, pool_mask, pool_out;
  auto* pool = app.add_subcommand(
      "pool", "Compute the pooled feature of one candidate");
  pool->add_option("--image", pool_image, "Input image")->required();
  pool->add_option("--mask", pool_mask, "Candidate mask PNG")->required();
  pool->add_option("--out", pool_out, "Row dump output (one row)")->required();
  add_feature_flags(pool, pool_flags);

  // train
  FeatureFlags train_flags;
  std::string train_manifest, train_out, train_split = "train";
  double train_lambda = 0.0;
  int train_jobs = 0;
  auto* train = app.add_subcommand("train", "Fit per-category scorers");
  train->add_option("--manifest", train_manifest, "Dataset manifest")
      ->required();
  train->add_option("--out", train_out, "Model file")->required();
  train->add_option("--split", train_split, "Training split")
      ->capture_default_str();
  train->add_option("--lambda", train_lambda,
                    "Ridge regularizer (default 1e-4 per example)");
  train->add_option("--jobs", train_jobs, "Worker threads (0 = all cores)");
  add_feature_flags(train, train_flags);

  // predict
  FeatureFlags pred_flags;
  std::string pred_manifest, pred_model, pred_out, pred_split;
  double pred_tau = 0.3;
  int pred_jobs = 0;
  auto* predict = app.add_subcommand(
      "predict", "Write predicted label maps for a split");
  predict->add_option("--manifest", pred_manifest, "Dataset manifest")
      ->required();
  predict->add_option("--model", pred_model, "Model file")->required();
  predict->add_option("--out", pred_out, "Output directory")->required();
  predict->add_option("--split", pred_split, "Split (default val, else test)");
  predict->add_option("--tau", pred_tau, "Acceptance threshold")
      ->capture_default_str();
  predict->add_option("--jobs", pred_jobs, "Worker threads (0 = all cores)");
  add_feature_flags(predict, pred_flags);

  // evaluate
  std::string eval_manifest, eval_pred, eval_split, eval_out;
  bool eval_background = true;
  auto* evaluate = app.add_subcommand(
      "evaluate", "Score stored label maps against the ground truth");
  evaluate->add_option("--manifest", eval_manifest, "Dataset manifest")
      ->required();
  evaluate->add_option("--predictions", eval_pred, "Directory of <id>.png")
      ->required();
  evaluate->add_option("--split", eval_split, "Split (default val, else test)");
  evaluate->add_option("--out", eval_out, "Report JSON");
  evaluate->add_option("--include-background", eval_background,
                       "Average the background category too")
      ->capture_default_str();

  // synth
  SynthOptions synth_opts;
  std::string synth_out, synth_variant = "halo";
  auto* synth = app.add_subcommand("synth", "Generate the synthetic benchmark");
  synth->add_option("--out", synth_out, "Output directory")->required();
  synth->add_option("--seed", synth_opts.seed, "Generator seed")
      ->capture_default_str();
  synth->add_option("--n-train", synth_opts.n_train, "Training images")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  synth->add_option("--n-test", synth_opts.n_test, "Test images")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  synth->add_option("--image-size", synth_opts.image_size, "Image side length")
      ->capture_default_str()
      ->check(CLI::Range(32, 1024));
  synth->add_option("--halo-amplitude", synth_opts.halo_amplitude,
                    "Amplitude of the class-specific ring texture")
      ->capture_default_str()
      ->check(CLI::Range(0.0, 0.5));
  synth->add_option("--rim-width", synth_opts.rim_width,
                    "Width of the class-independent inner ring")
      ->capture_default_str()
      ->check(CLI::Range(0.0, 16.0));
  synth->add_option("--ground-amplitude", synth_opts.ground_amplitude,
                    "Amplitude of the background line noise")
      ->capture_default_str()
      ->check(CLI::Range(0.0, 0.5));
  synth->add_option("--variant", synth_variant, "halo or radial")
      ->capture_default_str()
      ->check(CLI::IsMember({"halo", "radial"}));

  // run
  FeatureFlags run_flags;
  RunOptions run_opts;
  std::string run_manifest, run_out;
  auto* run = app.add_subcommand(
      "run", "Train, predict and evaluate in one go; print the AAC table");
  run->add_option("--manifest", run_manifest, "Dataset manifest")->required();
  run->add_option("--out", run_out, "Report JSON");
  run->add_option("--lambda", run_opts.lambda,
                  "Ridge regularizer (default 1e-4 per example)");
  run->add_option("--tau", run_opts.tau, "Acceptance threshold")
      ->capture_default_str();
  run->add_option("--jobs", run_opts.jobs, "Worker threads (0 = all cores)");
  run->add_option("--include-background", run_opts.include_background,
                  "Average the background category too")
      ->capture_default_str();
  run->add_option("--train-split", run_opts.train_split, "Training split")
      ->capture_default_str();
  run->add_option("--eval-split", run_opts.eval_split,
                  "Evaluation split (default val, else test)");
  add_feature_flags(run, run_flags);

  // visualize
  PartitionFlags vis;
  std::string vis_mask, vis_image, vis_labels, vis_out;
  auto* visualize = app.add_subcommand(
      "visualize", "Render a partition or a label map as an RGB PNG");
  auto* vis_mask_opt =
      visualize->add_option("--mask", vis_mask, "Candidate mask PNG");
  visualize->add_option("--image", vis_image, "Image to blend under the partition")
      ->needs(vis_mask_opt);
  auto* vis_labels_opt =
      visualize->add_option("--labels", vis_labels, "Label map PNG");
  vis_mask_opt->excludes(vis_labels_opt);
  visualize->add_option("--out", vis_out, "RGB PNG output")->required();
  add_partition_flags(visualize, vis);

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "fbgseg: " << e.what() << "\n\n" << app.help();
    return kExitUsage;
  }

  Context ctx{out, err};
  try {
    if (*partition) {
      const auto sp = sp_config(part);
      const auto mask = load_mask(part_mask);
      const auto p = compose_partition(mask, part.border_width, sp,
                                       parse_border_side(part.border_side));
      save_partition_png(part_out, p);
      ctx.out << "figure " << p.count(RegionId::figure()) << " border "
              << p.count(RegionId::border()) << " ground "
              << p.count(RegionId::ground()) << "\n";
    } else if (*describe) {
      const auto kinds = parse_kinds(desc.descriptors);
      if (kinds.size() != 1) {
        throw UsageError{"--descriptors", "describe takes exactly one kind"};
      }
      const auto grid = parse_grid(desc);
      const auto image = load_gray(desc_image);
      const Rect whole{0, 0, image.width(), image.height()};
      std::vector<LocalDescriptor> d;
      if (kinds[0] == DescriptorKind::kEMSift) {
        if (desc_mask.empty()) {
          throw UsageError{"--mask", "eMSIFT needs --mask"};
        }
        const auto mask = load_mask(desc_mask);
        if (mask.empty()) {
          throw Error(ErrorCode::kEmptyFigure, desc_mask + " is empty");
        }
        d = dense_sift(image, grid, &mask, mask.bounding_box());
      } else if (kinds[0] == DescriptorKind::kESift) {
        d = dense_sift(image, grid, nullptr, whole);
      } else {
        d = dense_lbp(image, grid, whole);
      }
      std::vector<std::vector<double>> rows;
      rows.reserve(d.size());
      for (auto& x : d) rows.push_back(std::move(x.vector));
      write_row_dump(desc_out, rows, descriptor_dim(kinds[0]));
      ctx.out << rows.size() << " descriptors of dimension "
              << descriptor_dim(kinds[0]) << "\n";
    } else if (*pool) {
      const auto config = feature_config(pool_flags);
      const auto image = load_gray(pool_image);
      const auto mask = load_mask(pool_mask);
      ImageFeatureExtractor extractor(image, config);
      std::vector<std::vector<double>> rows{extractor.feature(mask)};
      write_row_dump(pool_out, rows,
                     static_cast<std::uint32_t>(config.feature_dim()));
      ctx.out << "feature dimension " << config.feature_dim() << " digest "
              << config.digest() << "\n";
    } else if (*train) {
      const auto config = feature_config(train_flags);
      const auto manifest = load_dataset(train_manifest);
      const auto entries = manifest.split(train_split);
      if (entries.empty()) {
        throw Error(ErrorCode::kEmptySplit,
                    "split '" + train_split + "' has no images");
      }
      const auto feats = extract_features(entries, config, train_jobs);
      const auto model =
          train_model(feats, manifest.categories, config, train_lambda);
      model.save(train_out);
      auto sidecar = fs::path(train_out);
      sidecar.replace_extension(".json");
      model.save_sidecar(sidecar);
      ctx.out << "trained " << model.categories().size()
              << " scorers on dimension " << model.feature_dim() << "\n";
    } else if (*predict) {
      const auto config = feature_config(pred_flags);
      const auto manifest = load_dataset(pred_manifest);
      RunOptions o;
      o.eval_split = pred_split;
      const auto split = resolve_eval_split(manifest, o);
      const auto entries = manifest.split(split);
      if (entries.empty()) {
        throw Error(ErrorCode::kEmptySplit,
                    "split '" + split + "' has no images");
      }
      const auto model = LinearModel::load(pred_model);
      if (model.digest() != config.digest()) {
        throw Error(ErrorCode::kConfigMismatch,
                    "model was trained with feature digest " + model.digest() +
                        " but the flags give " + config.digest());
      }
      const auto feats = extract_features(entries, config, pred_jobs);
      const auto labelings =
          predict_images(feats, model, config.digest(), pred_tau, pred_jobs);
      fs::create_directories(pred_out);
      for (std::size_t i = 0; i < feats.size(); ++i) {
        save_label_map_png(fs::path(pred_out) / (feats[i].entry->id + ".png"),
                           labelings[i].labels);
      }
      ctx.out << "wrote " << feats.size() << " label maps to " << pred_out
              << "\n";
    } else if (*evaluate) {
      const auto manifest = load_dataset(eval_manifest);
      RunOptions o;
      o.eval_split = eval_split;
      const auto split = resolve_eval_split(manifest, o);
      const auto result =
          evaluate_predictions(manifest, split, eval_pred, eval_background);
      if (!eval_out.empty()) {
        auto j = aac_json(result, manifest.categories);
        j["split"] = split;
        j["include_background"] = eval_background;
        write_json(eval_out, j);
      }
      ctx.out << aac_table(result, manifest.categories);
    } else if (*synth) {
      synth_opts.variant = parse_synth_variant(synth_variant);
      const auto m = synth_border_benchmark(synth_opts, synth_out);
      ctx.out << "wrote " << m.images.size() << " images and "
              << (fs::path(synth_out) / "manifest.json").string() << "\n";
    } else if (*run) {
      const auto config = feature_config(run_flags);
      const auto manifest = load_dataset(run_manifest);
      const auto report = run_experiment(manifest, config, run_opts);
      if (!run_out.empty()) write_json(run_out, report.json);
      ctx.out << report.table();
    } else if (*visualize) {
      if (vis_mask.empty() && vis_labels.empty()) {
        throw UsageError{"--mask", "visualize needs --mask or --labels"};
      }
      if (!vis_labels.empty()) {
        save_label_map_png(vis_out, load_label_map(vis_labels));
      } else {
        const auto sp = sp_config(vis);
        const auto mask = load_mask(vis_mask);
        const auto p = compose_partition(mask, vis.border_width, sp,
                                         parse_border_side(vis.border_side));
        const auto idx = partition_palette_indices(p);
        const auto& palette = partition_palette();
        std::vector<Rgb> pixels(idx.size());
        GrayImage image;
        if (!vis_image.empty()) {
          image = load_gray(vis_image);
          if (image.width() != mask.width() ||
              image.height() != mask.height()) {
            throw Error(ErrorCode::kDimensionMismatch,
                        "image and mask sizes differ");
          }
        }
        for (std::size_t i = 0; i < idx.size(); ++i) {
          const auto& c = palette[idx[i]];
          if (vis_image.empty()) {
            pixels[i] = c;
            continue;
          }
          const int x = static_cast<int>(i) % mask.width();
          const int y = static_cast<int>(i) / mask.width();
          const double g = image.at(x, y) * 255.0;
          for (int k = 0; k < 3; ++k) {
            const double v = idx[i] == 0 ? g : 0.5 * g + 0.5 * c[k];
            pixels[i][k] = static_cast<std::uint8_t>(std::lround(v));
          }
        }
        save_rgb_png(vis_out, mask.width(), mask.height(), pixels);
      }
    }
  } catch (const UsageError& e) {
    err << "fbgseg: " << e.flag << ": " << e.message << "\n\n" << app.help();
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "fbgseg: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitOk;
}

}  // namespace fbg
