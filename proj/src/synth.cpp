#include "fbg/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>

#include "fbg/error.hpp"
#include "fbg/image_io.hpp"

namespace fbg {

namespace fs = std::filesystem;

namespace {

constexpr double kPi = std::numbers::pi;

// Distribution code is written out so that streams are identical across
// standard library implementations; mt19937_64 itself is fully specified.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  double uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  double normal() {
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * kPi * u2);
  }
  int below(int n) { return static_cast<int>(uniform() * n); }

 private:
  std::mt19937_64 engine_;
};

struct Ellipse {
  double cx, cy, a, b, angle;

  bool contains(double x, double y) const {
    const double dx = x - cx;
    const double dy = y - cy;
    const double c = std::cos(angle);
    const double s = std::sin(angle);
    const double u = (dx * c + dy * s) / a;
    const double v = (-dx * s + dy * c) / b;
    return u * u + v * v <= 1.0;
  }

  BinaryMask rasterize(int size) const {
    BinaryMask m(size, size);
    for (int y = 0; y < size; ++y) {
      for (int x = 0; x < size; ++x) {
        if (contains(x, y)) m.set(x, y);
      }
    }
    return m;
  }
};

double clamp01(double v) { return std::clamp(v, 0.0, 1.0); }

double grating(double x, double y, double orientation, double period,
               double phase) {
  return std::sin(2.0 * kPi *
                      (x * std::cos(orientation) + y * std::sin(orientation)) /
                      period +
                  phase);
}

SynthSample make_sample(Rng& rng, const SynthOptions& opt, std::string id,
                        std::uint8_t label) {
  const int n = opt.image_size;
  const double size = n;
  Ellipse object{rng.uniform(0.4 * size, 0.6 * size),
                 rng.uniform(0.4 * size, 0.6 * size),
                 rng.uniform(0.17 * size, 0.27 * size),
                 rng.uniform(0.17 * size, 0.27 * size),
                 rng.uniform(0.0, kPi)};

  SynthSample s;
  s.id = std::move(id);
  s.label = label;
  s.object = object.rasterize(n);
  s.halo = BinaryMask(n, n);
  BinaryMask rim(n, n);
  if (opt.variant == SynthVariant::kHalo) {
    const auto depth = euclidean_distance_transform(
        s.object, Seeds::kOutside, ImageBoundary::kBackground);
    for (int y = 0; y < n; ++y) {
      for (int x = 0; x < n; ++x) {
        if (s.object.test(x, y) && depth.at(x, y) <= opt.rim_width) {
          rim.set(x, y);
        }
      }
    }
    const auto reach = euclidean_distance_transform(s.object, Seeds::kInside,
                                                    ImageBoundary::kIgnore);
    for (int y = 0; y < n; ++y) {
      for (int x = 0; x < n; ++x) {
        if (!s.object.test(x, y) && reach.at(x, y) <= opt.halo_width) {
          s.halo.set(x, y);
        }
      }
    }
  }

  // Interior texture parameters (drawn identically for both classes in the
  // halo variant).
  const double inner_orientation = rng.uniform(0.0, kPi);
  const double inner_period = rng.uniform(5.0, 9.0);
  const double inner_phase = rng.uniform(0.0, 2.0 * kPi);
  const double halo_phase = rng.uniform(0.0, 2.0 * kPi);
  const double rim_orientation = rng.uniform() < 0.5 ? 0.0 : kPi / 2.0;
  const double rim_phase = rng.uniform(0.0, 2.0 * kPi);
  const double halo_orientation = label == 1 ? 0.0 : kPi / 2.0;
  // Background: line noise along a class-independent axis drawn from the
  // same two orientations the halos use.
  const bool rows_vary = rng.uniform() < 0.5;
  std::vector<double> line_noise(static_cast<std::size_t>(n));
  for (auto& v : line_noise) v = rng.uniform(-1.0, 1.0);
  const double mid_radius = (object.a + object.b) / 4.0;
  const double spokes = std::max(3.0, std::round(2.0 * kPi * mid_radius /
                                                 inner_period));

  std::vector<double> values(static_cast<std::size_t>(n) * n);
  for (int y = 0; y < n; ++y) {
    for (int x = 0; x < n; ++x) {
      double v = 0.5;
      if (rim.test(x, y)) {
        v += opt.halo_amplitude *
             grating(x, y, rim_orientation, 4.0, rim_phase);
      } else if (s.object.test(x, y)) {
        if (opt.variant == SynthVariant::kHalo) {
          v += 0.3 * grating(x, y, inner_orientation, inner_period, inner_phase);
        } else {
          const double dx = x - object.cx;
          const double dy = y - object.cy;
          const double r = std::hypot(dx, dy);
          v += label == 1
                   ? 0.3 * std::sin(2.0 * kPi * r / inner_period + inner_phase)
                   : 0.3 * std::sin(spokes * std::atan2(dy, dx) + inner_phase);
        }
      } else if (s.halo.test(x, y)) {
        v += opt.halo_amplitude * grating(x, y, halo_orientation, 4.0, halo_phase);
      } else {
        v += opt.ground_amplitude * line_noise[rows_vary ? y : x];
      }
      v += 0.04 * rng.normal();
      values[static_cast<std::size_t>(y) * n + x] = clamp01(v);
    }
  }
  s.image = GrayImage(n, n, std::move(values));

  s.labels = LabelMap(n, n, kBackgroundLabel);
  for (int y = 0; y < n; ++y) {
    for (int x = 0; x < n; ++x) {
      if (s.object.test(x, y)) s.labels.set(x, y, label);
    }
  }

  s.candidates.push_back(s.object);
  Ellipse shrunk = object;
  shrunk.a *= 0.6;
  shrunk.b *= 0.6;
  s.candidates.push_back(shrunk.rasterize(n));
  Ellipse shifted = object;
  const double dir = rng.uniform(0.0, 2.0 * kPi);
  const double dist = 0.6 * std::max(object.a, object.b);
  shifted.cx += dist * std::cos(dir);
  shifted.cy += dist * std::sin(dir);
  s.candidates.push_back(shifted.rasterize(n));
  std::erase_if(s.candidates, [](const BinaryMask& m) { return m.empty(); });

  s.rank_order.resize(s.candidates.size());
  for (std::size_t k = 0; k < s.rank_order.size(); ++k) {
    s.rank_order[k] = static_cast<int>(k);
  }
  for (std::size_t k = s.rank_order.size(); k > 1; --k) {
    std::swap(s.rank_order[k - 1], s.rank_order[rng.below(static_cast<int>(k))]);
  }
  return s;
}

}  // namespace

std::string to_string(SynthVariant v) {
  return v == SynthVariant::kHalo ? "halo" : "radial";
}

SynthVariant parse_synth_variant(const std::string& s) {
  if (s == "halo") return SynthVariant::kHalo;
  if (s == "radial") return SynthVariant::kRadial;
  throw Error(ErrorCode::kInvalidArgument,
              "unknown synthetic variant '" + s + "' (halo|radial)");
}

std::vector<SynthSample> synth_samples(const SynthOptions& options) {
  if (options.n_train < 1 || options.n_test < 1) {
    throw Error(ErrorCode::kInvalidArgument,
                "synthetic benchmark needs n_train >= 1 and n_test >= 1");
  }
  if (options.image_size < 32) {
    throw Error(ErrorCode::kInvalidArgument,
                "synthetic images must be at least 32 pixels wide");
  }
  Rng rng(options.seed);
  std::vector<SynthSample> out;
  char id[32];
  for (int i = 0; i < options.n_train + options.n_test; ++i) {
    const bool train = i < options.n_train;
    const int local = train ? i : i - options.n_train;
    std::snprintf(id, sizeof(id), "%s_%04d", train ? "train" : "test", local);
    const auto label = static_cast<std::uint8_t>(1 + local % 2);
    out.push_back(make_sample(rng, options, id, label));
  }
  return out;
}

DatasetManifest synth_border_benchmark(const SynthOptions& options,
                                       const fs::path& out_dir) {
  const auto samples = synth_samples(options);
  fs::create_directories(out_dir / "images");
  fs::create_directories(out_dir / "labels");
  DatasetManifest m;
  m.root = fs::absolute(out_dir);
  m.categories = {"background", "class_a", "class_b"};
  auto& train = m.splits["train"];
  auto& test = m.splits["test"];
  for (const auto& s : samples) {
    ImageEntry e;
    e.id = s.id;
    e.image = m.root / "images" / (s.id + ".png");
    e.labels = m.root / "labels" / (s.id + ".png");
    e.candidate_dir = m.root / "candidates" / s.id;
    e.ranking = e.candidate_dir / "ranking.txt";
    save_gray_png(e.image, s.image);
    save_label_map_png(e.labels, s.labels);
    fs::create_directories(e.candidate_dir);
    std::ofstream ranking(*e.ranking);
    for (int k : s.rank_order) {
      const auto cid = "c" + std::to_string(k);
      save_mask_png(e.candidate_dir / (cid + ".png"), s.candidates[k]);
      ranking << cid << "\n";
    }
    (s.id.starts_with("train") ? train : test).push_back(s.id);
    m.images.push_back(std::move(e));
  }
  const auto manifest = out_dir / "manifest.json";
  save_manifest(m, manifest);
  return load_dataset(manifest);
}

}  // namespace fbg
