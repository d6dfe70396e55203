#pragma once

#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "fbg/dataset.hpp"
#include "fbg/label_map.hpp"
#include "fbg/raster.hpp"

namespace fbg {

/// kHalo: both classes share the interior texture distribution and differ
/// only in the texture of the ring just outside the object.
/// kRadial: no class-specific ring; class A fills the object with concentric
/// rings, class B with radial spokes.
enum class SynthVariant { kHalo, kRadial };

std::string to_string(SynthVariant v);
SynthVariant parse_synth_variant(const std::string& s);

struct SynthOptions {
  std::uint64_t seed = 1;
  int n_train = 200;
  int n_test = 100;
  SynthVariant variant = SynthVariant::kHalo;
  int image_size = 128;
  /// Width of the class-specific ring painted around the object.
  double halo_width = 5.0;
  double halo_amplitude = 0.1;
  /// Width of the class-independent ring painted just inside the object.
  double rim_width = 0.0;
  /// Amplitude of the oriented line noise outside object and halo.
  double ground_amplitude = 0.3;
};

struct SynthSample {
  std::string id;
  GrayImage image;
  BinaryMask object;
  /// Pixels of the halo ring (empty for the radial variant).
  BinaryMask halo;
  LabelMap labels;
  std::uint8_t label = 1;
  /// True mask first; candidates[rank_order[k]] is ranked k.
  std::vector<BinaryMask> candidates;
  std::vector<int> rank_order;
};

/// Deterministic in the options: train samples first, then test samples.
std::vector<SynthSample> synth_samples(const SynthOptions& options);

/// Writes images, label maps, candidate masks and manifest.json under
/// `out_dir` and returns the loaded manifest (splits "train" and "test").
DatasetManifest synth_border_benchmark(const SynthOptions& options,
                                       const std::filesystem::path& out_dir);

}  // namespace fbg
