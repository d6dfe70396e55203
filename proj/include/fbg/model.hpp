#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace fbg {

struct TrainExample {
  std::vector<double> feature;
  /// Overlap target per model category, each in [0,1].
  std::vector<double> targets;
};

inline double default_lambda(std::size_t example_count) {
  return 1e-4 * static_cast<double>(example_count);
}

/// Per-category linear scorer over standardized features.
class LinearModel {
 public:
  static constexpr std::uint32_t kFileVersion = 1;

  LinearModel() = default;
  LinearModel(std::vector<std::string> categories, std::size_t feature_dim,
              double lambda, std::string digest, std::vector<double> mean,
              std::vector<double> scale, std::vector<std::vector<double>> weights,
              std::vector<double> bias);

  const std::vector<std::string>& categories() const noexcept {
    return categories_;
  }
  std::size_t feature_dim() const noexcept { return feature_dim_; }
  double lambda() const noexcept { return lambda_; }
  const std::string& digest() const noexcept { return digest_; }
  const std::vector<double>& mean() const noexcept { return mean_; }
  const std::vector<double>& scale() const noexcept { return scale_; }
  /// Weights act on standardized features (x - mean) / scale.
  const std::vector<std::vector<double>>& weights() const noexcept {
    return weights_;
  }
  const std::vector<double>& bias() const noexcept { return bias_; }

  /// Throws Error(kConfigMismatch) when `digest` differs from the model's.
  std::vector<double> score(std::span<const double> feature,
                            const std::string& digest) const;
  std::vector<double> score(std::span<const double> feature) const;

  void save(const std::filesystem::path& path) const;
  /// Metadata mirror for inspection; not read back.
  void save_sidecar(const std::filesystem::path& path) const;
  static LinearModel load(const std::filesystem::path& path);

  friend bool operator==(const LinearModel&, const LinearModel&) = default;

 private:
  std::vector<std::string> categories_;
  std::size_t feature_dim_ = 0;
  double lambda_ = 0.0;
  std::string digest_;
  std::vector<double> mean_;
  std::vector<double> scale_;
  std::vector<std::vector<double>> weights_;
  std::vector<double> bias_;
};

struct RidgeOptions {
  double lambda = 0.0;
  bool standardize = true;
};

/// Per category c minimizes sum_i (w.z_i + b - t_ic)^2 + lambda |w|^2 with an
/// unregularized bias, z the (optionally standardized) features. Solved from
/// the normal equations by Cholesky, in feature space or example space,
/// whichever is smaller.
LinearModel train_ridge(std::span<const TrainExample> examples,
                        const RidgeOptions& options,
                        std::vector<std::string> categories,
                        std::string digest = {});

}  // namespace fbg
