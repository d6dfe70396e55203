#include "fbg/model.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include <cmath>
#include <cstring>
#include <fstream>

#include "json.hpp"

#include "fbg/error.hpp"
#include "fbg/feature_io.hpp"

namespace fbg {

namespace {

constexpr char kModelMagic[4] = {'F', 'B', 'G', 'M'};

using RowMatrix =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

}  // namespace

LinearModel::LinearModel(std::vector<std::string> categories,
                         std::size_t feature_dim, double lambda,
                         std::string digest, std::vector<double> mean,
                         std::vector<double> scale,
                         std::vector<std::vector<double>> weights,
                         std::vector<double> bias)
    : categories_(std::move(categories)),
      feature_dim_(feature_dim),
      lambda_(lambda),
      digest_(std::move(digest)),
      mean_(std::move(mean)),
      scale_(std::move(scale)),
      weights_(std::move(weights)),
      bias_(std::move(bias)) {
  const auto k = categories_.size();
  if (mean_.size() != feature_dim_ || scale_.size() != feature_dim_ ||
      weights_.size() != k || bias_.size() != k) {
    throw Error(ErrorCode::kDimensionMismatch, "inconsistent model shapes");
  }
  for (const auto& w : weights_) {
    if (w.size() != feature_dim_) {
      throw Error(ErrorCode::kDimensionMismatch,
                  "weight vectors must share the feature dimension");
    }
  }
}

std::vector<double> LinearModel::score(std::span<const double> feature,
                                       const std::string& digest) const {
  if (digest != digest_) {
    throw Error(ErrorCode::kConfigMismatch,
                "feature configuration " + digest +
                    " does not match the model's " + digest_);
  }
  return score(feature);
}

std::vector<double> LinearModel::score(std::span<const double> feature) const {
  if (feature.size() != feature_dim_) {
    throw Error(ErrorCode::kDimensionMismatch,
                "feature has dimension " + std::to_string(feature.size()) +
                    ", model expects " + std::to_string(feature_dim_));
  }
  std::vector<double> z(feature_dim_);
  for (std::size_t j = 0; j < feature_dim_; ++j) {
    z[j] = (feature[j] - mean_[j]) / scale_[j];
  }
  std::vector<double> scores(categories_.size());
  for (std::size_t c = 0; c < categories_.size(); ++c) {
    double s = bias_[c];
    for (std::size_t j = 0; j < feature_dim_; ++j) s += weights_[c][j] * z[j];
    scores[c] = s;
  }
  return scores;
}

void LinearModel::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  out.write(kModelMagic, 4);
  le::put_u32(out, kFileVersion);
  le::put_u32(out, static_cast<std::uint32_t>(categories_.size()));
  for (const auto& c : categories_) le::put_string(out, c);
  le::put_u64(out, feature_dim_);
  le::put_f64(out, lambda_);
  le::put_string(out, digest_);
  for (double v : mean_) le::put_f64(out, v);
  for (double v : scale_) le::put_f64(out, v);
  for (std::size_t c = 0; c < categories_.size(); ++c) {
    le::put_f64(out, bias_[c]);
    for (double v : weights_[c]) le::put_f64(out, v);
  }
  if (!out) throw Error(ErrorCode::kIo, "write failed: " + path.string());
}

void LinearModel::save_sidecar(const std::filesystem::path& path) const {
  nlohmann::ordered_json j;
  j["format"] = "fbg-linear-model";
  j["version"] = kFileVersion;
  j["categories"] = categories_;
  j["feature_dim"] = feature_dim_;
  j["lambda"] = lambda_;
  j["digest"] = digest_;
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  out << j.dump(2) << "\n";
}

LinearModel LinearModel::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kMissingFile, path.string());
  char magic[4];
  if (!in.read(magic, 4) || std::memcmp(magic, kModelMagic, 4) != 0) {
    throw Error(ErrorCode::kIo, "not a model file: " + path.string());
  }
  const auto version = le::get_u32(in);
  if (version != kFileVersion) {
    throw Error(ErrorCode::kIo,
                "unsupported model version " + std::to_string(version));
  }
  std::vector<std::string> categories(le::get_u32(in));
  for (auto& c : categories) c = le::get_string(in);
  const auto dim = le::get_u64(in);
  const double lambda = le::get_f64(in);
  auto digest = le::get_string(in);
  std::vector<double> mean(dim), scale(dim);
  for (auto& v : mean) v = le::get_f64(in);
  for (auto& v : scale) v = le::get_f64(in);
  std::vector<std::vector<double>> weights(categories.size(),
                                           std::vector<double>(dim));
  std::vector<double> bias(categories.size());
  for (std::size_t c = 0; c < categories.size(); ++c) {
    bias[c] = le::get_f64(in);
    for (auto& v : weights[c]) v = le::get_f64(in);
  }
  return LinearModel(std::move(categories), dim, lambda, std::move(digest),
                     std::move(mean), std::move(scale), std::move(weights),
                     std::move(bias));
}

LinearModel train_ridge(std::span<const TrainExample> examples,
                        const RidgeOptions& options,
                        std::vector<std::string> categories,
                        std::string digest) {
  if (examples.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "ridge needs at least one example");
  }
  if (!(options.lambda > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "ridge lambda must be > 0");
  }
  const auto n = static_cast<Eigen::Index>(examples.size());
  const auto d = static_cast<Eigen::Index>(examples.front().feature.size());
  const auto k = static_cast<Eigen::Index>(categories.size());
  RowMatrix z(n, d);
  Eigen::MatrixXd t(n, k);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& ex = examples[i];
    if (static_cast<Eigen::Index>(ex.feature.size()) != d) {
      throw Error(ErrorCode::kDimensionMismatch,
                  "training features must share one dimension");
    }
    if (static_cast<Eigen::Index>(ex.targets.size()) != k) {
      throw Error(ErrorCode::kDimensionMismatch,
                  "every example needs one target per category");
    }
    for (Eigen::Index j = 0; j < d; ++j) {
      if (!std::isfinite(ex.feature[j])) {
        throw Error(ErrorCode::kNumericalInput, "non-finite training feature");
      }
      z(i, j) = ex.feature[j];
    }
    for (Eigen::Index c = 0; c < k; ++c) t(i, c) = ex.targets[c];
  }

  std::vector<double> mean(d, 0.0), scale(d, 1.0);
  if (options.standardize) {
    const Eigen::RowVectorXd mu = z.colwise().mean();
    for (Eigen::Index j = 0; j < d; ++j) {
      mean[j] = mu(j);
      double var = 0.0;
      for (Eigen::Index i = 0; i < n; ++i) {
        const double c = z(i, j) - mu(j);
        var += c * c;
      }
      var /= static_cast<double>(n);
      if (var > 0.0) scale[j] = std::sqrt(var);
    }
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index j = 0; j < d; ++j) {
        z(i, j) = (z(i, j) - mean[j]) / scale[j];
      }
    }
  }

  // The unregularized bias decouples once features and targets are centered.
  const Eigen::RowVectorXd z_mean = z.colwise().mean();
  const Eigen::RowVectorXd t_mean = t.colwise().mean();
  z.rowwise() -= z_mean;
  t.rowwise() -= t_mean;

  Eigen::MatrixXd w(d, k);
  if (n < d) {
    Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(n, n);
    gram.selfadjointView<Eigen::Lower>().rankUpdate(z);
    gram = gram.selfadjointView<Eigen::Lower>();
    gram.diagonal().array() += options.lambda;
    Eigen::LLT<Eigen::MatrixXd> llt(gram);
    if (llt.info() != Eigen::Success) {
      throw Error(ErrorCode::kNumericalInput, "ridge system is not SPD");
    }
    const Eigen::MatrixXd alpha = llt.solve(t);
    w.noalias() = z.transpose() * alpha;
  } else {
    Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(d, d);
    gram.selfadjointView<Eigen::Lower>().rankUpdate(z.transpose());
    gram = gram.selfadjointView<Eigen::Lower>();
    gram.diagonal().array() += options.lambda;
    Eigen::LLT<Eigen::MatrixXd> llt(gram);
    if (llt.info() != Eigen::Success) {
      throw Error(ErrorCode::kNumericalInput, "ridge system is not SPD");
    }
    w = llt.solve(z.transpose() * t);
  }

  std::vector<std::vector<double>> weights(k, std::vector<double>(d));
  std::vector<double> bias(k);
  for (Eigen::Index c = 0; c < k; ++c) {
    for (Eigen::Index j = 0; j < d; ++j) weights[c][j] = w(j, c);
    bias[c] = t_mean(c) - z_mean.dot(w.col(c));
  }
  return LinearModel(std::move(categories), static_cast<std::size_t>(d),
                     options.lambda, std::move(digest), std::move(mean),
                     std::move(scale), std::move(weights), std::move(bias));
}

}  // namespace fbg
