#include "fbg/pooling.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "fbg/error.hpp"

namespace fbg {

namespace {

double frobenius(const SymmetricMatrix& a) {
  double sq = 0.0;
  for (double v : a.data()) sq += v * v;
  return std::sqrt(sq);
}

double off_diagonal_norm(const SymmetricMatrix& a) {
  double sq = 0.0;
  for (int i = 0; i < a.size(); ++i) {
    for (int j = i + 1; j < a.size(); ++j) sq += a(i, j) * a(i, j);
  }
  return std::sqrt(2.0 * sq);
}

bool canonical_less(const LocalDescriptor* a, const LocalDescriptor* b) {
  if (a->center.y != b->center.y) return a->center.y < b->center.y;
  if (a->center.x != b->center.x) return a->center.x < b->center.x;
  if (a->scale != b->scale) return a->scale < b->scale;
  return a->vector < b->vector;
}

}  // namespace

EigenDecomposition jacobi_eigen(const SymmetricMatrix& input, double tolerance,
                                int max_sweeps) {
  const int n = input.size();
  SymmetricMatrix a = input;
  EigenDecomposition out;
  out.vectors.assign(static_cast<std::size_t>(n) * n, 0.0);
  auto v = [&](int r, int c) -> double& {
    return out.vectors[static_cast<std::size_t>(r) * n + c];
  };
  for (int i = 0; i < n; ++i) v(i, i) = 1.0;

  const double threshold = tolerance * std::max(1.0, frobenius(input));
  for (; out.sweeps < max_sweeps; ++out.sweeps) {
    if (off_diagonal_norm(a) < threshold) break;
    for (int p = 0; p < n - 1; ++p) {
      for (int q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) continue;
        const double theta = 0.5 * (a(q, q) - a(p, p)) / apq;
        double t = 1.0 / (std::abs(theta) + std::sqrt(1.0 + theta * theta));
        if (theta < 0.0) t = -t;
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = t * c;
        const double tau = s / (1.0 + c);
        a(p, p) -= t * apq;
        a(q, q) += t * apq;
        a(p, q) = 0.0;
        a(q, p) = 0.0;
        for (int r = 0; r < n; ++r) {
          if (r == p || r == q) continue;
          const double g = a(r, p);
          const double h = a(r, q);
          const double rp = g - s * (h + g * tau);
          const double rq = h + s * (g - h * tau);
          a(r, p) = rp;
          a(p, r) = rp;
          a(r, q) = rq;
          a(q, r) = rq;
        }
        for (int r = 0; r < n; ++r) {
          const double g = v(r, p);
          const double h = v(r, q);
          v(r, p) = g - s * (h + g * tau);
          v(r, q) = h + s * (g - h * tau);
        }
      }
    }
  }
  out.values.resize(n);
  for (int i = 0; i < n; ++i) out.values[i] = a(i, i);
  return out;
}

void O2PConfig::validate() const {
  if (!(epsilon > 0.0) || !std::isfinite(epsilon)) {
    throw Error(ErrorCode::kInvalidArgument, "O2P epsilon must be > 0");
  }
  if (!(power > 0.0 && power <= 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "O2P power must be in (0,1]");
  }
}

SymmetricMatrix second_moment(std::span<const LocalDescriptor> pool,
                              double epsilon) {
  if (pool.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "second moment of an empty pool");
  }
  const int d = static_cast<int>(pool.front().vector.size());
  std::vector<const LocalDescriptor*> order;
  order.reserve(pool.size());
  for (const auto& desc : pool) {
    if (static_cast<int>(desc.vector.size()) != d) {
      throw Error(ErrorCode::kDimensionMismatch,
                  "descriptors in one pool must share a dimension");
    }
    for (double x : desc.vector) {
      if (!std::isfinite(x)) {
        throw Error(ErrorCode::kNumericalInput,
                    "non-finite descriptor entry in pool");
      }
    }
    order.push_back(&desc);
  }
  std::sort(order.begin(), order.end(), canonical_less);

  SymmetricMatrix m(d);
  for (const auto* desc : order) {
    const double* x = desc->vector.data();
    for (int i = 0; i < d; ++i) {
      const double xi = x[i];
      if (xi == 0.0) continue;
      for (int j = i; j < d; ++j) m(i, j) += xi * x[j];
    }
  }
  const double inv_n = 1.0 / static_cast<double>(pool.size());
  for (int i = 0; i < d; ++i) {
    for (int j = i; j < d; ++j) {
      m(i, j) *= inv_n;
      if (i == j) m(i, j) += epsilon;
      m(j, i) = m(i, j);
    }
  }
  return m;
}

SymmetricMatrix log_map(const SymmetricMatrix& a) {
  const int n = a.size();
  const auto eig = jacobi_eigen(a);
  std::vector<double> logs(n);
  for (int k = 0; k < n; ++k) {
    if (!(eig.values[k] > 0.0)) {
      throw Error(ErrorCode::kNumericalInput,
                  "matrix logarithm of a non positive-definite matrix");
    }
    logs[k] = std::log(eig.values[k]);
  }
  // Row k of vt is eigenvector k, so the inner loop runs contiguously.
  std::vector<double> vt(static_cast<std::size_t>(n) * n);
  for (int r = 0; r < n; ++r) {
    for (int k = 0; k < n; ++k) {
      vt[static_cast<std::size_t>(k) * n + r] =
          eig.vectors[static_cast<std::size_t>(r) * n + k];
    }
  }
  SymmetricMatrix out(n);
  std::vector<double> scaled(n);
  for (int i = 0; i < n; ++i) {
    for (int k = 0; k < n; ++k) {
      scaled[k] = vt[static_cast<std::size_t>(k) * n + i] * logs[k];
    }
    for (int j = i; j < n; ++j) {
      double sum = 0.0;
      for (int k = 0; k < n; ++k) {
        sum += scaled[k] * vt[static_cast<std::size_t>(k) * n + j];
      }
      out(i, j) = sum;
      out(j, i) = sum;
    }
  }
  return out;
}

std::vector<double> flatten_upper(const SymmetricMatrix& m) {
  const int n = m.size();
  std::vector<double> v;
  v.reserve(pooled_dim(n));
  for (int i = 0; i < n; ++i) {
    v.push_back(m(i, i));
    for (int j = i + 1; j < n; ++j) v.push_back(std::numbers::sqrt2 * m(i, j));
  }
  return v;
}

void power_normalize(std::span<double> v, double power) {
  for (double& x : v) {
    const double mag = std::pow(std::abs(x), power);
    x = x < 0.0 ? -mag : mag;
  }
}

PooledFeature o2p_pool(std::span<const LocalDescriptor> pool,
                       const O2PConfig& config, int dim, RegionId region,
                       DescriptorKind kind) {
  config.validate();
  PooledFeature out{region, kind, {}, pool.size()};
  if (pool.empty()) {
    out.vector.assign(pooled_dim(dim), 0.0);
    return out;
  }
  if (static_cast<int>(pool.front().vector.size()) != dim) {
    throw Error(ErrorCode::kDimensionMismatch,
                "pool dimension " + std::to_string(pool.front().vector.size()) +
                    " does not match expected " + std::to_string(dim));
  }
  out.vector = flatten_upper(log_map(second_moment(pool, config.epsilon)));
  power_normalize(out.vector, config.power);
  return out;
}

std::vector<double> concat_features(std::vector<PooledFeature> parts) {
  std::stable_sort(parts.begin(), parts.end(),
                   [](const PooledFeature& a, const PooledFeature& b) {
                     if (a.kind != b.kind) return a.kind < b.kind;
                     return a.region < b.region;
                   });
  std::vector<double> out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i > 0 && parts[i].kind == parts[i - 1].kind &&
        parts[i].region == parts[i - 1].region) {
      throw Error(ErrorCode::kDuplicateBlock,
                  "block (" + to_string(parts[i].kind) + ", " +
                      to_string(parts[i].region) + ") appears twice");
    }
    out.insert(out.end(), parts[i].vector.begin(), parts[i].vector.end());
  }
  return out;
}

}  // namespace fbg
