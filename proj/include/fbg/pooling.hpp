#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "fbg/descriptors.hpp"
#include "fbg/partition.hpp"

namespace fbg {

/// Dense symmetric matrix, row-major, both triangles stored.
class SymmetricMatrix {
 public:
  SymmetricMatrix() = default;
  explicit SymmetricMatrix(int n) : n_(n), a_(static_cast<std::size_t>(n) * n) {}

  int size() const noexcept { return n_; }
  double operator()(int i, int j) const {
    return a_[static_cast<std::size_t>(i) * n_ + j];
  }
  double& operator()(int i, int j) {
    return a_[static_cast<std::size_t>(i) * n_ + j];
  }
  std::span<const double> data() const noexcept { return a_; }

 private:
  int n_ = 0;
  std::vector<double> a_;
};

struct EigenDecomposition {
  std::vector<double> values;
  /// Column k is the unit eigenvector of values[k]; row-major n x n.
  std::vector<double> vectors;
  int sweeps = 0;
};

/// Cyclic Jacobi rotations until the off-diagonal Frobenius norm drops below
/// `tolerance * max(1, ||A||_F)`.
EigenDecomposition jacobi_eigen(const SymmetricMatrix& a,
                                double tolerance = 1e-12, int max_sweeps = 100);

struct O2PConfig {
  double epsilon = 1e-3;
  double power = 0.5;

  void validate() const;
};

/// (1/n) sum x x^T + epsilon I, accumulated in canonical descriptor order.
SymmetricMatrix second_moment(std::span<const LocalDescriptor> pool,
                              double epsilon);
/// Matrix logarithm of a symmetric positive-definite matrix.
SymmetricMatrix log_map(const SymmetricMatrix& a);
/// Upper triangle, row by row, off-diagonal entries scaled by sqrt(2) so that
/// dot products equal Frobenius inner products.
std::vector<double> flatten_upper(const SymmetricMatrix& m);
/// sign(v) |v|^power, elementwise.
void power_normalize(std::span<double> v, double power);

inline std::size_t pooled_dim(int descriptor_dim) {
  return static_cast<std::size_t>(descriptor_dim) * (descriptor_dim + 1) / 2;
}

struct PooledFeature {
  RegionId region;
  DescriptorKind kind = DescriptorKind::kESift;
  std::vector<double> vector;
  std::size_t count = 0;
};

/// Second-order pooling of one pool. An empty pool gives the zero vector of
/// dimension pooled_dim(dim).
PooledFeature o2p_pool(std::span<const LocalDescriptor> pool,
                       const O2PConfig& config, int dim,
                       RegionId region = RegionId::figure(),
                       DescriptorKind kind = DescriptorKind::kESift);

/// Concatenation in canonical order: descriptor kind outer, region inner.
/// Throws Error(kDuplicateBlock) if a (kind, region) pair repeats.
std::vector<double> concat_features(std::vector<PooledFeature> parts);

}  // namespace fbg
