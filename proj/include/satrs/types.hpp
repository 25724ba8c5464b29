// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <complex>
#include <cstddef>
#include <vector>

#include <Eigen/Dense>

namespace satrs {

using cplx = std::complex<double>;
using Eigen::MatrixXcd;
using Eigen::MatrixXd;
using Eigen::VectorXcd;
using Eigen::VectorXd;

/// Square grid of blocks indexed by (receiver cluster, transmitting gateway).
/// Block (i, l) is B_i x B_l.
class BlockMatrix {
 public:
  BlockMatrix() = default;
  explicit BlockMatrix(std::size_t clusters) : n_(clusters), blocks_(clusters * clusters) {}

  std::size_t clusters() const noexcept { return n_; }
  MatrixXcd& at(std::size_t i, std::size_t l) { return blocks_[i * n_ + l]; }
  const MatrixXcd& at(std::size_t i, std::size_t l) const { return blocks_[i * n_ + l]; }

 private:
  std::size_t n_ = 0;
  std::vector<MatrixXcd> blocks_;
};

/// Per-cluster user-link matrices: block l is B_l x K, column k = h_{l,k}.
using UserLinkBlocks = std::vector<MatrixXcd>;

/// Per-gateway effective channels: block j is B_j x K, column k = hbar_{j,k}.
using EffectiveChannel = std::vector<MatrixXcd>;

/// One matrix per gateway / feeder receiver (filters, first-stage precoders).
using MatrixPerCluster = std::vector<MatrixXcd>;

}  // namespace satrs
