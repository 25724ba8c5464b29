// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <random>

#include "satrs/types.hpp"

namespace satrs {

using Rng = std::mt19937_64;

/// Purposes of derived random streams. Every (seed, trial, purpose) triple
/// owns an independent generator so trials can run in any order.
enum class StreamPurpose : std::uint64_t {
  user_positions = 1,
  user_fading = 2,
  feeder_fading = 3,
  csit_error = 4,
  saa_samples = 5,
  first_stage_init = 6,
  scenario_layout = 7,
  test = 99,
};

constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t trial,
                                    StreamPurpose purpose) {
  return splitmix64(splitmix64(splitmix64(master) ^ trial) ^
                    static_cast<std::uint64_t>(purpose));
}

inline Rng make_stream(std::uint64_t master, std::uint64_t trial, StreamPurpose purpose) {
  return Rng(derive_seed(master, trial, purpose));
}

/// Circularly-symmetric complex Gaussian CN(0, variance).
inline cplx complex_normal(Rng& rng, double variance) {
  std::normal_distribution<double> n(0.0, 1.0);
  const double scale = std::sqrt(variance / 2.0);
  const double re = n(rng);
  const double im = n(rng);
  return {scale * re, scale * im};
}

inline MatrixXcd complex_normal_matrix(Rng& rng, Eigen::Index rows, Eigen::Index cols,
                                       double variance) {
  MatrixXcd out(rows, cols);
  for (Eigen::Index c = 0; c < cols; ++c)
    for (Eigen::Index r = 0; r < rows; ++r) out(r, c) = complex_normal(rng, variance);
  return out;
}

}  // namespace satrs
