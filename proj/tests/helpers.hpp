#pragma once

#include <Eigen/Dense>

#include <cstdint>

#include "rpchol/rng.hpp"

namespace test_helpers {

inline Eigen::MatrixXd random_gaussian(Eigen::Index rows, Eigen::Index cols, std::uint64_t seed) {
  rpchol::SplitMix64 rng(seed);
  Eigen::MatrixXd out(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < rows; ++i) out(i, j) = rpchol::sample_normal(rng);
  return out;
}

/// Random psd matrix of the given rank, exactly symmetric.
inline Eigen::MatrixXd random_psd(Eigen::Index n, Eigen::Index rank, std::uint64_t seed) {
  const Eigen::MatrixXd g = random_gaussian(n, rank, seed);
  Eigen::MatrixXd out = g * g.transpose();
  return 0.5 * (out + out.transpose().eval());
}

}  // namespace test_helpers
