#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <vector>

#include "rpchol/dataset.hpp"

namespace rpchol {

/// Fixture constants for the desk-scale benchmark presets built on the two
/// synthetic point clouds below (n = 2000). The outlier preset also shrinks
/// the ambient dimension: with only 2000 samples a Gaussian cloud in R^20 is
/// too close to orthogonal for any bandwidth to leave room between the
/// strategies, while in R^4 the bulk is low-rank approximable and the
/// separated points still soak up greedy's budget.
inline constexpr double kSmileBandwidth = 0.2;
inline constexpr double kOutliersBandwidth = 2.5;
inline constexpr Eigen::Index kOutliersDeskDim = 4;

/// Smiley-face point cloud in R^2: a face circle (radius 1), a mouth arc
/// (radius 0.6 across the lower face), and two tight eye clusters of
/// max(n/100, 10) points total at (+-0.4, 0.35). All coordinates stay inside
/// [-1.1, 1.1]^2. Deterministic in the seed. Requires n >= 200.
Dataset gen_smile(Eigen::Index n, std::uint64_t seed);

/// Standard normal cloud in R^d with n_out points blown up by `scale`
/// (the outliers come last). Defaults follow n = 10^4, d = 20, n_out = 50,
/// scale = 100.
Dataset gen_outliers(Eigen::Index n, Eigen::Index d, Eigen::Index n_out, double scale,
                     std::uint64_t seed);

struct LabeledDataset {
  Dataset points;
  std::vector<int> labels;
};

/// c isotropic Gaussian blobs at hypercube corners scaled by `separation`,
/// each point at its center plus `spread` * standard normal noise. Labels are
/// assigned round-robin, so every blob holds n/c points up to remainder.
LabeledDataset gen_blobs(Eigen::Index n, Eigen::Index d, int c, double separation, double spread,
                         std::uint64_t seed);

/// Adversarial psd matrix for greedy pivoting:
///   blkdiag((1 + delta) I_{N-M}, ones(M, M)),
/// with M the smallest integer strictly above (1 - eta) N and delta chosen so
/// the all-ones block owns exactly a (1 - eta) fraction of the trace. The
/// identity block's inflated diagonal lures greedy away from the dominant
/// block. eps must be positive; it parameterizes the failure window of the
/// experiment built on this fixture, not the matrix itself.
Eigen::MatrixXd gen_greedy_worstcase(Eigen::Index n, double eta, double eps);

/// Adversarial unit-diagonal psd matrix for uniform sampling: one M x M
/// all-ones block followed by r - 1 blocks with unit diagonal and constant
/// off-diagonal delta in (0, 1), giving dimension r * M.
Eigen::MatrixXd gen_uniform_worstcase(Eigen::Index m, Eigen::Index r, double delta);

/// Random rotation of diag(i^-exponent), i = 1..N; the spectrum is exactly
/// the power law. Deterministic in the seed; N <= 2000.
Eigen::MatrixXd gen_powerlaw_psd(Eigen::Index n, double exponent, std::uint64_t seed);

}  // namespace rpchol
