#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "rpchol/baselines.hpp"
#include "rpchol/dataset.hpp"
#include "rpchol/kernels.hpp"

namespace rpchol {

struct KmeansResult {
  std::vector<int> labels;
  Eigen::MatrixXd centroids;              // c x m, one row per cluster
  std::vector<double> objective_history;  // sum of squared distances, once per Lloyd iteration
  int iterations = 0;
};

/// Lloyd iterations from a k-means++ seeding; stops on a label fixpoint or
/// after max_iterations. With restarts > 1 the best objective wins.
KmeansResult kmeans(const Eigen::MatrixXd& points, int clusters, std::uint64_t seed,
                    int max_iterations = 300, int restarts = 1);

struct ClusterModel {
  Eigen::Index m = 0;                 // embedding dimension
  Eigen::MatrixXd embedding;          // N x m spectral coordinates
  Eigen::VectorXd row_sums;           // approximate kernel row sums (after flooring)
  std::vector<int> labels;
  Eigen::MatrixXd centroids;          // c x m
  std::vector<double> kmeans_objective_history;
};

/// Low-rank kernel spectral clustering: factor the kernel matrix with the
/// chosen pivot strategy, normalize by the approximate row sums, take the
/// thin SVD of the normalized factor, embed each point with the leading m
/// singular directions, and cluster the embeddings with k-means.
///
/// Row sums below 1e-12 of the largest are floored there before the inverse
/// square root.
ClusterModel spectral_cluster(const Dataset& data, const KernelSpec& kernel, Eigen::Index k,
                              Eigen::Index m, int clusters, PivotStrategy strategy,
                              std::uint64_t seed, const StrategyOptions& options = {},
                              int kmeans_restarts = 1);

/// Fraction of misassigned points under the best matching between the two
/// label alphabets: exhaustive over permutations for c <= 8, Hungarian
/// assignment above that.
double clustering_error(std::span<const int> labels, std::span<const int> reference, int clusters);

void save_cluster_model(const ClusterModel& model, const std::string& path);
ClusterModel load_cluster_model(const std::string& path);

/// One label per line.
std::vector<int> read_labels_csv_file(const std::string& path);
void write_labels_csv_file(std::span<const int> labels, const std::string& path);

}  // namespace rpchol
