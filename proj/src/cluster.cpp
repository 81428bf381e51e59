#include "rpchol/cluster.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "rpchol/oracle.hpp"
#include "rpchol/rng.hpp"

namespace rpchol {

namespace {

Eigen::Index nearest_centroid(const Eigen::MatrixXd& centroids,
                              const Eigen::RowVectorXd& point) {
  Eigen::Index best = 0;
  double best_dist = (centroids.row(0) - point).squaredNorm();
  for (Eigen::Index c = 1; c < centroids.rows(); ++c) {
    const double dist = (centroids.row(c) - point).squaredNorm();
    if (dist < best_dist) {
      best_dist = dist;
      best = c;
    }
  }
  return best;
}

Eigen::MatrixXd kmeanspp_seed(const Eigen::MatrixXd& points, int clusters, SplitMix64& rng) {
  const Eigen::Index n = points.rows();
  Eigen::MatrixXd centroids(clusters, points.cols());
  const Eigen::Index first = std::min<Eigen::Index>(
      static_cast<Eigen::Index>(rng.next_double() * static_cast<double>(n)), n - 1);
  centroids.row(0) = points.row(first);
  Eigen::VectorXd dist2 = (points.rowwise() - points.row(first)).rowwise().squaredNorm();
  for (int c = 1; c < clusters; ++c) {
    const double total = dist2.sum();
    Eigen::Index next;
    if (total > 0.0) {
      next = sample_proportional(dist2, total, rng);
    } else {
      next = std::min<Eigen::Index>(
          static_cast<Eigen::Index>(rng.next_double() * static_cast<double>(n)), n - 1);
    }
    centroids.row(c) = points.row(next);
    dist2 = dist2.cwiseMin((points.rowwise() - points.row(next)).rowwise().squaredNorm());
  }
  return centroids;
}

KmeansResult kmeans_once(const Eigen::MatrixXd& points, int clusters, SplitMix64& rng,
                         int max_iterations) {
  const Eigen::Index n = points.rows();
  KmeansResult result;
  result.centroids = kmeanspp_seed(points, clusters, rng);
  result.labels.assign(static_cast<std::size_t>(n), -1);

  for (int iter = 0; iter < max_iterations; ++iter) {
    bool changed = false;
    for (Eigen::Index i = 0; i < n; ++i) {
      const int label = static_cast<int>(nearest_centroid(result.centroids, points.row(i)));
      if (label != result.labels[static_cast<std::size_t>(i)]) {
        result.labels[static_cast<std::size_t>(i)] = label;
        changed = true;
      }
    }
    Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(clusters, points.cols());
    Eigen::VectorXd counts = Eigen::VectorXd::Zero(clusters);
    for (Eigen::Index i = 0; i < n; ++i) {
      sums.row(result.labels[static_cast<std::size_t>(i)]) += points.row(i);
      counts[result.labels[static_cast<std::size_t>(i)]] += 1.0;
    }
    for (int c = 0; c < clusters; ++c)
      if (counts[c] > 0.0) result.centroids.row(c) = sums.row(c) / counts[c];
    double objective = 0.0;
    for (Eigen::Index i = 0; i < n; ++i)
      objective += (points.row(i) - result.centroids.row(result.labels[static_cast<std::size_t>(i)]))
                       .squaredNorm();
    result.objective_history.push_back(objective);
    result.iterations = iter + 1;
    if (!changed) break;
  }
  return result;
}

}  // namespace

KmeansResult kmeans(const Eigen::MatrixXd& points, int clusters, std::uint64_t seed,
                    int max_iterations, int restarts) {
  if (clusters < 1) throw std::invalid_argument("kmeans: need at least one cluster");
  if (points.rows() < clusters) throw std::invalid_argument("kmeans: more clusters than points");
  if (restarts < 1) throw std::invalid_argument("kmeans: restarts must be >= 1");

  KmeansResult best;
  for (int r = 0; r < restarts; ++r) {
    SplitMix64 rng(derive_stream(seed, {static_cast<std::uint64_t>(r)}));
    KmeansResult run = kmeans_once(points, clusters, rng, max_iterations);
    if (r == 0 || run.objective_history.back() < best.objective_history.back()) best = std::move(run);
  }
  return best;
}

ClusterModel spectral_cluster(const Dataset& data, const KernelSpec& kernel, Eigen::Index k,
                              Eigen::Index m, int clusters, PivotStrategy strategy,
                              std::uint64_t seed, const StrategyOptions& options,
                              int kmeans_restarts) {
  if (m < 1 || m > k) throw std::invalid_argument("spectral_cluster: need 1 <= m <= k");
  if (clusters < 1) throw std::invalid_argument("spectral_cluster: need at least one cluster");

  const EntryOracle oracle = EntryOracle::from_kernel(kernel, data);
  auto [factor, trace] = select_factor(oracle, strategy, k, seed, options);
  if (factor.rank() < m)
    throw std::runtime_error("spectral_cluster: factor rank fell below the embedding dimension");

  // Approximate kernel row sums, floored before the inverse square root.
  Eigen::VectorXd row_sums = factor.matrix * (factor.matrix.transpose() * Eigen::VectorXd::Ones(data.size()));
  const double floor = 1e-12 * row_sums.maxCoeff();
  if (!(floor > 0.0)) throw std::runtime_error("spectral_cluster: approximation has no mass");
  row_sums = row_sums.cwiseMax(floor);

  const Eigen::VectorXd inv_sqrt = row_sums.array().rsqrt();
  const Eigen::MatrixXd normalized = inv_sqrt.asDiagonal() * factor.matrix;
  Eigen::BDCSVD<Eigen::MatrixXd> svd(normalized, Eigen::ComputeThinU);
  const Eigen::MatrixXd basis = inv_sqrt.asDiagonal() * svd.matrixU();

  ClusterModel model;
  model.m = m;
  model.row_sums = row_sums;
  model.embedding = basis.leftCols(m);
  KmeansResult km = kmeans(model.embedding, clusters, derive_stream(seed, {0x6b6d65616e73ULL}),
                           300, kmeans_restarts);
  model.labels = std::move(km.labels);
  model.centroids = std::move(km.centroids);
  model.kmeans_objective_history = std::move(km.objective_history);
  return model;
}

namespace {

/// Minimum-cost assignment (Hungarian method with potentials), O(c^3).
std::vector<int> min_cost_assignment(const Eigen::MatrixXd& cost) {
  const int n = static_cast<int>(cost.rows());
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(static_cast<std::size_t>(n) + 1, 0.0), v(static_cast<std::size_t>(n) + 1, 0.0);
  std::vector<int> match(static_cast<std::size_t>(n) + 1, 0), way(static_cast<std::size_t>(n) + 1, 0);
  for (int i = 1; i <= n; ++i) {
    match[0] = i;
    int j0 = 0;
    std::vector<double> minv(static_cast<std::size_t>(n) + 1, inf);
    std::vector<char> used(static_cast<std::size_t>(n) + 1, 0);
    do {
      used[static_cast<std::size_t>(j0)] = 1;
      const int i0 = match[static_cast<std::size_t>(j0)];
      int j1 = 0;
      double delta = inf;
      for (int j = 1; j <= n; ++j) {
        if (used[static_cast<std::size_t>(j)]) continue;
        const double cur = cost(i0 - 1, j - 1) - u[static_cast<std::size_t>(i0)] - v[static_cast<std::size_t>(j)];
        if (cur < minv[static_cast<std::size_t>(j)]) {
          minv[static_cast<std::size_t>(j)] = cur;
          way[static_cast<std::size_t>(j)] = j0;
        }
        if (minv[static_cast<std::size_t>(j)] < delta) {
          delta = minv[static_cast<std::size_t>(j)];
          j1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
        if (used[static_cast<std::size_t>(j)]) {
          u[static_cast<std::size_t>(match[static_cast<std::size_t>(j)])] += delta;
          v[static_cast<std::size_t>(j)] -= delta;
        } else {
          minv[static_cast<std::size_t>(j)] -= delta;
        }
      }
      j0 = j1;
    } while (match[static_cast<std::size_t>(j0)] != 0);
    do {
      const int j1 = way[static_cast<std::size_t>(j0)];
      match[static_cast<std::size_t>(j0)] = match[static_cast<std::size_t>(j1)];
      j0 = j1;
    } while (j0);
  }
  std::vector<int> out(static_cast<std::size_t>(n), 0);
  for (int j = 1; j <= n; ++j)
    if (match[static_cast<std::size_t>(j)] > 0) out[static_cast<std::size_t>(match[static_cast<std::size_t>(j)]) - 1] = j - 1;
  return out;
}

}  // namespace

double clustering_error(std::span<const int> labels, std::span<const int> reference, int clusters) {
  if (labels.size() != reference.size()) throw std::invalid_argument("clustering_error: length mismatch");
  if (labels.empty()) throw std::invalid_argument("clustering_error: empty input");
  if (clusters < 1) throw std::invalid_argument("clustering_error: need at least one cluster");
  const auto n = labels.size();
  Eigen::MatrixXd agreement = Eigen::MatrixXd::Zero(clusters, clusters);
  for (std::size_t i = 0; i < n; ++i) {
    const int a = labels[i];
    const int b = reference[i];
    if (a < 0 || a >= clusters || b < 0 || b >= clusters)
      throw std::invalid_argument("clustering_error: label out of range");
    agreement(a, b) += 1.0;
  }

  double best_agree = 0.0;
  if (clusters <= 8) {
    std::vector<int> perm(static_cast<std::size_t>(clusters));
    std::iota(perm.begin(), perm.end(), 0);
    do {
      double agree = 0.0;
      for (int a = 0; a < clusters; ++a) agree += agreement(a, perm[static_cast<std::size_t>(a)]);
      best_agree = std::max(best_agree, agree);
    } while (std::next_permutation(perm.begin(), perm.end()));
  } else {
    const std::vector<int> assign = min_cost_assignment(-agreement);
    for (int a = 0; a < clusters; ++a) best_agree += agreement(a, assign[static_cast<std::size_t>(a)]);
  }
  return 1.0 - best_agree / static_cast<double>(n);
}

namespace {

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

void save_cluster_model(const ClusterModel& model, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path);
  const Eigen::Index n = model.embedding.rows();
  const Eigen::Index c = model.centroids.rows();
  out << "rpchol-model cluster 1\n";
  out << "shape " << n << ' ' << model.m << ' ' << c << '\n';
  out << "labels\n";
  for (Eigen::Index i = 0; i < n; ++i) out << model.labels[static_cast<std::size_t>(i)] << '\n';
  out << "centroids\n";
  for (Eigen::Index i = 0; i < c; ++i) {
    for (Eigen::Index j = 0; j < model.m; ++j) out << (j ? " " : "") << fmt(model.centroids(i, j));
    out << '\n';
  }
  out << "embedding\n";
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < model.m; ++j) out << (j ? " " : "") << fmt(model.embedding(i, j));
    out << '\n';
  }
  out << "row_sums\n";
  for (Eigen::Index i = 0; i < n; ++i) out << fmt(model.row_sums[i]) << '\n';
}

ClusterModel load_cluster_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::string tag, kind, key;
  int version = 0;
  in >> tag >> kind >> version;
  if (tag != "rpchol-model" || kind != "cluster" || version != 1)
    throw std::runtime_error("load_cluster_model: unrecognized header in " + path);
  Eigen::Index n = 0, m = 0, c = 0;
  in >> key >> n >> m >> c;
  if (key != "shape") throw std::runtime_error("load_cluster_model: bad file");
  ClusterModel model;
  model.m = m;
  in >> key;
  if (key != "labels") throw std::runtime_error("load_cluster_model: bad file");
  model.labels.resize(static_cast<std::size_t>(n));
  for (auto& l : model.labels) in >> l;
  in >> key;
  if (key != "centroids") throw std::runtime_error("load_cluster_model: bad file");
  model.centroids.resize(c, m);
  for (Eigen::Index i = 0; i < c; ++i)
    for (Eigen::Index j = 0; j < m; ++j) in >> model.centroids(i, j);
  in >> key;
  if (key != "embedding") throw std::runtime_error("load_cluster_model: bad file");
  model.embedding.resize(n, m);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < m; ++j) in >> model.embedding(i, j);
  in >> key;
  if (key != "row_sums") throw std::runtime_error("load_cluster_model: bad file");
  model.row_sums.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) in >> model.row_sums[i];
  if (!in) throw std::runtime_error("load_cluster_model: truncated file " + path);
  return model;
}

std::vector<int> read_labels_csv_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::vector<int> labels;
  int v = 0;
  while (in >> v) labels.push_back(v);
  if (labels.empty()) throw std::runtime_error("no labels in " + path);
  return labels;
}

void write_labels_csv_file(std::span<const int> labels, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path);
  for (int l : labels) out << l << '\n';
}

}  // namespace rpchol
