#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <numeric>
#include <vector>

#include "rpchol/cluster.hpp"
#include "rpchol/generators.hpp"
#include "rpchol/krr.hpp"
#include "rpchol/linalg.hpp"
#include "rpchol/oracle.hpp"
#include "rpchol/rng.hpp"

#include "helpers.hpp"

using namespace rpchol;

namespace {

Dataset grid_points(Eigen::Index n, std::uint64_t seed) {
  // Uniform points in [0,1]^2.
  SplitMix64 rng(seed);
  Eigen::MatrixXd pts(2, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    pts(0, i) = rng.next_double();
    pts(1, i) = rng.next_double();
  }
  return Dataset(pts);
}

Eigen::VectorXd smooth_targets(const Dataset& data) {
  Eigen::VectorXd y(data.size());
  for (Eigen::Index i = 0; i < data.size(); ++i) {
    const auto p = data.point(i);
    y[i] = std::sin(3.0 * p[0]) + std::cos(5.0 * p[1]) + 2.0;
  }
  return y;
}

std::string temp_path(const char* name) {
  return (std::filesystem::temp_directory_path() / name).string();
}

}  // namespace

TEST_CASE("full-pivot fit interpolates noiseless data at small ridge") {
  // The l1 kernel keeps the Gram matrix well conditioned, so the ridge term
  // is the only thing standing between the fit and exact interpolation.
  const Dataset data = grid_points(40, 1);
  const Eigen::VectorXd y = smooth_targets(data);
  const KernelSpec kernel(KernelFamily::kLaplaceL1, 1.0);
  const KrrModel model = krr_fit(data, y, kernel, 40, 1e-12, PivotStrategy::kFull, 0);
  const Eigen::VectorXd fitted = krr_predict(model, data);
  CHECK((fitted - y).cwiseAbs().maxCoeff() <= 1e-6 * y.cwiseAbs().maxCoeff());
}

TEST_CASE("nearly orthogonal points reduce the fit to y / (1 + lambda N)") {
  // A tiny bandwidth makes the kernel matrix indistinguishable from the
  // identity, where the full restricted system solves to y / (1 + lambda N).
  const Dataset data = grid_points(20, 2);
  const Eigen::VectorXd y = smooth_targets(data);
  const double lambda = 0.05;
  const KrrModel model =
      krr_fit(data, y, KernelSpec(KernelFamily::kGaussian, 1e-3), 20, lambda, PivotStrategy::kFull, 0);
  const Eigen::VectorXd expected = y / (1.0 + lambda * 20.0);
  CHECK((model.beta - expected).cwiseAbs().maxCoeff() <= 1e-10 * expected.cwiseAbs().maxCoeff());
}

TEST_CASE("single-pivot fit matches the scalar formula") {
  const Dataset data = grid_points(30, 3);
  const Eigen::VectorXd y = smooth_targets(data);
  const KernelSpec kernel(KernelFamily::kGaussian, 0.5);
  const double lambda = 0.01;
  const KrrModel model = krr_fit(data, y, kernel, 1, lambda, PivotStrategy::kRpcholesky, 17);
  REQUIRE(model.pivots.size() == 1);
  const EntryOracle oracle = EntryOracle::from_kernel(kernel, data);
  const Eigen::VectorXd col = oracle.column(model.pivots[0]);
  const double expected = col.dot(y) / (col.squaredNorm() + lambda * 30.0 * 1.0);
  CHECK(model.beta[0] == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("full-pivot coefficients match a dense reference solve") {
  const Eigen::Index n = 80;
  const Dataset data = grid_points(n, 4);
  const Eigen::VectorXd y = smooth_targets(data);
  const KernelSpec kernel(KernelFamily::kLaplaceL1, 0.7);
  const double lambda = 1e-4;
  const KrrModel model = krr_fit(data, y, kernel, n, lambda, PivotStrategy::kFull, 0);

  const EntryOracle oracle = EntryOracle::from_kernel(kernel, data);
  Eigen::MatrixXd gram(n, n);
  for (Eigen::Index j = 0; j < n; ++j) gram.col(j) = oracle.column(j);
  gram = 0.5 * (gram + gram.transpose().eval());
  const Eigen::MatrixXd system = gram * gram + lambda * static_cast<double>(n) * gram;
  const Eigen::VectorXd reference = solve_spd(0.5 * (system + system.transpose().eval()), Eigen::VectorXd(gram * y));
  CHECK((model.beta - reference).norm() <= 1e-8 * reference.norm());
}

TEST_CASE("restricted system residual is small") {
  const Eigen::Index n = 70;
  const Dataset data = grid_points(n, 5);
  const Eigen::VectorXd y = smooth_targets(data);
  const KernelSpec kernel(KernelFamily::kGaussian, 0.35);
  const double lambda = 1e-5;
  const KrrModel model = krr_fit(data, y, kernel, 20, lambda, PivotStrategy::kRpcholesky, 3);
  const Eigen::Index m = static_cast<Eigen::Index>(model.pivots.size());
  const EntryOracle oracle = EntryOracle::from_kernel(kernel, data);
  Eigen::MatrixXd rows(m, n);
  for (Eigen::Index i = 0; i < m; ++i) rows.row(i) = oracle.column(model.pivots[static_cast<std::size_t>(i)]).transpose();
  Eigen::MatrixXd core(m, m);
  for (Eigen::Index i = 0; i < m; ++i)
    for (Eigen::Index j = 0; j < m; ++j) core(i, j) = rows(i, model.pivots[static_cast<std::size_t>(j)]);
  const Eigen::MatrixXd system = rows * rows.transpose() + lambda * static_cast<double>(n) * core;
  const Eigen::VectorXd rhs = rows * y;
  CHECK((system * model.beta - rhs).norm() <= 1e-8 * rhs.norm());
}

TEST_CASE("prediction basics") {
  const Dataset data = grid_points(15, 6);
  const Eigen::VectorXd y = smooth_targets(data);
  const KernelSpec kernel(KernelFamily::kGaussian, 0.5);
  KrrModel model = krr_fit(data, y, kernel, 5, 1e-3, PivotStrategy::kRpcholesky, 2);

  SUBCASE("zero coefficients give zero predictions") {
    model.beta.setZero();
    CHECK(krr_predict(model, data).cwiseAbs().maxCoeff() == 0.0);
  }
  SUBCASE("a unit coefficient at the pivot evaluates the kernel diagonal") {
    model.pivots.resize(1);
    model.pivot_points = model.pivot_points.leftCols(1).eval();
    model.beta = Eigen::VectorXd::Ones(1);
    Eigen::MatrixXd query = model.pivot_points;
    CHECK(krr_predict(model, Dataset(query))[0] == doctest::Approx(1.0).epsilon(1e-15));
  }
  SUBCASE("prediction equals the explicit kernel sum") {
    const Dataset queries = grid_points(7, 99);
    const Eigen::VectorXd predictions = krr_predict(model, queries);
    for (Eigen::Index q = 0; q < queries.size(); ++q) {
      double reference = 0.0;
      for (std::size_t i = 0; i < model.pivots.size(); ++i)
        reference += model.beta[static_cast<Eigen::Index>(i)] *
                     kernel(model.pivot_points.col(static_cast<Eigen::Index>(i)), queries.point(q));
      CHECK(std::abs(predictions[q] - reference) <= 1e-12);
    }
  }
  SUBCASE("dimension mismatch is rejected") {
    CHECK_THROWS(krr_predict(model, Dataset(Eigen::MatrixXd::Zero(3, 2))));
  }
}

TEST_CASE("smape closed forms") {
  Eigen::VectorXd y(3);
  y << 1, -2, 3;
  CHECK(smape(y, y) == doctest::Approx(0.0));
  CHECK(smape(Eigen::VectorXd::Ones(1), 3.0 * Eigen::VectorXd::Ones(1)) == doctest::Approx(1.0));
  CHECK(smape(Eigen::VectorXd::Zero(1), Eigen::VectorXd::Zero(1)) == doctest::Approx(0.0));
  CHECK_THROWS(smape(Eigen::VectorXd(), Eigen::VectorXd()));
  CHECK_THROWS(smape(Eigen::VectorXd::Ones(2), Eigen::VectorXd::Ones(3)));
}

TEST_CASE("krr model round-trips through the text format") {
  const Dataset data = grid_points(25, 7);
  const Eigen::VectorXd y = smooth_targets(data);
  const KrrModel model =
      krr_fit(data, y, KernelSpec(KernelFamily::kLaplaceL1, 0.7), 8, 1e-4, PivotStrategy::kRpcholesky, 4);
  const std::string path = temp_path("rpchol_krr_model.txt");
  save_krr_model(model, path);
  const KrrModel loaded = load_krr_model(path);
  CHECK(loaded.pivots == model.pivots);
  CHECK(loaded.lambda == model.lambda);
  CHECK(loaded.kernel.bandwidth == model.kernel.bandwidth);
  CHECK(loaded.beta == model.beta);
  CHECK(loaded.pivot_points == model.pivot_points);
  const Dataset queries = grid_points(9, 8);
  CHECK(krr_predict(loaded, queries) == krr_predict(model, queries));
  std::filesystem::remove(path);
}

TEST_CASE("krr argument validation") {
  const Dataset data = grid_points(10, 9);
  const Eigen::VectorXd y = smooth_targets(data);
  const KernelSpec kernel(KernelFamily::kGaussian, 0.5);
  CHECK_THROWS(krr_fit(data, y, kernel, 10, 0.0, PivotStrategy::kFull, 0));
  CHECK_THROWS(krr_fit(data, y, kernel, 11, 1e-3, PivotStrategy::kFull, 0));
  CHECK_THROWS(krr_fit(data, Eigen::VectorXd::Ones(9), kernel, 5, 1e-3, PivotStrategy::kFull, 0));
}

TEST_CASE("kmeans recovers exact repeated locations") {
  Eigen::MatrixXd points(6, 2);
  points << 0, 0, 0, 0, 5, 5, 5, 5, -3, 1, -3, 1;
  const KmeansResult result = kmeans(points, 3, 11);
  CHECK(result.objective_history.back() == doctest::Approx(0.0));
  CHECK(result.labels[0] == result.labels[1]);
  CHECK(result.labels[2] == result.labels[3]);
  CHECK(result.labels[4] == result.labels[5]);
  CHECK(result.labels[0] != result.labels[2]);
}

TEST_CASE("kmeans with one cluster per point has zero objective") {
  const Eigen::MatrixXd points = test_helpers::random_gaussian(5, 2, 13);
  const KmeansResult result = kmeans(points, 5, 1);
  CHECK(result.objective_history.back() == doctest::Approx(0.0).epsilon(1e-12));
  std::vector<int> sorted = result.labels;
  std::sort(sorted.begin(), sorted.end());
  CHECK(sorted == std::vector<int>{0, 1, 2, 3, 4});
}

TEST_CASE("kmeans on the two-site line finds both centroids") {
  Eigen::MatrixXd points(4, 1);
  points << 0, 0, 10, 10;
  const KmeansResult result = kmeans(points, 2, 21);
  std::vector<double> centroids = {result.centroids(0, 0), result.centroids(1, 0)};
  std::sort(centroids.begin(), centroids.end());
  CHECK(centroids[0] == doctest::Approx(0.0));
  CHECK(centroids[1] == doctest::Approx(10.0));
  CHECK(result.objective_history.back() == doctest::Approx(0.0));
}

TEST_CASE("kmeans objective never increases across iterations") {
  const Eigen::MatrixXd points = test_helpers::random_gaussian(200, 3, 17);
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const KmeansResult result = kmeans(points, 6, seed);
    for (std::size_t i = 1; i < result.objective_history.size(); ++i)
      CHECK(result.objective_history[i] <= result.objective_history[i - 1] * (1 + 1e-12));
  }
}

TEST_CASE("kmeans validates cluster counts") {
  const Eigen::MatrixXd points = test_helpers::random_gaussian(4, 2, 19);
  CHECK_THROWS(kmeans(points, 5, 0));
  CHECK_THROWS(kmeans(points, 0, 0));
}

TEST_CASE("clustering error closed forms") {
  const std::vector<int> a = {0, 0, 1, 1};
  CHECK(clustering_error(a, a, 2) == doctest::Approx(0.0));
  const std::vector<int> swapped = {1, 1, 0, 0};
  CHECK(clustering_error(swapped, a, 2) == doctest::Approx(0.0));
  const std::vector<int> off = {0, 1, 1, 1};
  CHECK(clustering_error(off, a, 2) == doctest::Approx(0.25));
}

TEST_CASE("clustering error is invariant under relabeling either side") {
  SplitMix64 rng(23);
  const int c = 5;
  std::vector<int> labels(60), reference(60);
  for (auto& l : labels) l = static_cast<int>(rng.next_double() * c);
  for (auto& l : reference) l = static_cast<int>(rng.next_double() * c);
  const double base = clustering_error(labels, reference, c);
  std::vector<int> perm = {2, 0, 4, 1, 3};
  std::vector<int> relabeled(60);
  for (std::size_t i = 0; i < labels.size(); ++i) relabeled[i] = perm[static_cast<std::size_t>(labels[i])];
  CHECK(clustering_error(relabeled, reference, c) == doctest::Approx(base));
  std::vector<int> ref_relabeled(60);
  for (std::size_t i = 0; i < reference.size(); ++i) ref_relabeled[i] = perm[static_cast<std::size_t>(reference[i])];
  CHECK(clustering_error(labels, ref_relabeled, c) == doctest::Approx(base));
}

TEST_CASE("assignment matching agrees with permutation search") {
  // The Hungarian path (c > 8) must reproduce the exhaustive answer; compare
  // both on the same confusion structure by embedding c = 6 labels into a
  // 9-letter alphabet where three letters stay unused.
  SplitMix64 rng(29);
  std::vector<int> labels(120), reference(120);
  for (auto& l : labels) l = static_cast<int>(rng.next_double() * 6);
  for (auto& l : reference) l = static_cast<int>(rng.next_double() * 6);
  const double exhaustive = clustering_error(labels, reference, 6);
  const double assignment = clustering_error(labels, reference, 9);
  CHECK(assignment == doctest::Approx(exhaustive));
}

TEST_CASE("two far blobs are clustered perfectly") {
  const LabeledDataset blobs = gen_blobs(300, 2, 2, 20.0, 0.5, 31);
  const ClusterModel model = spectral_cluster(blobs.points, KernelSpec(KernelFamily::kGaussian, 1.0),
                                              10, 2, 2, PivotStrategy::kRpcholesky, 5);
  CHECK(clustering_error(model.labels, blobs.labels, 2) == doctest::Approx(0.0));
}

TEST_CASE("one cluster collapses every label to zero") {
  const LabeledDataset blobs = gen_blobs(100, 2, 2, 10.0, 0.5, 37);
  const ClusterModel model = spectral_cluster(blobs.points, KernelSpec(KernelFamily::kGaussian, 1.0),
                                              8, 2, 1, PivotStrategy::kRpcholesky, 6);
  for (int l : model.labels) CHECK(l == 0);
}

TEST_CASE("embedding columns are orthonormal under the row-sum weighting") {
  const LabeledDataset blobs = gen_blobs(150, 2, 3, 12.0, 0.4, 41);
  const ClusterModel model = spectral_cluster(blobs.points, KernelSpec(KernelFamily::kGaussian, 0.8),
                                              12, 3, 3, PivotStrategy::kRpcholesky, 7);
  // embedding = D^{-1/2} U restricted to m columns, so D^{1/2} V = U must
  // satisfy U^T U = I.
  const Eigen::MatrixXd u = model.row_sums.array().sqrt().matrix().asDiagonal() * model.embedding;
  CHECK((u.transpose() * u - Eigen::MatrixXd::Identity(3, 3)).cwiseAbs().maxCoeff() <= 1e-10);
}

TEST_CASE("clustering outcome is stable under permuting the input points") {
  const LabeledDataset blobs = gen_blobs(120, 2, 3, 15.0, 0.3, 43);
  const Eigen::Index n = blobs.points.size();
  // Reverse the point order (a fixed permutation).
  Eigen::MatrixXd reversed(2, n);
  for (Eigen::Index i = 0; i < n; ++i) reversed.col(i) = blobs.points.point(n - 1 - i);
  const KernelSpec kernel(KernelFamily::kGaussian, 0.9);
  const ClusterModel base =
      spectral_cluster(blobs.points, kernel, 9, 3, 3, PivotStrategy::kGreedy, 11);
  const ClusterModel permuted =
      spectral_cluster(Dataset(reversed), kernel, 9, 3, 3, PivotStrategy::kGreedy, 11);
  std::vector<int> realigned(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i)
    realigned[static_cast<std::size_t>(i)] = permuted.labels[static_cast<std::size_t>(n - 1 - i)];
  CHECK(clustering_error(realigned, base.labels, 3) == doctest::Approx(0.0));
}

TEST_CASE("spectral clustering argument validation") {
  const LabeledDataset blobs = gen_blobs(50, 2, 2, 10.0, 0.3, 47);
  const KernelSpec kernel(KernelFamily::kGaussian, 1.0);
  CHECK_THROWS(spectral_cluster(blobs.points, kernel, 5, 6, 2, PivotStrategy::kRpcholesky, 0));
  CHECK_THROWS(spectral_cluster(blobs.points, kernel, 5, 0, 2, PivotStrategy::kRpcholesky, 0));
}

TEST_CASE("cluster model round-trips through the text format") {
  const LabeledDataset blobs = gen_blobs(80, 2, 2, 12.0, 0.4, 53);
  const ClusterModel model = spectral_cluster(blobs.points, KernelSpec(KernelFamily::kGaussian, 1.0),
                                              6, 2, 2, PivotStrategy::kRpcholesky, 3);
  const std::string path = temp_path("rpchol_cluster_model.txt");
  save_cluster_model(model, path);
  const ClusterModel loaded = load_cluster_model(path);
  CHECK(loaded.labels == model.labels);
  CHECK(loaded.m == model.m);
  CHECK(loaded.centroids == model.centroids);
  CHECK(loaded.embedding == model.embedding);
  CHECK(loaded.row_sums == model.row_sums);
  std::filesystem::remove(path);
}
