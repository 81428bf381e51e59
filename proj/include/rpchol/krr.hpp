#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <string>
#include <vector>

#include "rpchol/baselines.hpp"
#include "rpchol/dataset.hpp"
#include "rpchol/kernels.hpp"

namespace rpchol {

/// Kernel ridge regression restricted to a pivot set: the prediction function
/// is f(q) = sum_i beta[i] * K(pivot_point_i, q).
struct KrrModel {
  KernelSpec kernel;
  double lambda = 0.0;
  std::vector<Eigen::Index> pivots;
  Eigen::MatrixXd pivot_points;  // d x k, training points restricted to the pivots
  Eigen::VectorXd beta;
};

/// Fits the restricted regression: selects k pivots with the given strategy,
/// then solves
///   (A(S,:) A(:,S) + lambda N A(S,S)) beta = A(S,:) y
/// over the k x k system. Costs O(kN) entry evaluations beyond the strategy's
/// own. If the Cholesky solve reports an indefinite system, a jitter of
/// 10 eps tr(A(S,S)) is added once and the solve retried.
KrrModel krr_fit(const Dataset& train, const Eigen::VectorXd& targets, const KernelSpec& kernel,
                 Eigen::Index k, double lambda, PivotStrategy strategy, std::uint64_t seed,
                 const StrategyOptions& options = {});

/// Evaluates the restricted prediction function; O(k) kernel evaluations per
/// query point.
Eigen::VectorXd krr_predict(const KrrModel& model, const Dataset& queries);

/// Symmetric mean absolute percentage error:
///   mean |y - p| / ((|y| + |p|) / 2), with the 0/0 term defined as 0.
double smape(const Eigen::VectorXd& y_true, const Eigen::VectorXd& y_pred);

/// Versioned text serialization of the model.
void save_krr_model(const KrrModel& model, const std::string& path);
KrrModel load_krr_model(const std::string& path);

}  // namespace rpchol
