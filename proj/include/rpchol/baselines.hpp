#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <string>
#include <utility>

#include "rpchol/factor.hpp"
#include "rpchol/oracle.hpp"

namespace rpchol {

/// Greedy (complete) pivoting: each pivot is the largest entry of the
/// maintained residual diagonal, ties broken by lowest index. Deterministic;
/// uses the same factored update and acceptance floor as rpcholesky, so the
/// cost is the same (k+1)N entry evaluations.
std::pair<NystromFactor, PivotTrace> greedy_pivots(const EntryOracle& oracle, const StopRule& stop);

/// Pivots drawn uniformly at random, with or without replacement. Duplicates
/// under replacement contribute no new column; requested-minus-accepted draws
/// are tallied as rejected.
std::pair<NystromFactor, PivotTrace> uniform_pivots(const EntryOracle& oracle, Eigen::Index k,
                                                    bool with_replacement, std::uint64_t seed);

/// Non-adaptive diagonal sampling: k iid draws proportional to diag(A),
/// deduplicated, then factored.
std::pair<NystromFactor, PivotTrace> diagonal_pivots(const EntryOracle& oracle, Eigen::Index k,
                                                     std::uint64_t seed);

/// Exact ridge leverage scores of a dense psd matrix, with the standard
/// oversampled inclusion probabilities.
struct RlsScores {
  double lambda = 0.0;
  double delta = 0.0;
  Eigen::VectorXd scores;         // diag(A (A + lambda I)^{-1}), clamped to [0,1]
  Eigen::VectorXd probabilities;  // min{1, 16 * scores * log(sum(scores)/delta)}, clamped to [0,1]
};

/// Dense-solve leverage scores; desk scale (N <= 2000), lambda > 0,
/// delta in (0, 1/8).
RlsScores rls_scores_exact(const Eigen::MatrixXd& matrix, double lambda, double delta);

/// Leverage-score sampling: index i joins the pivot set independently with
/// probability p_i, then the set is factored through the pseudoinverse
/// pathway. The selected rank is random; an empty set is a valid outcome.
std::pair<NystromFactor, PivotTrace> rls_pivots(const Eigen::MatrixXd& matrix, double lambda,
                                                double delta, std::uint64_t seed);

/// Uniform strategy vocabulary shared by the applications and the benchmark
/// harness.
enum class PivotStrategy {
  kRpcholesky,
  kBlocked,
  kGreedy,
  kUniform,
  kDiagonal,
  kRls,
  kFull,  // all indices in order; reference configurations only
};

struct StrategyOptions {
  Eigen::Index block = 16;              // kBlocked only
  bool uniform_with_replacement = false;
  double rls_lambda = 0.0;              // must be set for kRls
  double rls_delta = 0.05;
};

/// Runs the requested strategy for (up to) k accepted pivots. kRls ignores k
/// (its rank is random) and requires an explicit oracle.
std::pair<NystromFactor, PivotTrace> select_factor(const EntryOracle& oracle,
                                                   PivotStrategy strategy, Eigen::Index k,
                                                   std::uint64_t seed,
                                                   const StrategyOptions& options = {});

PivotStrategy strategy_from_string(const std::string& name);
std::string to_string(PivotStrategy strategy);

}  // namespace rpchol
