#include "rpchol/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "rpchol/linalg.hpp"
#include "rpchol/rng.hpp"
#include "rpchol/rpcholesky.hpp"

namespace rpchol {

namespace {

Eigen::Index argmax_first(const Eigen::VectorXd& v) {
  Eigen::Index best = 0;
  for (Eigen::Index i = 1; i < v.size(); ++i)
    if (v[i] > v[best]) best = i;
  return best;
}

std::vector<Eigen::Index> dedup_keep_first(const std::vector<Eigen::Index>& draws) {
  std::vector<Eigen::Index> unique;
  for (Eigen::Index s : draws)
    if (std::find(unique.begin(), unique.end(), s) == unique.end()) unique.push_back(s);
  return unique;
}

}  // namespace

std::pair<NystromFactor, PivotTrace> greedy_pivots(const EntryOracle& oracle, const StopRule& stop) {
  const Eigen::Index n = oracle.dim();
  const std::uint64_t evals_before = oracle.entry_evals();

  Eigen::VectorXd d = oracle.diagonal().cwiseMax(0.0);
  const double initial_trace = d.sum();
  const double floor = detail::pivot_floor(initial_trace, n);
  const double stop_trace =
      stop.mode() == StopRule::Mode::kTolerance ? std::max(stop.eta() * initial_trace, floor) : floor;
  const Eigen::Index cap = stop.rank_cap(n);

  NystromFactor factor;
  factor.source_dim = n;
  factor.matrix.resize(n, cap);
  PivotTrace trace;
  while (static_cast<Eigen::Index>(factor.pivots.size()) < cap) {
    if (d.sum() <= stop_trace) break;
    const Eigen::Index s = argmax_first(d);
    if (d[s] <= floor) break;
    const Eigen::Index ncols = static_cast<Eigen::Index>(factor.pivots.size());
    if (!detail::append_pivot_column(oracle, factor.matrix, ncols, d, s, floor)) {
      ++trace.rejected_pivots;
      continue;
    }
    factor.pivots.push_back(s);
    trace.residual_trace_history.push_back(d.sum());
  }
  factor.matrix.conservativeResize(Eigen::NoChange, static_cast<Eigen::Index>(factor.pivots.size()));
  trace.accepted = static_cast<Eigen::Index>(factor.pivots.size());
  trace.entry_evals = oracle.entry_evals() - evals_before;
  return {std::move(factor), std::move(trace)};
}

std::pair<NystromFactor, PivotTrace> uniform_pivots(const EntryOracle& oracle, Eigen::Index k,
                                                    bool with_replacement, std::uint64_t seed) {
  const Eigen::Index n = oracle.dim();
  if (k < 1) throw std::invalid_argument("uniform_pivots: rank must be >= 1");
  if (!with_replacement && k > n)
    throw std::invalid_argument("uniform_pivots: rank exceeds dimension without replacement");
  const std::uint64_t evals_before = oracle.entry_evals();
  SplitMix64 rng(seed);

  std::vector<Eigen::Index> draws;
  draws.reserve(static_cast<std::size_t>(k));
  if (with_replacement) {
    for (Eigen::Index t = 0; t < k; ++t)
      draws.push_back(std::min<Eigen::Index>(
          static_cast<Eigen::Index>(rng.next_double() * static_cast<double>(n)), n - 1));
  } else {
    std::vector<Eigen::Index> pool(static_cast<std::size_t>(n));
    std::iota(pool.begin(), pool.end(), Eigen::Index{0});
    for (Eigen::Index t = 0; t < k; ++t) {
      const Eigen::Index span = n - t;
      const Eigen::Index j =
          t + std::min<Eigen::Index>(
                  static_cast<Eigen::Index>(rng.next_double() * static_cast<double>(span)), span - 1);
      std::swap(pool[static_cast<std::size_t>(t)], pool[static_cast<std::size_t>(j)]);
      draws.push_back(pool[static_cast<std::size_t>(t)]);
    }
  }
  const std::vector<Eigen::Index> unique = dedup_keep_first(draws);
  auto [factor, trace] = detail::run_pivot_sequence(oracle, unique, oracle.diagonal(), evals_before);
  trace.rejected_pivots += static_cast<Eigen::Index>(draws.size() - unique.size());
  return {std::move(factor), std::move(trace)};
}

std::pair<NystromFactor, PivotTrace> diagonal_pivots(const EntryOracle& oracle, Eigen::Index k,
                                                     std::uint64_t seed) {
  if (k < 1) throw std::invalid_argument("diagonal_pivots: rank must be >= 1");
  const std::uint64_t evals_before = oracle.entry_evals();
  SplitMix64 rng(seed);

  const Eigen::VectorXd d0 = oracle.diagonal().cwiseMax(0.0);
  const double total = d0.sum();
  if (!(total > 0.0)) throw std::invalid_argument("diagonal_pivots: zero trace");

  std::vector<Eigen::Index> draws;
  draws.reserve(static_cast<std::size_t>(k));
  for (Eigen::Index t = 0; t < k; ++t) draws.push_back(sample_proportional(d0, total, rng));
  const std::vector<Eigen::Index> unique = dedup_keep_first(draws);
  auto [factor, trace] = detail::run_pivot_sequence(oracle, unique, d0, evals_before);
  trace.rejected_pivots += static_cast<Eigen::Index>(draws.size() - unique.size());
  return {std::move(factor), std::move(trace)};
}

RlsScores rls_scores_exact(const Eigen::MatrixXd& matrix, double lambda, double delta) {
  if (matrix.rows() != matrix.cols()) throw std::invalid_argument("rls_scores_exact: matrix must be square");
  if (!(lambda > 0.0)) throw std::invalid_argument("rls_scores_exact: lambda must be positive");
  if (!(delta > 0.0 && delta < 0.125))
    throw std::invalid_argument("rls_scores_exact: delta must lie in (0, 1/8)");
  Eigen::MatrixXd shifted = matrix;
  shifted.diagonal().array() += lambda;

  RlsScores out;
  out.lambda = lambda;
  out.delta = delta;
  out.scores = solve_spd(shifted, matrix).diagonal().cwiseMax(0.0).cwiseMin(1.0);
  const double oversample = 16.0 * std::log(out.scores.sum() / delta);
  out.probabilities = (out.scores * oversample).cwiseMax(0.0).cwiseMin(1.0);
  return out;
}

std::pair<NystromFactor, PivotTrace> rls_pivots(const Eigen::MatrixXd& matrix, double lambda,
                                                double delta, std::uint64_t seed) {
  const RlsScores scores = rls_scores_exact(matrix, lambda, delta);
  SplitMix64 rng(seed);
  std::vector<Eigen::Index> selected;
  for (Eigen::Index i = 0; i < scores.probabilities.size(); ++i)
    if (rng.next_double() < scores.probabilities[i]) selected.push_back(i);

  const EntryOracle oracle = EntryOracle::from_dense(matrix);
  NystromFactor factor = nystrom_factor_from_pivots(oracle, selected);
  PivotTrace trace;
  trace.accepted = static_cast<Eigen::Index>(selected.size());
  // Score formation reads the full matrix; that dominates the billing.
  trace.entry_evals = static_cast<std::uint64_t>(matrix.rows()) * static_cast<std::uint64_t>(matrix.cols());
  trace.residual_trace_history.push_back(std::max(0.0, matrix.trace() - factor.captured_trace()));
  return {std::move(factor), std::move(trace)};
}

std::pair<NystromFactor, PivotTrace> select_factor(const EntryOracle& oracle,
                                                   PivotStrategy strategy, Eigen::Index k,
                                                   std::uint64_t seed,
                                                   const StrategyOptions& options) {
  switch (strategy) {
    case PivotStrategy::kRpcholesky:
      return rpcholesky(oracle, StopRule::fixed_rank(k), seed);
    case PivotStrategy::kBlocked:
      return rpcholesky_blocked(oracle, k, options.block, seed);
    case PivotStrategy::kGreedy:
      return greedy_pivots(oracle, StopRule::fixed_rank(k));
    case PivotStrategy::kUniform:
      return uniform_pivots(oracle, k, options.uniform_with_replacement, seed);
    case PivotStrategy::kDiagonal:
      return diagonal_pivots(oracle, k, seed);
    case PivotStrategy::kRls: {
      if (!oracle.is_explicit())
        throw std::invalid_argument("select_factor: rls requires an explicit matrix");
      if (!(options.rls_lambda > 0.0))
        throw std::invalid_argument("select_factor: rls requires rls_lambda > 0");
      return rls_pivots(oracle.dense(), options.rls_lambda, options.rls_delta, seed);
    }
    case PivotStrategy::kFull: {
      std::vector<Eigen::Index> all(static_cast<std::size_t>(oracle.dim()));
      std::iota(all.begin(), all.end(), Eigen::Index{0});
      return factor_from_pivot_sequence(oracle, all);
    }
  }
  throw std::logic_error("select_factor: unknown strategy");
}

PivotStrategy strategy_from_string(const std::string& name) {
  if (name == "rpcholesky") return PivotStrategy::kRpcholesky;
  if (name == "blocked") return PivotStrategy::kBlocked;
  if (name == "greedy") return PivotStrategy::kGreedy;
  if (name == "uniform") return PivotStrategy::kUniform;
  if (name == "diagonal") return PivotStrategy::kDiagonal;
  if (name == "rls") return PivotStrategy::kRls;
  if (name == "full") return PivotStrategy::kFull;
  throw std::invalid_argument("unknown strategy: " + name);
}

std::string to_string(PivotStrategy strategy) {
  switch (strategy) {
    case PivotStrategy::kRpcholesky: return "rpcholesky";
    case PivotStrategy::kBlocked: return "blocked";
    case PivotStrategy::kGreedy: return "greedy";
    case PivotStrategy::kUniform: return "uniform";
    case PivotStrategy::kDiagonal: return "diagonal";
    case PivotStrategy::kRls: return "rls";
    case PivotStrategy::kFull: return "full";
  }
  return "unknown";
}

}  // namespace rpchol
