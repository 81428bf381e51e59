#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "rpchol/factor.hpp"
#include "rpchol/oracle.hpp"

namespace rpchol {

/// Result of the reference (dense, O(kN^2)) implementation, which carries the
/// full approximation and residual matrices for validation.
struct DenseFactorizationResult {
  Eigen::MatrixXd approximation;  // running low-rank approximation
  Eigen::MatrixXd residual;       // Schur complement after the accepted pivots
  std::vector<Eigen::Index> pivots;
  PivotTrace trace;
};

/// Reference implementation: maintains the dense residual and approximation,
/// drawing each pivot in proportion to the residual diagonal. Intended for
/// N <= 2000.
DenseFactorizationResult rpcholesky_naive(const Eigen::MatrixXd& matrix, const StopRule& stop,
                                          std::uint64_t seed);

/// Same dense recurrence, but driven by a caller-supplied pivot sequence.
/// Used to replay a factored run against the reference arithmetic.
DenseFactorizationResult rpcholesky_naive_forced(const Eigen::MatrixXd& matrix,
                                                 std::span<const Eigen::Index> pivots);

/// Randomly pivoted partial Cholesky, factored form. Pivots are sampled in
/// proportion to the maintained residual diagonal; each accepted pivot costs
/// one oracle column, so a run with k accepted pivots and no rejections bills
/// exactly (k+1)N entry evaluations (N for the initial diagonal).
///
/// Sampled pivots whose residual diagonal has collapsed below the acceptance
/// floor eps * tr(A) * N are rejected and redrawn; the run ends early once
/// the residual trace reaches the stop rule's target or no acceptable pivot
/// remains.
std::pair<NystromFactor, PivotTrace> rpcholesky(const EntryOracle& oracle, const StopRule& stop,
                                                std::uint64_t seed);

/// Blocked variant: draws up to `block` iid pivots per iteration, removes
/// duplicates, and eliminates the surviving set jointly through an in-block
/// Cholesky factorization. A singleton block takes the exact single-pivot
/// code path, so block == 1 reproduces rpcholesky() bit for bit at the same
/// seed. If the in-block factorization breaks down (near-dependent columns),
/// the block falls back to an eigendecomposition and appends only the
/// directions above eps * tr * |U|.
std::pair<NystromFactor, PivotTrace> rpcholesky_blocked(const EntryOracle& oracle, Eigen::Index k,
                                                        Eigen::Index block, std::uint64_t seed);

/// Applies the factored partial-Cholesky update along a fixed pivot sequence
/// (pivots whose residual diagonal collapsed below the floor are skipped).
std::pair<NystromFactor, PivotTrace> factor_from_pivot_sequence(
    const EntryOracle& oracle, std::span<const Eigen::Index> pivots);

/// Column Nystrom approximation A(:,S) A(S,S)^+ A(S,:) for an arbitrary pivot
/// set, via a thresholded pseudoinverse. Validation tool; N <= 2000.
Eigen::MatrixXd nystrom_from_pivots(const EntryOracle& oracle,
                                    std::span<const Eigen::Index> pivots);

/// Factored form of nystrom_from_pivots: returns F with F F^T equal to the
/// pseudoinverse-based approximation.
NystromFactor nystrom_factor_from_pivots(const EntryOracle& oracle,
                                         std::span<const Eigen::Index> pivots);

namespace detail {

/// Acceptance floor for residual diagonal entries.
double pivot_floor(double initial_trace, Eigen::Index n);

/// Appends the partial-Cholesky column for pivot s to F's column `ncols`,
/// updating the residual diagonal in place. When the recomputed pivot value
/// sits at or below `floor` the pivot is numerically dead: nothing is
/// appended, its diagonal entry is zeroed, and false is returned.
bool append_pivot_column(const EntryOracle& oracle, Eigen::MatrixXd& factor, Eigen::Index ncols,
                         Eigen::VectorXd& residual_diag, Eigen::Index s, double floor);

/// Factored update along a fixed sequence, reusing an already-billed residual
/// diagonal. `evals_before` is the oracle tally at the start of the caller.
std::pair<NystromFactor, PivotTrace> run_pivot_sequence(const EntryOracle& oracle,
                                                        std::span<const Eigen::Index> pivots,
                                                        Eigen::VectorXd residual_diag,
                                                        std::uint64_t evals_before);

}  // namespace detail

}  // namespace rpchol
