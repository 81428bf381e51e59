#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <vector>

namespace rpchol {

/// Low-rank psd factor F with its pivot set: the represented approximation is
/// F F^T, with one column appended per accepted pivot, in pivot order.
///
/// rank() == pivots.size() on every path except the degenerate blocked case,
/// where a rank-deficient in-block system yields fewer columns than pivots.
struct NystromFactor {
  Eigen::MatrixXd matrix;             // N x rank
  std::vector<Eigen::Index> pivots;   // ordered, distinct
  Eigen::Index source_dim = 0;

  Eigen::Index rank() const { return matrix.cols(); }
  /// tr(F F^T) = ||F||_F^2.
  double captured_trace() const { return matrix.squaredNorm(); }
  /// Dense N x N approximation; desk-scale validation only.
  Eigen::MatrixXd dense() const { return matrix * matrix.transpose(); }
};

/// Per-run diagnostics shared by all pivot strategies.
struct PivotTrace {
  std::vector<double> residual_trace_history;  // sum of the residual diagonal after each step
  std::uint64_t entry_evals = 0;
  Eigen::Index accepted = 0;
  Eigen::Index rejected_pivots = 0;
};

/// Termination rule: a fixed number of accepted pivots, or a relative trace
/// tolerance (stop once the residual trace falls to eta * tr A).
class StopRule {
 public:
  enum class Mode { kFixedRank, kTolerance };

  static StopRule fixed_rank(Eigen::Index k);
  static StopRule tolerance(double eta);

  Mode mode() const { return mode_; }
  Eigen::Index rank() const { return rank_; }
  double eta() const { return eta_; }

  /// Largest possible number of accepted pivots for dimension n.
  Eigen::Index rank_cap(Eigen::Index n) const {
    return mode_ == Mode::kFixedRank ? std::min(rank_, n) : n;
  }

 private:
  StopRule(Mode mode, Eigen::Index rank, double eta) : mode_(mode), rank_(rank), eta_(eta) {}
  Mode mode_;
  Eigen::Index rank_;
  double eta_;
};

}  // namespace rpchol
