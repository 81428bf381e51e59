#include "rpchol/rpcholesky.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "rpchol/linalg.hpp"
#include "rpchol/rng.hpp"

namespace rpchol {

namespace detail {

double pivot_floor(double initial_trace, Eigen::Index n) {
  return std::numeric_limits<double>::epsilon() * initial_trace * static_cast<double>(n);
}

bool append_pivot_column(const EntryOracle& oracle, Eigen::MatrixXd& factor, Eigen::Index ncols,
                         Eigen::VectorXd& residual_diag, Eigen::Index s, double floor) {
  Eigen::VectorXd g = oracle.column(s);
  if (ncols > 0)
    g.noalias() -= factor.leftCols(ncols) * factor.row(s).head(ncols).transpose();
  // g[s] tracks residual_diag[s] up to roundoff; re-check before dividing.
  if (!(g[s] > floor)) {
    residual_diag[s] = 0.0;
    return false;
  }
  factor.col(ncols) = g / std::sqrt(g[s]);
  residual_diag -= factor.col(ncols).cwiseAbs2();
  residual_diag = residual_diag.cwiseMax(0.0);
  return true;
}

namespace {

void grow_columns(Eigen::MatrixXd& factor, Eigen::Index needed) {
  if (factor.cols() >= needed) return;
  Eigen::Index cap = std::max<Eigen::Index>(factor.cols(), 16);
  while (cap < needed) cap *= 2;
  factor.conservativeResize(Eigen::NoChange, std::min(cap, factor.rows()));
}

/// Upper-triangular Cholesky W = R^T R with breakdown detection.
/// Returns false as soon as a pivot fails to be strictly positive.
bool cholesky_upper(const Eigen::MatrixXd& w, Eigen::MatrixXd& r) {
  const Eigen::Index m = w.rows();
  r = Eigen::MatrixXd::Zero(m, m);
  for (Eigen::Index j = 0; j < m; ++j) {
    double pivot = w(j, j) - r.col(j).head(j).squaredNorm();
    if (!(pivot > 0.0)) return false;
    r(j, j) = std::sqrt(pivot);
    for (Eigen::Index c = j + 1; c < m; ++c)
      r(j, c) = (w(j, c) - r.col(j).head(j).dot(r.col(c).head(j))) / r(j, j);
  }
  return true;
}

/// X = G R^{-1} for upper-triangular R, column by column.
Eigen::MatrixXd right_solve_upper(const Eigen::MatrixXd& g, const Eigen::MatrixXd& r) {
  Eigen::MatrixXd x(g.rows(), g.cols());
  for (Eigen::Index j = 0; j < g.cols(); ++j) {
    Eigen::VectorXd col = g.col(j);
    for (Eigen::Index l = 0; l < j; ++l) col -= r(l, j) * x.col(l);
    x.col(j) = col / r(j, j);
  }
  return x;
}

}  // namespace

}  // namespace detail

StopRule StopRule::fixed_rank(Eigen::Index k) {
  if (k < 1) throw std::invalid_argument("StopRule: rank must be >= 1");
  return StopRule(Mode::kFixedRank, k, 0.0);
}

StopRule StopRule::tolerance(double eta) {
  if (!(eta > 0.0 && eta < 1.0)) throw std::invalid_argument("StopRule: eta must lie in (0,1)");
  return StopRule(Mode::kTolerance, 0, eta);
}

namespace {

struct DenseStepper {
  explicit DenseStepper(const Eigen::MatrixXd& matrix)
      : approximation(Eigen::MatrixXd::Zero(matrix.rows(), matrix.cols())), residual(matrix) {}

  void eliminate(Eigen::Index s) {
    const Eigen::VectorXd col = residual.col(s);
    const double pivot = residual(s, s);
    approximation.noalias() += col * col.transpose() / pivot;
    residual.noalias() -= col * col.transpose() / pivot;
  }

  Eigen::MatrixXd approximation;
  Eigen::MatrixXd residual;
};

}  // namespace

DenseFactorizationResult rpcholesky_naive(const Eigen::MatrixXd& matrix, const StopRule& stop,
                                          std::uint64_t seed) {
  const Eigen::Index n = matrix.rows();
  if (n != matrix.cols()) throw std::invalid_argument("rpcholesky_naive: matrix must be square");
  const double scale = std::max(matrix.cwiseAbs().maxCoeff(), 1e-300);
  if ((matrix - matrix.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale)
    throw std::invalid_argument("rpcholesky_naive: matrix is not symmetric");

  SplitMix64 rng(seed);
  DenseStepper stepper(matrix);
  const double initial_trace = matrix.trace();
  const double floor = detail::pivot_floor(initial_trace, n);
  const double stop_trace =
      stop.mode() == StopRule::Mode::kTolerance ? std::max(stop.eta() * initial_trace, floor) : floor;

  DenseFactorizationResult out;
  out.trace.entry_evals = static_cast<std::uint64_t>(n) * static_cast<std::uint64_t>(n);
  const Eigen::Index cap = stop.rank_cap(n);
  while (static_cast<Eigen::Index>(out.pivots.size()) < cap) {
    const Eigen::VectorXd diag = stepper.residual.diagonal().cwiseMax(0.0);
    const double total = diag.sum();
    if (total <= stop_trace) break;
    if (diag.maxCoeff() <= floor) break;
    const Eigen::Index s = sample_proportional(diag, total, rng);
    if (diag[s] <= floor) {
      ++out.trace.rejected_pivots;
      continue;
    }
    stepper.eliminate(s);
    out.pivots.push_back(s);
    out.trace.residual_trace_history.push_back(stepper.residual.diagonal().cwiseMax(0.0).sum());
  }
  out.approximation = std::move(stepper.approximation);
  out.residual = std::move(stepper.residual);
  out.trace.accepted = static_cast<Eigen::Index>(out.pivots.size());
  return out;
}

DenseFactorizationResult rpcholesky_naive_forced(const Eigen::MatrixXd& matrix,
                                                 std::span<const Eigen::Index> pivots) {
  const Eigen::Index n = matrix.rows();
  if (n != matrix.cols()) throw std::invalid_argument("rpcholesky_naive_forced: matrix must be square");
  DenseStepper stepper(matrix);
  DenseFactorizationResult out;
  out.trace.entry_evals = static_cast<std::uint64_t>(n) * static_cast<std::uint64_t>(n);
  for (Eigen::Index s : pivots) {
    if (s < 0 || s >= n) throw std::out_of_range("rpcholesky_naive_forced: pivot out of range");
    if (!(stepper.residual(s, s) > 0.0))
      throw std::invalid_argument("rpcholesky_naive_forced: nonpositive pivot value");
    stepper.eliminate(s);
    out.pivots.push_back(s);
    out.trace.residual_trace_history.push_back(stepper.residual.diagonal().cwiseMax(0.0).sum());
  }
  out.approximation = std::move(stepper.approximation);
  out.residual = std::move(stepper.residual);
  out.trace.accepted = static_cast<Eigen::Index>(out.pivots.size());
  return out;
}

std::pair<NystromFactor, PivotTrace> rpcholesky(const EntryOracle& oracle, const StopRule& stop,
                                                std::uint64_t seed) {
  const Eigen::Index n = oracle.dim();
  const std::uint64_t evals_before = oracle.entry_evals();
  SplitMix64 rng(seed);

  Eigen::VectorXd d = oracle.diagonal().cwiseMax(0.0);
  const double initial_trace = d.sum();
  const double floor = detail::pivot_floor(initial_trace, n);
  const double stop_trace =
      stop.mode() == StopRule::Mode::kTolerance ? std::max(stop.eta() * initial_trace, floor) : floor;
  const Eigen::Index cap = stop.rank_cap(n);

  NystromFactor factor;
  factor.source_dim = n;
  factor.matrix.resize(n, std::min<Eigen::Index>(cap, 64));
  PivotTrace trace;

  while (static_cast<Eigen::Index>(factor.pivots.size()) < cap) {
    const double total = d.sum();
    if (total <= stop_trace) break;
    if (d.maxCoeff() <= floor) break;
    const Eigen::Index s = sample_proportional(d, total, rng);
    if (d[s] <= floor) {
      ++trace.rejected_pivots;
      continue;
    }
    const Eigen::Index ncols = static_cast<Eigen::Index>(factor.pivots.size());
    detail::grow_columns(factor.matrix, ncols + 1);
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

std::pair<NystromFactor, PivotTrace> rpcholesky_blocked(const EntryOracle& oracle, Eigen::Index k,
                                                        Eigen::Index block, std::uint64_t seed) {
  if (k < 1) throw std::invalid_argument("rpcholesky_blocked: rank must be >= 1");
  if (block < 1) throw std::invalid_argument("rpcholesky_blocked: block must be >= 1");
  const Eigen::Index n = oracle.dim();
  const std::uint64_t evals_before = oracle.entry_evals();
  SplitMix64 rng(seed);

  Eigen::VectorXd d = oracle.diagonal().cwiseMax(0.0);
  const double initial_trace = d.sum();
  const double floor = detail::pivot_floor(initial_trace, n);
  const Eigen::Index cap = std::min(k, n);

  NystromFactor factor;
  factor.source_dim = n;
  factor.matrix.resize(n, std::min<Eigen::Index>(cap, 64));
  PivotTrace trace;

  Eigen::Index ncols = 0;
  while (ncols < cap) {
    const double total = d.sum();
    if (total <= floor) break;
    if (d.maxCoeff() <= floor) break;

    const Eigen::Index want = std::min(block, cap - ncols);
    std::vector<Eigen::Index> unique;
    for (Eigen::Index t = 0; t < want; ++t) {
      const Eigen::Index s = sample_proportional(d, total, rng);
      if (d[s] <= floor) {
        ++trace.rejected_pivots;
        continue;
      }
      if (std::find(unique.begin(), unique.end(), s) == unique.end()) unique.push_back(s);
    }
    if (unique.empty()) continue;  // redraw the whole block

    if (unique.size() == 1) {
      // Exact single-pivot path; keeps block == 1 bitwise equal to rpcholesky().
      detail::grow_columns(factor.matrix, ncols + 1);
      if (!detail::append_pivot_column(oracle, factor.matrix, ncols, d, unique[0], floor)) {
        ++trace.rejected_pivots;
        continue;
      }
      factor.pivots.push_back(unique[0]);
      ++ncols;
      trace.residual_trace_history.push_back(d.sum());
      continue;
    }

    const Eigen::Index m = static_cast<Eigen::Index>(unique.size());
    Eigen::MatrixXd g(n, m);
    for (Eigen::Index c = 0; c < m; ++c) g.col(c) = oracle.column(unique[c]);
    if (ncols > 0) {
      Eigen::MatrixXd pivot_rows(m, ncols);
      for (Eigen::Index c = 0; c < m; ++c) pivot_rows.row(c) = factor.matrix.row(unique[c]).head(ncols);
      g.noalias() -= factor.matrix.leftCols(ncols) * pivot_rows.transpose();
    }
    Eigen::MatrixXd w(m, m);
    for (Eigen::Index c = 0; c < m; ++c)
      for (Eigen::Index r = 0; r < m; ++r) w(r, c) = g(unique[r], c);
    w = 0.5 * (w + w.transpose().eval());

    Eigen::MatrixXd new_cols;
    Eigen::MatrixXd r;
    if (detail::cholesky_upper(w, r)) {
      new_cols = detail::right_solve_upper(g, r);
    } else {
      // Near-dependent columns within the block: keep only the directions
      // whose eigenvalue clears the in-block threshold.
      const SpectralDecomposition eig = sym_eig(w);
      const double cutoff =
          std::numeric_limits<double>::epsilon() * std::max(w.trace(), 0.0) * static_cast<double>(m);
      Eigen::Index kept = 0;
      while (kept < m && eig.eigenvalues[kept] > cutoff) ++kept;
      if (kept == 0) continue;
      new_cols.resize(n, kept);
      new_cols.noalias() = g * eig.eigenvectors.leftCols(kept);
      for (Eigen::Index c = 0; c < kept; ++c) new_cols.col(c) /= std::sqrt(eig.eigenvalues[c]);
    }

    detail::grow_columns(factor.matrix, ncols + new_cols.cols());
    factor.matrix.middleCols(ncols, new_cols.cols()) = new_cols;
    ncols += new_cols.cols();
    factor.pivots.insert(factor.pivots.end(), unique.begin(), unique.end());
    d -= new_cols.rowwise().squaredNorm();
    d = d.cwiseMax(0.0);
    trace.residual_trace_history.push_back(d.sum());
  }

  factor.matrix.conservativeResize(Eigen::NoChange, ncols);
  trace.accepted = static_cast<Eigen::Index>(factor.pivots.size());
  trace.entry_evals = oracle.entry_evals() - evals_before;
  return {std::move(factor), std::move(trace)};
}

namespace detail {

std::pair<NystromFactor, PivotTrace> run_pivot_sequence(const EntryOracle& oracle,
                                                        std::span<const Eigen::Index> pivots,
                                                        Eigen::VectorXd residual_diag,
                                                        std::uint64_t evals_before) {
  const Eigen::Index n = oracle.dim();
  Eigen::VectorXd d = std::move(residual_diag);
  d = d.cwiseMax(0.0);
  const double floor = pivot_floor(d.sum(), n);

  NystromFactor factor;
  factor.source_dim = n;
  factor.matrix.resize(n, static_cast<Eigen::Index>(pivots.size()));
  PivotTrace trace;
  for (Eigen::Index s : pivots) {
    if (s < 0 || s >= n) throw std::out_of_range("run_pivot_sequence: pivot out of range");
    const Eigen::Index ncols = static_cast<Eigen::Index>(factor.pivots.size());
    if (d[s] <= floor || !append_pivot_column(oracle, factor.matrix, ncols, d, s, floor)) {
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

}  // namespace detail

std::pair<NystromFactor, PivotTrace> factor_from_pivot_sequence(
    const EntryOracle& oracle, std::span<const Eigen::Index> pivots) {
  const std::uint64_t evals_before = oracle.entry_evals();
  return detail::run_pivot_sequence(oracle, pivots, oracle.diagonal(), evals_before);
}

namespace {

struct PivotBlocks {
  Eigen::MatrixXd columns;  // N x k, the selected columns
  Eigen::MatrixXd core;     // k x k, symmetrized A(S,S)
};

PivotBlocks fetch_pivot_blocks(const EntryOracle& oracle, std::span<const Eigen::Index> pivots) {
  const Eigen::Index n = oracle.dim();
  const Eigen::Index k = static_cast<Eigen::Index>(pivots.size());
  std::vector<Eigen::Index> sorted(pivots.begin(), pivots.end());
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
    throw std::invalid_argument("nystrom_from_pivots: duplicate pivots");
  PivotBlocks blocks;
  blocks.columns.resize(n, k);
  for (Eigen::Index c = 0; c < k; ++c) blocks.columns.col(c) = oracle.column(pivots[c]);
  blocks.core.resize(k, k);
  for (Eigen::Index c = 0; c < k; ++c)
    for (Eigen::Index r = 0; r < k; ++r) blocks.core(r, c) = blocks.columns(pivots[r], c);
  blocks.core = 0.5 * (blocks.core + blocks.core.transpose().eval());
  return blocks;
}

}  // namespace

Eigen::MatrixXd nystrom_from_pivots(const EntryOracle& oracle,
                                    std::span<const Eigen::Index> pivots) {
  if (pivots.empty()) return Eigen::MatrixXd::Zero(oracle.dim(), oracle.dim());
  const PivotBlocks blocks = fetch_pivot_blocks(oracle, pivots);
  const Eigen::MatrixXd pinv = psd_pseudoinverse(blocks.core, oracle.dim());
  return blocks.columns * pinv * blocks.columns.transpose();
}

NystromFactor nystrom_factor_from_pivots(const EntryOracle& oracle,
                                         std::span<const Eigen::Index> pivots) {
  NystromFactor factor;
  factor.source_dim = oracle.dim();
  factor.pivots.assign(pivots.begin(), pivots.end());
  if (pivots.empty()) {
    factor.matrix.resize(oracle.dim(), 0);
    return factor;
  }
  const PivotBlocks blocks = fetch_pivot_blocks(oracle, pivots);
  const SpectralDecomposition eig = sym_eig(blocks.core);
  const double lambda_max = std::max(eig.eigenvalues[0], 0.0);
  const double cutoff = static_cast<double>(std::max<Eigen::Index>(blocks.core.rows(), oracle.dim())) *
                        std::numeric_limits<double>::epsilon() * lambda_max;
  Eigen::Index kept = 0;
  while (kept < eig.eigenvalues.size() && eig.eigenvalues[kept] > cutoff) ++kept;
  factor.matrix.resize(oracle.dim(), kept);
  factor.matrix.noalias() = blocks.columns * eig.eigenvectors.leftCols(kept);
  for (Eigen::Index c = 0; c < kept; ++c) factor.matrix.col(c) /= std::sqrt(eig.eigenvalues[c]);
  return factor;
}

}  // namespace rpchol
