#pragma once

#include <Eigen/Dense>

#include <atomic>
#include <cstdint>
#include <memory>
#include <span>

#include "rpchol/dataset.hpp"
#include "rpchol/kernels.hpp"

namespace rpchol {

/// Uniform access layer for a symmetric psd matrix that is either stored
/// explicitly or defined implicitly as a kernel Gram matrix over a dataset.
///
/// Every access is billed per scalar entry on an internal tally, so the exact
/// number of entry evaluations spent by an algorithm can be read back as an
/// integer. Reads are safe from multiple threads; the tally is atomic.
class EntryOracle {
 public:
  /// Explicit source. The matrix is scanned for symmetry (tolerance 1e-12
  /// relative to the largest entry) and stored in exactly symmetrized form.
  static EntryOracle from_dense(Eigen::MatrixXd matrix);

  /// Kernel source over a dataset; nothing is validated or materialized.
  static EntryOracle from_kernel(KernelSpec kernel, std::shared_ptr<const Dataset> data);
  static EntryOracle from_kernel(KernelSpec kernel, Dataset data);

  EntryOracle(const EntryOracle& other);
  EntryOracle& operator=(const EntryOracle& other);
  EntryOracle(EntryOracle&& other) noexcept;
  EntryOracle& operator=(EntryOracle&& other) noexcept;

  Eigen::Index dim() const { return dim_; }

  /// a_ij; bills 1 entry.
  double entry(Eigen::Index i, Eigen::Index j) const;

  /// A(:,j); bills N entries.
  Eigen::VectorXd column(Eigen::Index j) const;

  /// (a_11, ..., a_NN); bills N entries.
  Eigen::VectorXd diagonal() const;

  /// A(rows, cols); indices must be in range and distinct within each list.
  /// Bills |rows| * |cols| entries.
  Eigen::MatrixXd submatrix(std::span<const Eigen::Index> rows,
                            std::span<const Eigen::Index> cols) const;

  std::uint64_t entry_evals() const { return eval_counter_.load(std::memory_order_relaxed); }
  void reset_entry_evals() { eval_counter_.store(0, std::memory_order_relaxed); }

  bool is_explicit() const { return static_cast<bool>(dense_); }
  /// The stored matrix of an explicit source; throws for kernel sources.
  const Eigen::MatrixXd& dense() const;
  const Dataset* dataset() const { return data_.get(); }
  const KernelSpec* kernel() const { return dense_ ? nullptr : &kernel_; }

 private:
  EntryOracle() = default;

  void bill(std::uint64_t n) const { eval_counter_.fetch_add(n, std::memory_order_relaxed); }
  void check_index(Eigen::Index i) const;

  Eigen::Index dim_ = 0;
  std::shared_ptr<const Eigen::MatrixXd> dense_;  // explicit source, exactly symmetric
  KernelSpec kernel_;                             // kernel source
  std::shared_ptr<const Dataset> data_;
  mutable std::atomic<std::uint64_t> eval_counter_{0};
};

}  // namespace rpchol
