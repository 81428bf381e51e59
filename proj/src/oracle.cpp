#include "rpchol/oracle.hpp"

#include <algorithm>
#include <stdexcept>
#include <vector>

namespace rpchol {

EntryOracle EntryOracle::from_dense(Eigen::MatrixXd matrix) {
  if (matrix.rows() != matrix.cols()) throw std::invalid_argument("oracle: matrix must be square");
  if (matrix.rows() < 1) throw std::invalid_argument("oracle: empty matrix");
  const double scale = std::max(matrix.cwiseAbs().maxCoeff(), 1e-300);
  const double gap = (matrix - matrix.transpose()).cwiseAbs().maxCoeff();
  if (gap > 1e-12 * scale) throw std::invalid_argument("oracle: matrix is not symmetric");
  // Store (A + A^T)/2 so entry(i,j) == entry(j,i) holds bit for bit.
  Eigen::MatrixXd sym = 0.5 * (matrix + matrix.transpose());
  EntryOracle oracle;
  oracle.dim_ = sym.rows();
  oracle.dense_ = std::make_shared<const Eigen::MatrixXd>(std::move(sym));
  return oracle;
}

EntryOracle EntryOracle::from_kernel(KernelSpec kernel, std::shared_ptr<const Dataset> data) {
  if (!data || data->size() < 1) throw std::invalid_argument("oracle: empty dataset");
  EntryOracle oracle;
  oracle.dim_ = data->size();
  oracle.kernel_ = kernel;
  oracle.data_ = std::move(data);
  return oracle;
}

EntryOracle EntryOracle::from_kernel(KernelSpec kernel, Dataset data) {
  return from_kernel(kernel, std::make_shared<const Dataset>(std::move(data)));
}

EntryOracle::EntryOracle(const EntryOracle& other)
    : dim_(other.dim_),
      dense_(other.dense_),
      kernel_(other.kernel_),
      data_(other.data_),
      eval_counter_(other.entry_evals()) {}

EntryOracle& EntryOracle::operator=(const EntryOracle& other) {
  if (this != &other) {
    dim_ = other.dim_;
    dense_ = other.dense_;
    kernel_ = other.kernel_;
    data_ = other.data_;
    eval_counter_.store(other.entry_evals(), std::memory_order_relaxed);
  }
  return *this;
}

EntryOracle::EntryOracle(EntryOracle&& other) noexcept
    : dim_(other.dim_),
      dense_(std::move(other.dense_)),
      kernel_(other.kernel_),
      data_(std::move(other.data_)),
      eval_counter_(other.entry_evals()) {}

EntryOracle& EntryOracle::operator=(EntryOracle&& other) noexcept {
  dim_ = other.dim_;
  dense_ = std::move(other.dense_);
  kernel_ = other.kernel_;
  data_ = std::move(other.data_);
  eval_counter_.store(other.entry_evals(), std::memory_order_relaxed);
  return *this;
}

void EntryOracle::check_index(Eigen::Index i) const {
  if (i < 0 || i >= dim_) throw std::out_of_range("oracle: index out of range");
}

double EntryOracle::entry(Eigen::Index i, Eigen::Index j) const {
  check_index(i);
  check_index(j);
  bill(1);
  if (dense_) return (*dense_)(i, j);
  return kernel_(data_->point(i), data_->point(j));
}

Eigen::VectorXd EntryOracle::column(Eigen::Index j) const {
  check_index(j);
  bill(static_cast<std::uint64_t>(dim_));
  if (dense_) return dense_->col(j);
  return kernel_.against_all(*data_, data_->point(j));
}

Eigen::VectorXd EntryOracle::diagonal() const {
  bill(static_cast<std::uint64_t>(dim_));
  if (dense_) return dense_->diagonal();
  Eigen::VectorXd d(dim_);
  for (Eigen::Index i = 0; i < dim_; ++i) d[i] = kernel_(data_->point(i), data_->point(i));
  return d;
}

namespace {

void check_distinct(std::span<const Eigen::Index> idx) {
  std::vector<Eigen::Index> sorted(idx.begin(), idx.end());
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
    throw std::invalid_argument("oracle: duplicate indices");
}

}  // namespace

Eigen::MatrixXd EntryOracle::submatrix(std::span<const Eigen::Index> rows,
                                       std::span<const Eigen::Index> cols) const {
  for (Eigen::Index i : rows) check_index(i);
  for (Eigen::Index j : cols) check_index(j);
  check_distinct(rows);
  check_distinct(cols);
  bill(static_cast<std::uint64_t>(rows.size()) * static_cast<std::uint64_t>(cols.size()));
  Eigen::MatrixXd block(rows.size(), cols.size());
  if (dense_) {
    for (std::size_t c = 0; c < cols.size(); ++c)
      for (std::size_t r = 0; r < rows.size(); ++r)
        block(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
            (*dense_)(rows[r], cols[c]);
  } else {
    for (std::size_t c = 0; c < cols.size(); ++c)
      for (std::size_t r = 0; r < rows.size(); ++r)
        block(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
            kernel_(data_->point(rows[r]), data_->point(cols[c]));
  }
  return block;
}

const Eigen::MatrixXd& EntryOracle::dense() const {
  if (!dense_) throw std::logic_error("oracle: kernel source has no dense matrix");
  return *dense_;
}

}  // namespace rpchol
