#include "rpchol/linalg.hpp"

#include <limits>
#include <stdexcept>

#include "rpchol/factor.hpp"

namespace rpchol {

namespace {

void require_symmetric(const Eigen::MatrixXd& matrix, const char* who) {
  if (matrix.rows() != matrix.cols()) throw std::invalid_argument(std::string(who) + ": matrix must be square");
  const double scale = std::max(matrix.cwiseAbs().maxCoeff(), 1e-300);
  if ((matrix - matrix.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale)
    throw std::invalid_argument(std::string(who) + ": matrix is not symmetric");
}

}  // namespace

SpectralDecomposition sym_eig(const Eigen::MatrixXd& matrix) {
  require_symmetric(matrix, "sym_eig");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(matrix);
  if (solver.info() != Eigen::Success) throw std::runtime_error("sym_eig: eigensolver failed");
  // Eigen returns ascending order.
  SpectralDecomposition out;
  out.eigenvalues = solver.eigenvalues().reverse();
  out.eigenvectors = solver.eigenvectors().rowwise().reverse();
  return out;
}

double best_rank_r_error(const Eigen::MatrixXd& matrix, Eigen::Index r) {
  if (r < 0 || r > matrix.rows()) throw std::invalid_argument("best_rank_r_error: rank out of range");
  if (r == 0) return matrix.trace();
  const Eigen::VectorXd values = sym_eig(matrix).eigenvalues;
  return values.tail(values.size() - r).sum();
}

double relative_trace_error(const Eigen::MatrixXd& matrix, const NystromFactor& factor) {
  const double trace = matrix.trace();
  if (!(trace > 0.0)) throw std::invalid_argument("relative_trace_error: nonpositive trace");
  return std::max(0.0, (trace - factor.captured_trace()) / trace);
}

Eigen::MatrixXd expected_residual_map(const Eigen::MatrixXd& matrix) {
  require_symmetric(matrix, "expected_residual_map");
  const double trace = matrix.trace();
  if (!(trace > 0.0)) throw std::invalid_argument("expected_residual_map: nonpositive trace");
  return matrix - matrix * matrix / trace;
}

Eigen::MatrixXd solve_spd(const Eigen::MatrixXd& matrix, const Eigen::MatrixXd& rhs) {
  require_symmetric(matrix, "solve_spd");
  if (matrix.rows() != rhs.rows()) throw std::invalid_argument("solve_spd: shape mismatch");
  Eigen::LLT<Eigen::MatrixXd> llt(matrix);
  if (llt.info() != Eigen::Success) throw std::runtime_error("solve_spd: indefinite input");
  return llt.solve(rhs);
}

Eigen::VectorXd solve_spd(const Eigen::MatrixXd& matrix, const Eigen::VectorXd& rhs) {
  return Eigen::VectorXd(solve_spd(matrix, Eigen::MatrixXd(rhs)));
}

Eigen::MatrixXd psd_pseudoinverse(const Eigen::MatrixXd& matrix, Eigen::Index full_dim) {
  const SpectralDecomposition eig = sym_eig(matrix);
  const double lambda_max = eig.eigenvalues.size() ? std::abs(eig.eigenvalues[0]) : 0.0;
  const double cutoff = static_cast<double>(std::max(matrix.rows(), full_dim)) *
                        std::numeric_limits<double>::epsilon() * lambda_max;
  Eigen::VectorXd inverted = Eigen::VectorXd::Zero(eig.eigenvalues.size());
  for (Eigen::Index i = 0; i < eig.eigenvalues.size(); ++i)
    if (eig.eigenvalues[i] > cutoff) inverted[i] = 1.0 / eig.eigenvalues[i];
  return eig.eigenvectors * inverted.asDiagonal() * eig.eigenvectors.transpose();
}

}  // namespace rpchol
