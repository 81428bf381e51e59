#pragma once

#include <Eigen/Dense>

namespace rpchol {

struct NystromFactor;

/// Full symmetric eigendecomposition with eigenvalues sorted descending.
struct SpectralDecomposition {
  Eigen::VectorXd eigenvalues;   // descending
  Eigen::MatrixXd eigenvectors;  // column i pairs with eigenvalues[i]
};

/// Dense symmetric eigendecomposition (input symmetry checked to 1e-12
/// relative; intended for N <= 5000).
SpectralDecomposition sym_eig(const Eigen::MatrixXd& matrix);

/// Trace-norm error of the best rank-r psd approximation: sum of the
/// eigenvalues beyond the leading r.
double best_rank_r_error(const Eigen::MatrixXd& matrix, Eigen::Index r);

/// tr(A - F F^T) / tr A, computed as (tr A - ||F||_F^2) / tr A and clamped
/// below at zero.
double relative_trace_error(const Eigen::MatrixXd& matrix, const NystromFactor& factor);

/// One-step expected residual of diagonally weighted pivoting:
///   A - A^2 / tr A.
Eigen::MatrixXd expected_residual_map(const Eigen::MatrixXd& matrix);

/// Solves M x = b for symmetric positive definite M via Cholesky.
/// Throws std::runtime_error when the factorization meets a non-positive
/// pivot (indefinite input).
Eigen::VectorXd solve_spd(const Eigen::MatrixXd& matrix, const Eigen::VectorXd& rhs);
Eigen::MatrixXd solve_spd(const Eigen::MatrixXd& matrix, const Eigen::MatrixXd& rhs);

/// Moore-Penrose pseudoinverse of a symmetric psd matrix, dropping
/// eigenvalues below max(rows, full_dim) * eps * lambda_max.
Eigen::MatrixXd psd_pseudoinverse(const Eigen::MatrixXd& matrix, Eigen::Index full_dim);

}  // namespace rpchol
