#pragma once

#include <Eigen/Dense>
#include <limits>

namespace subfit {

/// Relative threshold below which eigen/singular values count as zero.
inline constexpr double kRankTol = 1e-10;

/// Symmetric eigendecomposition with eigenvalues sorted descending and the
/// sign of each eigenvector fixed (largest-magnitude entry nonnegative).
struct SpectralDecomposition {
  Eigen::VectorXd eigenvalues;   // descending
  Eigen::MatrixXd eigenvectors;  // columns aligned with eigenvalues
  int rank = 0;                  // #{lambda_i > kRankTol * max(lambda_1, 1)}
};

/// Thin SVD W = left * diag(singular_values) * right^T with the same
/// deterministic sign convention applied to the left factor.
struct ThinSvd {
  Eigen::MatrixXd left;            // p x m, orthonormal columns
  Eigen::VectorXd singular_values; // m, descending, nonnegative
  Eigen::MatrixXd right;           // m x m, orthonormal
};

/// Softness of the orthonormality constraint |sigma_i^2 - 1| <= alpha.
/// alpha = 0 is the hard constraint, alpha = +inf no constraint. floor_mode
/// raises the lower threshold to sqrt(1e-16) at most, so singular values are
/// never clipped to zero (keeps PGD iterates full rank in the unsupervised
/// problem).
struct ConstraintLevel {
  double alpha = 0.0;
  bool floor_mode = false;

  double tau_low() const {
    const double base = floor_mode ? 1e-16 : 0.0;
    return std::sqrt(std::max(base, 1.0 - alpha));
  }
  double tau_high() const { return std::sqrt(1.0 + alpha); }
  bool unconstrained() const {
    return alpha == std::numeric_limits<double>::infinity();
  }
};

/// Eigendecomposition of a symmetric matrix (symmetry checked to 1e-9
/// relative, then enforced exactly before solving).
SpectralDecomposition eig_symmetric(const Eigen::MatrixXd& c);

/// Thin SVD of a tall matrix (rows >= cols).
ThinSvd thin_svd(const Eigen::MatrixXd& w);

/// Moore-Penrose pseudoinverse via SVD; singular values below
/// kRankTol * sigma_max are treated as zero.
Eigen::MatrixXd pseudoinverse(const Eigen::MatrixXd& x);

/// Frobenius-nearest matrix with orthonormal columns: all singular values of
/// the input are replaced by 1. For w = 0 the result is the deterministic
/// orthonormal factor produced by the SVD routine for a zero input.
Eigen::MatrixXd project_hard(const Eigen::MatrixXd& w);

/// Frobenius-nearest matrix satisfying |sigma_i^2 - 1| <= alpha: singular
/// values are clamped into [tau_low, tau_high]. Identity when alpha = +inf;
/// equals project_hard when alpha = 0 without the floor.
Eigen::MatrixXd project_soft(const Eigen::MatrixXd& w, const ConstraintLevel& level);

}  // namespace subfit
