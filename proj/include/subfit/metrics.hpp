#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <limits>
#include <span>
#include <string>

#include "subfit/model.hpp"
#include "subfit/spectral.hpp"

namespace subfit {

enum class EOutSource { analytic_trace, spectral_formula, monte_carlo };

std::string to_string(EOutSource source);

/// The error functionals evaluated for one estimate. Fields that do not apply
/// are NaN; all applicable values are numerically nonnegative (>= -1e-9).
struct ErrorRecord {
  double e_in = std::numeric_limits<double>::quiet_NaN();
  double e_in_s = std::numeric_limits<double>::quiet_NaN();
  double e_out = std::numeric_limits<double>::quiet_NaN();
  EOutSource e_out_source = EOutSource::analytic_trace;
};

/// In-sample subspace approximation error of an embedded d x k estimate:
/// tr((I - U U^T) C_hat (I - U U^T)^T) with C_hat = (1/n) X X^T.
double unsup_in_sample(const Eigen::MatrixXd& u_embedded, const Eigen::MatrixXd& x);

/// Restricted in-sample error: same trace with the p-dimensional quantities.
double unsup_in_sample_S(const Eigen::MatrixXd& u_restricted, const Eigen::MatrixXd& x_s);

/// Out-of-sample subspace approximation error against the true covariance:
/// tr((I - U U^T) C_x (I - U U^T)^T).
double unsup_out_of_sample_trace(const Eigen::MatrixXd& u_embedded,
                                 const Eigen::MatrixXd& c_x);

/// Spectral form of the unsupervised out-of-sample error for a PCA estimate:
///   sum_i lambda^(i)
///     - sum_{i < k} sum_j lambda_S^(j) |<psi_S^(j), psi_hat_S^(i)>|^2
/// where true_spectrum holds the d eigenvalues of C_x, true_restricted the
/// decomposition of the restricted true covariance C_{x,S}, and
/// sample_restricted the decomposition of the restricted sample covariance
/// whose first k columns define the estimate.
double unsup_out_of_sample_spectral(const Eigen::VectorXd& true_spectrum,
                                    const SpectralDecomposition& true_restricted,
                                    const SpectralDecomposition& sample_restricted,
                                    int k);

/// Supervised in-sample error (1/n) ||Z - U^T X||_F^2.
double sup_in_sample(const Eigen::MatrixXd& u_embedded, const Eigen::MatrixXd& x,
                     const Eigen::MatrixXd& z);

/// Convenience overload over a dataset; requires the latent targets.
double sup_in_sample(const Eigen::MatrixXd& u_embedded, const Dataset& data);

/// E ||z - U^T x||^2 under the model, expanded in closed form:
/// m - 2 tr(U^T B) + tr(U^T C_x U).
double sup_out_of_sample_analytic(const Eigen::MatrixXd& u_embedded,
                                  const GroundTruthModel& model);

/// Monte Carlo counterpart over n_test fresh (uncentered) draws.
double sup_out_of_sample_monte_carlo(const Eigen::MatrixXd& u_embedded,
                                     const GroundTruthModel& model, int n_test,
                                     std::uint64_t seed);

/// Monte Carlo unsupervised out-of-sample error: mean ||(I - U U^T) x_test||^2
/// over n_test fresh draws.
double unsup_out_of_sample_monte_carlo(const Eigen::MatrixXd& u_embedded,
                                       const GroundTruthModel& model, int n_test,
                                       std::uint64_t seed);

/// Fraction of steps along an error curve that do not increase the error
/// (a decrease or a change within 1e-12 counts).
double monotonicity_metric(std::span<const double> errors);

struct InterlacingResult {
  bool holds = false;
  double worst_margin = 0.0;  // most negative slack across all inequalities
};

/// Checks the eigenvalue interlacing inequalities between a symmetric matrix
/// and one of its principal submatrices obtained by deleting a single
/// row/column pair (membership verified). Tolerance 1e-8.
InterlacingResult interlacing_check(const Eigen::MatrixXd& c_large,
                                    const Eigen::MatrixXd& c_small);

/// Alignment of each true eigenvector with the span of the k leading sample
/// eigenvectors: alpha_j = sum_{i<k} |<psi^(j), psi_hat^(i)>|^2.
Eigen::VectorXd alignment_coefficients(const SpectralDecomposition& true_decomp,
                                       const SpectralDecomposition& sample_decomp,
                                       int k);

}  // namespace subfit
