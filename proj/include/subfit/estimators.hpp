#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <span>
#include <stdexcept>
#include <vector>

#include "subfit/model.hpp"
#include "subfit/spectral.hpp"

namespace subfit {

/// Thrown when a gradient-descent objective becomes non-finite and halving the
/// step does not recover it.
class divergence_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A restricted estimator matrix (p x k) tied to the feature set it was
/// learned on. Embeds into ambient dimension by zero-filling the rows of the
/// complement coordinates.
struct SubspaceEstimate {
  Eigen::MatrixXd matrix;  // p x k
  FeatureSet features;

  int feature_dim() const { return static_cast<int>(matrix.rows()); }
  int target_dim() const { return static_cast<int>(matrix.cols()); }
  int ambient_dim() const { return features.ambient_dim(); }
};

/// Projected-gradient-descent settings. initial_step <= 0 selects the default
/// mu_0 = 1 / (2 * sigma_max(X_S)^2). The factor list must contain 1.0.
struct PgdOptions {
  int max_iters = 2000;
  double rel_tol = 1e-8;
  double initial_step = 0.0;
  std::vector<double> line_search_factors = {0.5, 1.0, 2.0};
  std::uint64_t seed = 0;
};

struct FitReport {
  SubspaceEstimate estimate;
  int iterations = 0;
  double final_objective = 0.0;
  std::vector<double> objective_trace;
};

/// Top-k eigenvectors of the sample covariance (1/n) X X^T, by descending
/// eigenvalue. When k exceeds the sample rank, the remaining columns are the
/// null-space eigenvectors in the decomposition's deterministic order.
SubspaceEstimate fit_unsupervised_pca(const Eigen::MatrixXd& x_s, int k,
                                      const FeatureSet& features);

/// Minimum-Frobenius-norm minimizer of (1/n) ||Z - W^T X_S||_F^2, i.e.
/// (Z X_S^+)^T.
SubspaceEstimate fit_regression(const Eigen::MatrixXd& x_s,
                                const Eigen::MatrixXd& z,
                                const FeatureSet& features);

/// PGD on (1/n) ||Z - W^T X_S||_F^2 subject to |sigma_i^2(W) - 1| <= alpha,
/// initialized at the projected regression solution.
FitReport fit_supervised_pgd(const Eigen::MatrixXd& x_s, const Eigen::MatrixXd& z,
                             const ConstraintLevel& level, const PgdOptions& opts,
                             const FeatureSet& features);

/// PGD on ||Z_sup - W^T X_sup||_F^2 + ||(I - W W^T) X_unsup||_F^2 under the
/// same constraint, initialized at a projected random N(0, 1/p) matrix drawn
/// from opts.seed.
FitReport fit_semisupervised_pgd(const Eigen::MatrixXd& x_sup,
                                 const Eigen::MatrixXd& z_sup,
                                 const Eigen::MatrixXd& x_unsup,
                                 const ConstraintLevel& level,
                                 const PgdOptions& opts,
                                 const FeatureSet& features);

/// PGD on ||(I - W W^T) X_S||_F^2 for a rank-m estimate; the constraint level
/// is used with the floored lower threshold regardless of level.floor_mode.
FitReport fit_unsupervised_pgd(const Eigen::MatrixXd& x_s, int m,
                               const ConstraintLevel& level, const PgdOptions& opts,
                               const FeatureSet& features);

/// Objectives as minimized by the PGD fitters and the step directions they
/// descend along. Directions are proportional to the cost gradients: the
/// semi-/unsupervised ones equal half the gradient of the matching objective,
/// the supervised one additionally drops the 1/n. The constants are absorbed
/// into the line-searched step size.
double supervised_objective(const Eigen::MatrixXd& x_s, const Eigen::MatrixXd& z,
                            const Eigen::MatrixXd& w);
Eigen::MatrixXd supervised_descent(const Eigen::MatrixXd& x_s,
                                   const Eigen::MatrixXd& z,
                                   const Eigen::MatrixXd& w);
double semisup_objective(const Eigen::MatrixXd& x_sup, const Eigen::MatrixXd& z_sup,
                         const Eigen::MatrixXd& x_unsup, const Eigen::MatrixXd& w);
Eigen::MatrixXd semisup_descent(const Eigen::MatrixXd& x_sup,
                                const Eigen::MatrixXd& z_sup,
                                const Eigen::MatrixXd& x_unsup,
                                const Eigen::MatrixXd& w);
double unsup_objective(const Eigen::MatrixXd& x_s, const Eigen::MatrixXd& w);
Eigen::MatrixXd unsup_descent(const Eigen::MatrixXd& x_s, const Eigen::MatrixXd& w);

/// One line-search pass: evaluates the post-projection objective at
/// current_mu * f for each factor and returns the step with the smallest
/// value, ties broken toward the largest factor. Non-finite objective values
/// are never selected unless every candidate is non-finite.
double line_search_step(double current_mu,
                        const std::function<double(double)>& objective_at_step,
                        std::span<const double> factors);

/// d x k matrix whose rows indexed by the feature set hold the restricted
/// estimate and whose remaining rows are zero.
Eigen::MatrixXd embed(const SubspaceEstimate& estimate);

}  // namespace subfit
