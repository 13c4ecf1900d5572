#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <vector>

namespace subfit {

/// Generative model x = B z + eps with z ~ N(0, I_m), eps ~ N(0, noise_std^2 I_d).
/// The basis B has d rows and m orthonormal columns (checked on construction).
struct GroundTruthModel {
  Eigen::MatrixXd basis;
  double noise_std = 0.0;

  GroundTruthModel(Eigen::MatrixXd basis_in, double noise_std_in);

  int ambient_dim() const { return static_cast<int>(basis.rows()); }
  int latent_dim() const { return static_cast<int>(basis.cols()); }
};

/// n samples drawn from a GroundTruthModel. Columns of x are centered by their
/// sample mean (recorded in sample_mean); z columns are centered likewise.
/// The first n_sup columns are the supervised (x, z) pairs.
struct Dataset {
  Eigen::MatrixXd x;                  // d x n
  std::optional<Eigen::MatrixXd> z;   // m x n, present whenever n_sup > 0
  Eigen::VectorXd sample_mean;        // d
  int n_sup = 0;

  int ambient_dim() const { return static_cast<int>(x.rows()); }
  int num_samples() const { return static_cast<int>(x.cols()); }
};

/// An ordered subset of p coordinate indices (zero-based, strictly increasing)
/// out of an ambient dimension d.
class FeatureSet {
 public:
  FeatureSet(std::vector<int> indices, int ambient_dim);

  /// Feature set from the first p entries of a coordinate order, sorted ascending.
  static FeatureSet prefix(const std::vector<int>& order, int p, int ambient_dim);

  /// The full set {0, ..., d-1}.
  static FeatureSet all(int ambient_dim);

  int size() const { return static_cast<int>(indices_.size()); }
  int ambient_dim() const { return ambient_dim_; }
  const std::vector<int>& indices() const { return indices_; }

  /// Complement set, in increasing order.
  std::vector<int> complement() const;

 private:
  std::vector<int> indices_;
  int ambient_dim_;
};

/// First m columns of the order-d Sylvester Hadamard matrix, scaled by 1/sqrt(d).
/// Requires d a power of two and 1 <= m < d.
Eigen::MatrixXd make_hadamard_basis(int d, int m);

/// m left singular vectors of a seeded d x d standard normal matrix.
Eigen::MatrixXd make_random_basis(int d, int m, std::uint64_t seed);

/// B B^T + noise_std^2 I_d.
Eigen::MatrixXd true_covariance(const GroundTruthModel& model);

/// Draws n samples, centers x (and z) by their sample means, marks the first
/// n_sup columns as supervised. Requires n >= 2 (centering needs it).
Dataset sample_dataset(const GroundTruthModel& model, int n, int n_sup,
                       std::uint64_t seed);

/// Row selection: returns the p x n matrix of the rows of x indexed by s.
Eigen::MatrixXd restrict_rows(const Eigen::MatrixXd& x, const FeatureSet& s);

/// Feature-vector view of a dataset: X_S, the row selection of its samples.
Eigen::MatrixXd restrict_rows(const Dataset& data, const FeatureSet& s);

/// Principal submatrix: rows and columns of the square matrix c indexed by s.
Eigen::MatrixXd restrict_principal(const Eigen::MatrixXd& c, const FeatureSet& s);

/// num_orders independent uniform permutations of {0, ..., d-1}. The sorted
/// length-p prefix of each defines the feature set at parameterization p.
std::vector<std::vector<int>> grow_feature_orders(int d, int num_orders,
                                                  std::uint64_t seed);

}  // namespace subfit
