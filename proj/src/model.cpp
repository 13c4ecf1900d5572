#include "subfit/model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>

#include "subfit/rng.hpp"
#include "subfit/spectral.hpp"

namespace subfit {

namespace {

bool is_power_of_two(int v) { return v > 0 && (v & (v - 1)) == 0; }

void check_orthonormal_columns(const Eigen::MatrixXd& b, double tol) {
  const Eigen::MatrixXd gram = b.transpose() * b;
  const Eigen::MatrixXd dev =
      gram - Eigen::MatrixXd::Identity(b.cols(), b.cols());
  if (dev.cwiseAbs().maxCoeff() > tol)
    throw std::invalid_argument("basis columns are not orthonormal");
}

}  // namespace

GroundTruthModel::GroundTruthModel(Eigen::MatrixXd basis_in, double noise_std_in)
    : basis(std::move(basis_in)), noise_std(noise_std_in) {
  const int d = static_cast<int>(basis.rows());
  const int m = static_cast<int>(basis.cols());
  if (m < 1 || m >= d)
    throw std::invalid_argument("latent dimension must satisfy 0 < m < d");
  if (noise_std < 0.0) throw std::invalid_argument("noise_std must be >= 0");
  check_orthonormal_columns(basis, 1e-10);
}

FeatureSet::FeatureSet(std::vector<int> indices, int ambient_dim)
    : indices_(std::move(indices)), ambient_dim_(ambient_dim) {
  if (indices_.empty()) throw std::invalid_argument("feature set must be nonempty");
  for (std::size_t i = 0; i < indices_.size(); ++i) {
    if (indices_[i] < 0 || indices_[i] >= ambient_dim_)
      throw std::invalid_argument("feature index out of bounds");
    if (i > 0 && indices_[i] <= indices_[i - 1])
      throw std::invalid_argument("feature indices must be strictly increasing");
  }
}

FeatureSet FeatureSet::prefix(const std::vector<int>& order, int p, int ambient_dim) {
  if (p < 1 || p > static_cast<int>(order.size()))
    throw std::invalid_argument("prefix length out of range");
  std::vector<int> idx(order.begin(), order.begin() + p);
  std::sort(idx.begin(), idx.end());
  return FeatureSet(std::move(idx), ambient_dim);
}

FeatureSet FeatureSet::all(int ambient_dim) {
  std::vector<int> idx(ambient_dim);
  std::iota(idx.begin(), idx.end(), 0);
  return FeatureSet(std::move(idx), ambient_dim);
}

std::vector<int> FeatureSet::complement() const {
  std::vector<int> out;
  out.reserve(ambient_dim_ - size());
  std::size_t j = 0;
  for (int i = 0; i < ambient_dim_; ++i) {
    if (j < indices_.size() && indices_[j] == i) {
      ++j;
    } else {
      out.push_back(i);
    }
  }
  return out;
}

Eigen::MatrixXd make_hadamard_basis(int d, int m) {
  if (!is_power_of_two(d))
    throw std::invalid_argument("Hadamard construction needs d a power of two");
  if (m < 1 || m >= d)
    throw std::invalid_argument("need 1 <= m < d");
  // Sylvester doubling: H_{2n} = [H_n H_n; H_n -H_n].
  Eigen::MatrixXd h(1, 1);
  h(0, 0) = 1.0;
  while (h.rows() < d) {
    const int n = static_cast<int>(h.rows());
    Eigen::MatrixXd next(2 * n, 2 * n);
    next.topLeftCorner(n, n) = h;
    next.topRightCorner(n, n) = h;
    next.bottomLeftCorner(n, n) = h;
    next.bottomRightCorner(n, n) = -h;
    h = std::move(next);
  }
  return h.leftCols(m) / std::sqrt(static_cast<double>(d));
}

Eigen::MatrixXd make_random_basis(int d, int m, std::uint64_t seed) {
  if (m < 1 || m >= d) throw std::invalid_argument("need 1 <= m < d");
  std::mt19937_64 engine(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::MatrixXd g(d, d);
  for (int j = 0; j < d; ++j)
    for (int i = 0; i < d; ++i) g(i, j) = normal(engine);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(g, Eigen::ComputeThinU);
  return svd.matrixU().leftCols(m);
}

Eigen::MatrixXd true_covariance(const GroundTruthModel& model) {
  const int d = model.ambient_dim();
  return model.basis * model.basis.transpose() +
         model.noise_std * model.noise_std * Eigen::MatrixXd::Identity(d, d);
}

Dataset sample_dataset(const GroundTruthModel& model, int n, int n_sup,
                       std::uint64_t seed) {
  if (n < 2) throw std::invalid_argument("need n >= 2 to center samples");
  if (n_sup < 0 || n_sup > n) throw std::invalid_argument("need 0 <= n_sup <= n");
  const int d = model.ambient_dim();
  const int m = model.latent_dim();

  std::mt19937_64 engine(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::MatrixXd z(m, n);
  Eigen::MatrixXd x(d, n);
  for (int l = 0; l < n; ++l) {
    for (int i = 0; i < m; ++i) z(i, l) = normal(engine);
    Eigen::VectorXd eps(d);
    for (int i = 0; i < d; ++i) eps(i) = model.noise_std * normal(engine);
    x.col(l) = model.basis * z.col(l) + eps;
  }

  Dataset data;
  data.sample_mean = x.rowwise().mean();
  data.x = x.colwise() - data.sample_mean;
  // z is centered by its own sample mean as well; the supervised problems
  // interpolate for p >= n - 1 only when both sides of the pairs are centered.
  const Eigen::VectorXd z_mean = z.rowwise().mean();
  data.z = z.colwise() - z_mean;
  data.n_sup = n_sup;
  return data;
}

Eigen::MatrixXd restrict_rows(const Eigen::MatrixXd& x, const FeatureSet& s) {
  if (s.ambient_dim() != x.rows())
    throw std::invalid_argument("feature set does not match matrix rows");
  Eigen::MatrixXd out(s.size(), x.cols());
  for (int i = 0; i < s.size(); ++i) out.row(i) = x.row(s.indices()[i]);
  return out;
}

Eigen::MatrixXd restrict_rows(const Dataset& data, const FeatureSet& s) {
  return restrict_rows(data.x, s);
}

Eigen::MatrixXd restrict_principal(const Eigen::MatrixXd& c, const FeatureSet& s) {
  if (c.rows() != c.cols())
    throw std::invalid_argument("principal submatrix needs a square matrix");
  if (s.ambient_dim() != c.rows())
    throw std::invalid_argument("feature set does not match matrix dimension");
  Eigen::MatrixXd out(s.size(), s.size());
  for (int i = 0; i < s.size(); ++i)
    for (int j = 0; j < s.size(); ++j)
      out(i, j) = c(s.indices()[i], s.indices()[j]);
  return out;
}

std::vector<std::vector<int>> grow_feature_orders(int d, int num_orders,
                                                  std::uint64_t seed) {
  if (num_orders < 1) throw std::invalid_argument("need num_orders >= 1");
  std::vector<std::vector<int>> orders;
  orders.reserve(num_orders);
  for (int t = 0; t < num_orders; ++t) {
    std::mt19937_64 engine(mix_seed(seed, static_cast<std::uint64_t>(t)));
    std::vector<int> order(d);
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), engine);
    orders.push_back(std::move(order));
  }
  return orders;
}

}  // namespace subfit
