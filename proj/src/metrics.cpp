#include "subfit/metrics.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

namespace subfit {

namespace {

Eigen::MatrixXd residual_projector(const Eigen::MatrixXd& u) {
  const int d = static_cast<int>(u.rows());
  return Eigen::MatrixXd::Identity(d, d) - u * u.transpose();
}

double projected_trace(const Eigen::MatrixXd& u, const Eigen::MatrixXd& c) {
  const Eigen::MatrixXd r = residual_projector(u);
  return (r * c * r.transpose()).trace();
}

}  // namespace

std::string to_string(EOutSource source) {
  switch (source) {
    case EOutSource::analytic_trace: return "analytic-trace";
    case EOutSource::spectral_formula: return "spectral-formula";
    case EOutSource::monte_carlo: return "monte-carlo";
  }
  throw std::invalid_argument("unknown e_out source");
}

double unsup_in_sample(const Eigen::MatrixXd& u_embedded, const Eigen::MatrixXd& x) {
  if (u_embedded.rows() != x.rows())
    throw std::invalid_argument("estimate and data dimensions disagree");
  const Eigen::MatrixXd sample_cov =
      x * x.transpose() / static_cast<double>(x.cols());
  return projected_trace(u_embedded, sample_cov);
}

double unsup_in_sample_S(const Eigen::MatrixXd& u_restricted,
                         const Eigen::MatrixXd& x_s) {
  return unsup_in_sample(u_restricted, x_s);
}

double unsup_out_of_sample_trace(const Eigen::MatrixXd& u_embedded,
                                 const Eigen::MatrixXd& c_x) {
  if (u_embedded.rows() != c_x.rows())
    throw std::invalid_argument("estimate and covariance dimensions disagree");
  return projected_trace(u_embedded, c_x);
}

double unsup_out_of_sample_spectral(const Eigen::VectorXd& true_spectrum,
                                    const SpectralDecomposition& true_restricted,
                                    const SpectralDecomposition& sample_restricted,
                                    int k) {
  const int p = static_cast<int>(true_restricted.eigenvalues.size());
  if (sample_restricted.eigenvalues.size() != p)
    throw std::invalid_argument("restricted decompositions disagree on p");
  if (k < 0 || k > p) throw std::invalid_argument("need 0 <= k <= p");

  // Overlaps of the k leading sample eigenvectors with every true eigenvector,
  // weighted by the true restricted eigenvalues.
  const Eigen::MatrixXd overlaps = true_restricted.eigenvectors.transpose() *
                                   sample_restricted.eigenvectors.leftCols(k);
  double captured = 0.0;
  for (int j = 0; j < p; ++j)
    captured += true_restricted.eigenvalues(j) * overlaps.row(j).squaredNorm();
  return true_spectrum.sum() - captured;
}

double sup_in_sample(const Eigen::MatrixXd& u_embedded, const Eigen::MatrixXd& x,
                     const Eigen::MatrixXd& z) {
  if (u_embedded.rows() != x.rows() || u_embedded.cols() != z.rows() ||
      x.cols() != z.cols())
    throw std::invalid_argument("estimate, data and targets disagree on shape");
  return (z - u_embedded.transpose() * x).squaredNorm() /
         static_cast<double>(x.cols());
}

double sup_in_sample(const Eigen::MatrixXd& u_embedded, const Dataset& data) {
  if (!data.z.has_value())
    throw std::invalid_argument("dataset carries no latent targets");
  return sup_in_sample(u_embedded, data.x, *data.z);
}

double sup_out_of_sample_analytic(const Eigen::MatrixXd& u_embedded,
                                  const GroundTruthModel& model) {
  if (u_embedded.rows() != model.ambient_dim() ||
      u_embedded.cols() != model.latent_dim())
    throw std::invalid_argument("estimate does not match the model dimensions");
  const Eigen::MatrixXd cross = model.basis.transpose() * u_embedded;  // m x m
  const double sigma2 = model.noise_std * model.noise_std;
  return model.latent_dim() - 2.0 * cross.trace() + cross.squaredNorm() +
         sigma2 * u_embedded.squaredNorm();
}

double sup_out_of_sample_monte_carlo(const Eigen::MatrixXd& u_embedded,
                                     const GroundTruthModel& model, int n_test,
                                     std::uint64_t seed) {
  if (n_test < 1) throw std::invalid_argument("need n_test >= 1");
  std::mt19937_64 engine(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  const int d = model.ambient_dim();
  const int m = model.latent_dim();
  double total = 0.0;
  Eigen::VectorXd z(m), x(d);
  for (int t = 0; t < n_test; ++t) {
    for (int i = 0; i < m; ++i) z(i) = normal(engine);
    for (int i = 0; i < d; ++i) x(i) = model.noise_std * normal(engine);
    x += model.basis * z;
    total += (z - u_embedded.transpose() * x).squaredNorm();
  }
  return total / n_test;
}

double unsup_out_of_sample_monte_carlo(const Eigen::MatrixXd& u_embedded,
                                       const GroundTruthModel& model, int n_test,
                                       std::uint64_t seed) {
  if (n_test < 1) throw std::invalid_argument("need n_test >= 1");
  if (u_embedded.rows() != model.ambient_dim())
    throw std::invalid_argument("estimate does not match the model dimension");
  std::mt19937_64 engine(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  const int d = model.ambient_dim();
  const int m = model.latent_dim();
  double total = 0.0;
  Eigen::VectorXd z(m), x(d);
  for (int t = 0; t < n_test; ++t) {
    for (int i = 0; i < m; ++i) z(i) = normal(engine);
    for (int i = 0; i < d; ++i) x(i) = model.noise_std * normal(engine);
    x += model.basis * z;
    total += (x - u_embedded * (u_embedded.transpose() * x)).squaredNorm();
  }
  return total / n_test;
}

double monotonicity_metric(std::span<const double> errors) {
  if (errors.size() < 2)
    throw std::invalid_argument("monotonicity metric needs at least two values");
  int kept = 0;
  for (std::size_t j = 1; j < errors.size(); ++j)
    if (errors[j] - errors[j - 1] <= 1e-12) ++kept;
  return static_cast<double>(kept) / static_cast<double>(errors.size() - 1);
}

InterlacingResult interlacing_check(const Eigen::MatrixXd& c_large,
                                    const Eigen::MatrixXd& c_small) {
  const int big = static_cast<int>(c_large.rows());
  const int small = static_cast<int>(c_small.rows());
  if (c_large.cols() != big || c_small.cols() != small || big != small + 1)
    throw std::invalid_argument("need a square matrix and its one-smaller square submatrix");

  // The small matrix must arise by deleting one row/column pair.
  const double scale = std::max(1.0, c_large.cwiseAbs().maxCoeff());
  bool is_submatrix = false;
  for (int drop = 0; drop < big && !is_submatrix; ++drop) {
    double dev = 0.0;
    for (int i = 0, ii = 0; i < big; ++i) {
      if (i == drop) continue;
      for (int j = 0, jj = 0; j < big; ++j) {
        if (j == drop) continue;
        dev = std::max(dev, std::abs(c_large(i, j) - c_small(ii, jj)));
        ++jj;
      }
      ++ii;
    }
    if (dev <= 1e-9 * scale) is_submatrix = true;
  }
  if (!is_submatrix)
    throw std::invalid_argument("c_small is not a principal submatrix of c_large");

  const Eigen::VectorXd lam_large = eig_symmetric(c_large).eigenvalues;
  const Eigen::VectorXd lam_small = eig_symmetric(c_small).eigenvalues;
  InterlacingResult result;
  result.worst_margin = std::numeric_limits<double>::infinity();
  for (int j = 0; j < small; ++j) {
    result.worst_margin = std::min(result.worst_margin, lam_large(j) - lam_small(j));
    result.worst_margin = std::min(result.worst_margin, lam_small(j) - lam_large(j + 1));
  }
  result.holds = result.worst_margin >= -1e-8 * scale;
  return result;
}

Eigen::VectorXd alignment_coefficients(const SpectralDecomposition& true_decomp,
                                       const SpectralDecomposition& sample_decomp,
                                       int k) {
  const int p = static_cast<int>(true_decomp.eigenvalues.size());
  if (sample_decomp.eigenvalues.size() != p)
    throw std::invalid_argument("decompositions disagree on dimension");
  if (k < 0 || k > p) throw std::invalid_argument("need 0 <= k <= p");
  const Eigen::MatrixXd overlaps =
      true_decomp.eigenvectors.transpose() * sample_decomp.eigenvectors.leftCols(k);
  Eigen::VectorXd alpha(p);
  for (int j = 0; j < p; ++j) alpha(j) = overlaps.row(j).squaredNorm();
  return alpha;
}

}  // namespace subfit
