#include "subfit/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace subfit {

namespace {

// Makes the largest-magnitude entry of each column nonnegative. For an SVD
// pair the matching right column flips too, so the product is unchanged.
void fix_column_signs(Eigen::MatrixXd& left, Eigen::MatrixXd* right) {
  for (int j = 0; j < left.cols(); ++j) {
    int idx = 0;
    left.col(j).cwiseAbs().maxCoeff(&idx);
    if (left(idx, j) < 0.0) {
      left.col(j) = -left.col(j);
      if (right) right->col(j) = -right->col(j);
    }
  }
}

}  // namespace

SpectralDecomposition eig_symmetric(const Eigen::MatrixXd& c) {
  if (c.rows() != c.cols())
    throw std::invalid_argument("eig_symmetric needs a square matrix");
  const double scale = std::max(1.0, c.cwiseAbs().maxCoeff());
  if ((c - c.transpose()).cwiseAbs().maxCoeff() > 1e-9 * scale)
    throw std::invalid_argument("eig_symmetric needs a symmetric matrix");

  const Eigen::MatrixXd sym = 0.5 * (c + c.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(sym);
  if (solver.info() != Eigen::Success)
    throw std::runtime_error("symmetric eigensolver failed");

  const int p = static_cast<int>(c.rows());
  SpectralDecomposition out;
  out.eigenvalues = solver.eigenvalues().reverse();
  out.eigenvectors = solver.eigenvectors().rowwise().reverse();
  fix_column_signs(out.eigenvectors, nullptr);

  const double rank_cut = kRankTol * std::max(out.eigenvalues(0), 1.0);
  out.rank = 0;
  for (int i = 0; i < p; ++i)
    if (out.eigenvalues(i) > rank_cut) ++out.rank;
  return out;
}

ThinSvd thin_svd(const Eigen::MatrixXd& w) {
  if (w.rows() < w.cols())
    throw std::invalid_argument("thin_svd needs rows >= cols");
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(w, Eigen::ComputeThinU | Eigen::ComputeThinV);
  ThinSvd out;
  out.left = svd.matrixU();
  out.singular_values = svd.singularValues();
  out.right = svd.matrixV();
  fix_column_signs(out.left, &out.right);
  return out;
}

Eigen::MatrixXd pseudoinverse(const Eigen::MatrixXd& x) {
  if (x.size() == 0) return Eigen::MatrixXd(x.cols(), x.rows());
  // Orient tall, invert, transpose back: pinv(X^T) = pinv(X)^T.
  if (x.rows() < x.cols()) return pseudoinverse(x.transpose()).transpose();
  const ThinSvd svd = thin_svd(x);
  const double cut = kRankTol * svd.singular_values(0);
  Eigen::VectorXd inv = Eigen::VectorXd::Zero(svd.singular_values.size());
  for (int i = 0; i < inv.size(); ++i)
    if (svd.singular_values(i) > cut) inv(i) = 1.0 / svd.singular_values(i);
  return svd.right * inv.asDiagonal() * svd.left.transpose();
}

Eigen::MatrixXd project_hard(const Eigen::MatrixXd& w) {
  const ThinSvd svd = thin_svd(w);
  return svd.left * svd.right.transpose();
}

Eigen::MatrixXd project_soft(const Eigen::MatrixXd& w, const ConstraintLevel& level) {
  if (level.alpha < 0.0) throw std::invalid_argument("alpha must be >= 0");
  if (level.unconstrained()) return w;
  const double lo = level.tau_low();
  const double hi = level.tau_high();
  ThinSvd svd = thin_svd(w);
  for (int i = 0; i < svd.singular_values.size(); ++i)
    svd.singular_values(i) = std::clamp(svd.singular_values(i), lo, hi);
  return svd.left * svd.singular_values.asDiagonal() * svd.right.transpose();
}

}  // namespace subfit
