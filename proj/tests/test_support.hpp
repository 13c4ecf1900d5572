#pragma once

#include <Eigen/Dense>
#include <filesystem>
#include <functional>
#include <random>
#include <string>

#include "subfit/spectral.hpp"

namespace test_support {

inline Eigen::MatrixXd random_matrix(int rows, int cols, std::mt19937_64& engine,
                                     double scale = 1.0) {
  std::normal_distribution<double> normal(0.0, scale);
  Eigen::MatrixXd m(rows, cols);
  for (int j = 0; j < cols; ++j)
    for (int i = 0; i < rows; ++i) m(i, j) = normal(engine);
  return m;
}

inline Eigen::MatrixXd random_orthonormal(int rows, int cols,
                                          std::mt19937_64& engine) {
  return subfit::project_hard(random_matrix(rows, cols, engine));
}

/// Central finite differences of a matrix-input scalar function.
inline Eigen::MatrixXd finite_difference_gradient(
    const std::function<double(const Eigen::MatrixXd&)>& f,
    const Eigen::MatrixXd& w, double h = 1e-6) {
  Eigen::MatrixXd grad(w.rows(), w.cols());
  Eigen::MatrixXd probe = w;
  for (int j = 0; j < w.cols(); ++j) {
    for (int i = 0; i < w.rows(); ++i) {
      probe(i, j) = w(i, j) + h;
      const double up = f(probe);
      probe(i, j) = w(i, j) - h;
      const double down = f(probe);
      probe(i, j) = w(i, j);
      grad(i, j) = (up - down) / (2.0 * h);
    }
  }
  return grad;
}

inline std::string temp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / name).string();
}

}  // namespace test_support
