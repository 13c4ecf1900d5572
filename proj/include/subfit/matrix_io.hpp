#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <string>

namespace subfit {

class io_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Writes a matrix as plain text: first line "rows cols", then one
/// whitespace-separated row per line at full double precision (%.17g).
void save_matrix(const std::string& path, const Eigen::MatrixXd& m);

/// Reads a matrix written by save_matrix.
Eigen::MatrixXd load_matrix(const std::string& path);

/// %.17g formatting used everywhere doubles are persisted ("inf" for infinity).
std::string format_double(double value);

}  // namespace subfit
