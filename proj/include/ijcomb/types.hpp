#pragma once

#include <Eigen/Dense>
#include <span>

namespace ijcomb {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
/// Covariates are stored one observation per contiguous row.
using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

inline std::span<const double> row_span(const RowMatrix& m, Eigen::Index i) {
  return {m.data() + i * m.cols(), static_cast<std::size_t>(m.cols())};
}

}  // namespace ijcomb
