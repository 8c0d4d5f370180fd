#pragma once

#include <Eigen/Dense>
#include <vector>

namespace catemiss {

inline Eigen::MatrixXd select_rows(const Eigen::MatrixXd& x,
                                   const std::vector<Eigen::Index>& rows) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()), x.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    out.row(static_cast<Eigen::Index>(i)) = x.row(rows[i]);
  }
  return out;
}

inline Eigen::VectorXd select(const Eigen::VectorXd& v, const std::vector<Eigen::Index>& rows) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    out[static_cast<Eigen::Index>(i)] = v[rows[i]];
  }
  return out;
}

// [A | Z]: treatment prepended as the first feature column.
inline Eigen::MatrixXd with_treatment_column(const Eigen::MatrixXd& z,
                                             const Eigen::VectorXi& treatment) {
  Eigen::MatrixXd out(z.rows(), z.cols() + 1);
  out.col(0) = treatment.cast<double>();
  out.rightCols(z.cols()) = z;
  return out;
}

}  // namespace catemiss
