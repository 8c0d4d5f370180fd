#include "catemiss/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "catemiss/rng.hpp"

namespace catemiss {

Eigen::MatrixXd Dataset::het_matrix() const {
  return het_matrix_of(covariates);
}

Eigen::MatrixXd Dataset::het_matrix_of(const Eigen::MatrixXd& z) const {
  Eigen::MatrixXd x(z.rows(), static_cast<Eigen::Index>(heterogeneity_index.size()));
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    x.col(j) = z.col(heterogeneity_index[static_cast<std::size_t>(j)]);
  }
  return x;
}

double Dataset::outcome_at(Eigen::Index row) const {
  const auto& y = outcome[static_cast<std::size_t>(row)];
  if (!y.has_value()) {
    throw SchemaError("outcome requested for censored row " + std::to_string(row));
  }
  return *y;
}

void Dataset::validate() const {
  const Eigen::Index n = n_rows();
  if (n == 0) throw SchemaError("dataset has no rows");
  if (treatment.size() != n || observed.size() != n ||
      static_cast<Eigen::Index>(outcome.size()) != n) {
    throw SchemaError("dataset column lengths disagree");
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    if (treatment[i] != 0 && treatment[i] != 1) {
      throw SchemaError("treatment must be 0/1 at row " + std::to_string(i));
    }
    if (observed[i] != 0 && observed[i] != 1) {
      throw SchemaError("missingness indicator must be 0/1 at row " + std::to_string(i));
    }
    const bool has_y = outcome[static_cast<std::size_t>(i)].has_value();
    if (observed[i] == 1 && !has_y) {
      throw SchemaError("outcome absent for non-missing row " + std::to_string(i));
    }
    if (observed[i] == 0 && has_y) {
      throw SchemaError("outcome recorded for censored row " + std::to_string(i));
    }
    if (has_y && !std::isfinite(*outcome[static_cast<std::size_t>(i)])) {
      throw SchemaError("non-finite outcome at row " + std::to_string(i));
    }
    if (!covariates.row(i).allFinite()) {
      throw SchemaError("non-finite covariate at row " + std::to_string(i));
    }
  }
  if (heterogeneity_index.empty()) {
    throw SchemaError("heterogeneity index must be nonempty");
  }
  for (Eigen::Index idx : heterogeneity_index) {
    if (idx < 0 || idx >= n_cols()) {
      throw SchemaError("heterogeneity index out of range: " + std::to_string(idx));
    }
  }
}

std::vector<std::vector<Eigen::Index>> FoldAssignment::rows_by_fold() const {
  std::vector<std::vector<Eigen::Index>> rows(static_cast<std::size_t>(num_folds));
  for (std::size_t i = 0; i < fold_of.size(); ++i) {
    rows[static_cast<std::size_t>(fold_of[i])].push_back(static_cast<Eigen::Index>(i));
  }
  return rows;
}

FoldAssignment assign_folds(Eigen::Index n, int num_folds, std::uint64_t seed) {
  if (num_folds < 2) throw std::invalid_argument("fold count must be at least 2");
  if (static_cast<Eigen::Index>(num_folds) > n) {
    throw std::invalid_argument("fold count exceeds number of rows");
  }
  std::vector<int> ids(static_cast<std::size_t>(n));
  for (std::size_t i = 0; i < ids.size(); ++i) {
    ids[i] = static_cast<int>(i % static_cast<std::size_t>(num_folds));
  }
  Rng rng(derive_seed(seed, {hash_label("folds"), static_cast<std::uint64_t>(n),
                             static_cast<std::uint64_t>(num_folds)}));
  rng.shuffle(ids);
  return FoldAssignment{std::move(ids), num_folds, seed};
}

}  // namespace catemiss
