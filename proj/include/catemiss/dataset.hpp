#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace catemiss {

// Raised when input data breaks the observational structure (schema/domain
// violations). The CLI maps this family to exit code 2.
class SchemaError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Observational data: covariates Z, binary treatment A, missingness indicator
// C (C=1 means the outcome was recorded) and the outcome Y, present iff C=1.
// Immutable by convention after construction; share freely across threads.
struct Dataset {
  Eigen::MatrixXd covariates;                   // n x p
  Eigen::VectorXi treatment;                    // values in {0,1}
  Eigen::VectorXi observed;                     // values in {0,1}
  std::vector<std::optional<double>> outcome;   // engaged iff observed == 1
  std::vector<Eigen::Index> heterogeneity_index;  // columns defining X subset of Z

  Eigen::Index n_rows() const { return covariates.rows(); }
  Eigen::Index n_cols() const { return covariates.cols(); }

  // Covariate columns selected by heterogeneity_index, in index order.
  Eigen::MatrixXd het_matrix() const;
  Eigen::MatrixXd het_matrix_of(const Eigen::MatrixXd& z) const;

  double outcome_at(Eigen::Index row) const;

  // Throws SchemaError if any type invariant is violated.
  void validate() const;
};

// Balanced random partition of rows into folds; regenerating with the same
// (n, num_folds, seed) yields the identical assignment.
struct FoldAssignment {
  std::vector<int> fold_of;
  int num_folds = 0;
  std::uint64_t seed = 0;

  std::vector<std::vector<Eigen::Index>> rows_by_fold() const;
};

FoldAssignment assign_folds(Eigen::Index n, int num_folds, std::uint64_t seed);

// Simulation ground truth carried by generated test sets.
struct TrueEffects {
  Eigen::VectorXd theta;
  Eigen::VectorXd mu0;
  Eigen::VectorXd mu1;
};

}  // namespace catemiss
