#pragma once

#include <Eigen/Dense>
#include <vector>

#include "catemiss/crossfit.hpp"
#include "catemiss/dataset.hpp"
#include "catemiss/pseudo.hpp"

namespace catemiss {

// Trigonometric cosine sieve over min-max rescaled covariates. Bounds are
// frozen at construction; evaluation is pure.
struct SieveBasis {
  Eigen::VectorXd col_min;
  Eigen::VectorXd col_max;
  int degree = 1;
  int interaction_order = 1;
  std::vector<bool> degenerate;  // min == max columns contribute zero terms

  bool has_interactions() const;
  Eigen::Index num_features() const;
  // Rows of x map to [1, cos(pi u_j), ..., cos(d pi u_j), pairwise products].
  Eigen::MatrixXd evaluate(const Eigen::MatrixXd& x) const;
};

// degree defaults to min(10, ceil(n^(1/4))) per covariate; pairwise
// interactions of the degree-1 terms are added only when x has <= 4 columns.
int default_sieve_degree(Eigen::Index n);

SieveBasis build_sieve(const Eigen::MatrixXd& x, int degree, int interaction_order);

// Clever weights. missing_aware=false: H = A/pi + (1-A)/(1-pi).
// missing_aware=true: H = C A/(G pi) + C (1-A)/(G (1-pi)); zero when C=0.
Eigen::VectorXd ep_weights(const Dataset& data, const NuisanceEstimates& nuisances,
                           bool missing_aware);

struct TargetedOutcomes {
  Eigen::VectorXd mu0_star;
  Eigen::VectorXd mu1_star;
  Eigen::VectorXd epsilon;
  Eigen::VectorXd weights;
  bool missing_aware = false;
};

// One linear fluctuation: regress Y on the sieve with offset mu_A and weight
// H, then shift mu1 up and mu0 down by the fitted linear predictor on every
// row. The regression runs on complete cases unless completed outcomes are
// supplied, in which case it runs on all rows.
TargetedOutcomes itmle_update(const Dataset& data, const NuisanceEstimates& nuisances,
                              const SieveBasis& basis, const Eigen::VectorXd& weights,
                              const Eigen::VectorXd* completed_outcomes = nullptr);

// Y_ep = mu1* - mu0*, defined on every row.
PseudoOutcomes ep_pseudo(const TargetedOutcomes& targeted);

}  // namespace catemiss
