#pragma once

#include <Eigen/Dense>

#include "catemiss/dataset.hpp"
#include "catemiss/learners.hpp"

namespace catemiss {

struct NuisanceSpecs {
  LearnerSpec propensity = forest_spec();
  LearnerSpec missingness = forest_spec();
  LearnerSpec outcome = forest_spec();
  // Default is one pooled missingness model with A as a feature, matching
  // G(A,Z) = P[C=1|A,Z]; per-arm models are available behind this switch.
  bool per_arm_missingness = false;
};

// Out-of-fold nuisance predictions: the value for row i always comes from
// models trained without row i's fold.
struct NuisanceEstimates {
  Eigen::VectorXd pi;    // P[A=1|Z]
  Eigen::VectorXd g;     // P[C=1|A,Z]
  Eigen::VectorXd mu0;   // E[Y|A=0,C=1,Z]
  Eigen::VectorXd mu1;   // E[Y|A=1,C=1,Z]
  Eigen::VectorXd mu_a;  // A*mu1 + (1-A)*mu0
  FoldAssignment fold_map;
  double clip_floor = 0.01;

  void finalize_mu_a(const Eigen::VectorXi& treatment);
};

NuisanceEstimates crossfit_nuisances(const Dataset& data, const FoldAssignment& folds,
                                     const NuisanceSpecs& specs, double clip_floor);

// Completed outcome vector: observed rows keep Y, censored rows receive the
// out-of-fold prediction of E[Y|C=1,A,Z].
Eigen::VectorXd fit_imputation_model(const Dataset& data, const FoldAssignment& folds,
                                     const LearnerSpec& spec);

}  // namespace catemiss
