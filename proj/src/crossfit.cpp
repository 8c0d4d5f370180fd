#include "catemiss/crossfit.hpp"

#include <algorithm>
#include <string>

#include "catemiss/matrix_util.hpp"
#include "catemiss/rng.hpp"

namespace catemiss {

namespace {

LearnerSpec reseed(LearnerSpec spec, const char* role, int fold) {
  spec.seed = derive_seed(spec.seed, {hash_label(role), static_cast<std::uint64_t>(fold)});
  return spec;
}

void clip_inplace(Eigen::VectorXd& probs, double clip_floor) {
  if (clip_floor <= 0.0) return;
  probs = probs.unaryExpr([clip_floor](double p) {
    return std::min(1.0 - clip_floor, std::max(clip_floor, p));
  });
}

std::vector<Eigen::Index> complement_rows(const FoldAssignment& folds, int fold) {
  std::vector<Eigen::Index> rows;
  rows.reserve(folds.fold_of.size());
  for (std::size_t i = 0; i < folds.fold_of.size(); ++i) {
    if (folds.fold_of[i] != fold) rows.push_back(static_cast<Eigen::Index>(i));
  }
  return rows;
}

}  // namespace

void NuisanceEstimates::finalize_mu_a(const Eigen::VectorXi& treatment) {
  mu_a.resize(mu0.size());
  for (Eigen::Index i = 0; i < mu0.size(); ++i) {
    mu_a[i] = treatment[i] == 1 ? mu1[i] : mu0[i];
  }
}

NuisanceEstimates crossfit_nuisances(const Dataset& data, const FoldAssignment& folds,
                                     const NuisanceSpecs& specs, double clip_floor) {
  data.validate();
  const Eigen::Index n = data.n_rows();
  if (static_cast<Eigen::Index>(folds.fold_of.size()) != n) {
    throw std::invalid_argument("fold assignment does not match dataset size");
  }
  if (clip_floor < 0.0 || clip_floor >= 0.5) {
    throw std::invalid_argument("clip_floor must lie in [0, 0.5)");
  }

  NuisanceEstimates out;
  out.pi.resize(n);
  out.g.resize(n);
  out.mu0.resize(n);
  out.mu1.resize(n);
  out.fold_map = folds;
  out.clip_floor = clip_floor;

  const Eigen::VectorXd a = data.treatment.cast<double>();
  const Eigen::VectorXd c = data.observed.cast<double>();
  const Eigen::MatrixXd az = with_treatment_column(data.covariates, data.treatment);
  const auto fold_rows = folds.rows_by_fold();

  for (int fold = 0; fold < folds.num_folds; ++fold) {
    const std::vector<Eigen::Index> train = complement_rows(folds, fold);
    const auto& eval = fold_rows[static_cast<std::size_t>(fold)];
    if (eval.empty()) continue;

    // Propensity and missingness models use every training row.
    const Eigen::MatrixXd z_train = select_rows(data.covariates, train);
    const Eigen::MatrixXd z_eval = select_rows(data.covariates, eval);

    FittedModel pi_model = fit(reseed(specs.propensity, "pi", fold), TaskKind::kProbability,
                               z_train, select(a, train));
    Eigen::VectorXd pi_pred = pi_model.predict(z_eval);

    Eigen::VectorXd g_pred;
    if (specs.per_arm_missingness) {
      g_pred.resize(static_cast<Eigen::Index>(eval.size()));
      for (int arm = 0; arm <= 1; ++arm) {
        std::vector<Eigen::Index> arm_rows;
        for (Eigen::Index r : train) {
          if (data.treatment[r] == arm) arm_rows.push_back(r);
        }
        if (arm_rows.empty()) {
          throw std::runtime_error("fold " + std::to_string(fold) +
                                   " complement has no rows in arm " + std::to_string(arm));
        }
        const char* role = arm == 0 ? "g0" : "g1";
        FittedModel g_model = fit(reseed(specs.missingness, role, fold), TaskKind::kProbability,
                                  select_rows(data.covariates, arm_rows), select(c, arm_rows));
        Eigen::VectorXd arm_pred = g_model.predict(z_eval);
        for (std::size_t i = 0; i < eval.size(); ++i) {
          if (data.treatment[eval[i]] == arm) {
            g_pred[static_cast<Eigen::Index>(i)] = arm_pred[static_cast<Eigen::Index>(i)];
          }
        }
      }
    } else {
      FittedModel g_model = fit(reseed(specs.missingness, "g", fold), TaskKind::kProbability,
                                select_rows(az, train), select(c, train));
      g_pred = g_model.predict(select_rows(az, eval));
    }

    // Outcome models: complete cases within each arm only.
    for (int arm = 0; arm <= 1; ++arm) {
      std::vector<Eigen::Index> arm_rows;
      for (Eigen::Index r : train) {
        if (data.treatment[r] == arm && data.observed[r] == 1) arm_rows.push_back(r);
      }
      if (arm_rows.empty()) {
        throw std::runtime_error("fold " + std::to_string(fold) +
                                 " complement has no complete cases in arm " +
                                 std::to_string(arm));
      }
      Eigen::VectorXd y_arm(static_cast<Eigen::Index>(arm_rows.size()));
      for (std::size_t i = 0; i < arm_rows.size(); ++i) {
        y_arm[static_cast<Eigen::Index>(i)] = data.outcome_at(arm_rows[i]);
      }
      const char* role = arm == 0 ? "mu0" : "mu1";
      FittedModel mu_model = fit(reseed(specs.outcome, role, fold), TaskKind::kRegression,
                                 select_rows(data.covariates, arm_rows), y_arm);
      Eigen::VectorXd mu_pred = mu_model.predict(z_eval);
      Eigen::VectorXd& target = arm == 0 ? out.mu0 : out.mu1;
      for (std::size_t i = 0; i < eval.size(); ++i) {
        target[eval[i]] = mu_pred[static_cast<Eigen::Index>(i)];
      }
    }

    for (std::size_t i = 0; i < eval.size(); ++i) {
      out.pi[eval[i]] = pi_pred[static_cast<Eigen::Index>(i)];
      out.g[eval[i]] = g_pred[static_cast<Eigen::Index>(i)];
    }
  }

  clip_inplace(out.pi, clip_floor);
  clip_inplace(out.g, clip_floor);
  out.finalize_mu_a(data.treatment);
  return out;
}

Eigen::VectorXd fit_imputation_model(const Dataset& data, const FoldAssignment& folds,
                                     const LearnerSpec& spec) {
  data.validate();
  const Eigen::Index n = data.n_rows();
  if (static_cast<Eigen::Index>(folds.fold_of.size()) != n) {
    throw std::invalid_argument("fold assignment does not match dataset size");
  }
  Eigen::VectorXd completed(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    completed[i] = data.observed[i] == 1 ? data.outcome_at(i) : 0.0;
  }
  const Eigen::MatrixXd az = with_treatment_column(data.covariates, data.treatment);
  const auto fold_rows = folds.rows_by_fold();

  for (int fold = 0; fold < folds.num_folds; ++fold) {
    std::vector<Eigen::Index> censored_eval;
    for (Eigen::Index r : fold_rows[static_cast<std::size_t>(fold)]) {
      if (data.observed[r] == 0) censored_eval.push_back(r);
    }
    if (censored_eval.empty()) continue;

    std::vector<Eigen::Index> train;
    for (Eigen::Index r : complement_rows(folds, fold)) {
      if (data.observed[r] == 1) train.push_back(r);
    }
    if (train.empty()) {
      throw std::runtime_error("fold " + std::to_string(fold) +
                               " complement has no complete cases for imputation");
    }
    Eigen::VectorXd y_train(static_cast<Eigen::Index>(train.size()));
    for (std::size_t i = 0; i < train.size(); ++i) {
      y_train[static_cast<Eigen::Index>(i)] = data.outcome_at(train[i]);
    }
    FittedModel model = fit(reseed(spec, "impute", fold), TaskKind::kRegression,
                            select_rows(az, train), y_train);
    Eigen::VectorXd preds = model.predict(select_rows(az, censored_eval));
    for (std::size_t i = 0; i < censored_eval.size(); ++i) {
      completed[censored_eval[i]] = preds[static_cast<Eigen::Index>(i)];
    }
  }
  return completed;
}

}  // namespace catemiss
