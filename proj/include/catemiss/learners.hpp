#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "catemiss/dataset.hpp"

namespace catemiss {

enum class LearnerKind {
  kMean,
  kLinear,
  kRidgeLogistic,
  kKnn,
  kRandomForest,
  kBoostedStumps,
  kStackedEnsemble,
};

enum class TaskKind { kRegression, kProbability };

enum class StackLoss { kSquared, kLog };

// Probability outputs are clamped strictly inside (0,1).
inline constexpr double kProbabilityFloor = 1e-6;

struct LearnerSpec {
  LearnerKind kind = LearnerKind::kRandomForest;
  std::uint64_t seed = 0;

  // linear
  double ridge_penalty = 0.0;
  // ridge-logistic
  double logistic_penalty = 1e-4;
  // knn
  int neighbors = 5;
  // random forest
  int trees = 500;
  int min_node_size = 10;
  double feature_fraction = 0.0;  // 0 => sqrt(p)
  // boosted stumps
  int boost_rounds = 200;
  double learning_rate = 0.1;
  // stacked ensemble
  std::vector<LearnerSpec> candidates;
  std::optional<StackLoss> stack_loss;  // defaults: log for probability, squared otherwise
  int stack_folds = 5;

  void validate(TaskKind task) const;
};

LearnerSpec mean_spec();
LearnerSpec linear_spec();
LearnerSpec logistic_spec(double penalty = 1e-4);
LearnerSpec knn_spec(int neighbors);
LearnerSpec forest_spec(int trees = 500, int min_node_size = 10, std::uint64_t seed = 0);
LearnerSpec stumps_spec(int rounds = 200, double learning_rate = 0.1);
LearnerSpec stacked_spec(std::vector<LearnerSpec> candidates, std::uint64_t seed = 0);

std::string learner_kind_name(LearnerKind kind);
LearnerKind learner_kind_from_name(const std::string& name);

class FittedModel {
 public:
  class Impl {
   public:
    virtual ~Impl() = default;
    virtual Eigen::VectorXd predict(const Eigen::MatrixXd& features) const = 0;
  };

  FittedModel() = default;
  FittedModel(std::shared_ptr<const Impl> impl, Eigen::Index input_dim, TaskKind task);

  // Predicts rowwise; probability-task outputs land in
  // [kProbabilityFloor, 1 - kProbabilityFloor].
  Eigen::VectorXd predict(const Eigen::MatrixXd& features) const;

  Eigen::Index input_dim() const { return input_dim_; }
  TaskKind task() const { return task_; }
  bool valid() const { return impl_ != nullptr; }

 private:
  std::shared_ptr<const Impl> impl_;
  Eigen::Index input_dim_ = 0;
  TaskKind task_ = TaskKind::kRegression;
};

// Fits one learner. Deterministic given (spec.seed, data); `weights`, when
// given, must be nonnegative and the same length as `targets`.
FittedModel fit(const LearnerSpec& spec, TaskKind task, const Eigen::MatrixXd& features,
                const Eigen::VectorXd& targets, const Eigen::VectorXd* weights = nullptr);

struct StackedFit {
  FittedModel model;
  Eigen::VectorXd weights;           // simplex weights over surviving candidates
  std::vector<int> candidate_index;  // surviving candidates, original positions
  double cv_loss = 0.0;
  std::vector<std::string> warnings;
};

// Convex stacking over cross-validated candidate predictions. The weight
// vector minimizes the CV loss over the simplex; never worse than the best
// single candidate (up to 1e-6 solver tolerance).
StackedFit fit_stacked_ensemble(const std::vector<LearnerSpec>& candidates, StackLoss loss,
                                TaskKind task, const Eigen::MatrixXd& features,
                                const Eigen::VectorXd& targets, const FoldAssignment& folds,
                                std::uint64_t seed);

struct WlsResult {
  Eigen::VectorXd coefficients;
  bool rank_deficient = false;
};

// Minimizes sum_i w_i (y_i - offset_i - design_i . eps)^2. Rank-deficient
// designs return the minimum-norm solution with the diagnostic flag set.
WlsResult weighted_least_squares(const Eigen::MatrixXd& design, const Eigen::VectorXd& response,
                                 const Eigen::VectorXd& weights, const Eigen::VectorXd& offset);

}  // namespace catemiss
