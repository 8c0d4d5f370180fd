#include "catemiss/learners.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "catemiss/rng.hpp"

namespace catemiss {

namespace detail {
FittedModel fit_forest(const LearnerSpec& spec, TaskKind task, const Eigen::MatrixXd& x,
                       const Eigen::VectorXd& y, const Eigen::VectorXd& w);
FittedModel fit_boosted_stumps(const LearnerSpec& spec, TaskKind task, const Eigen::MatrixXd& x,
                               const Eigen::VectorXd& y, const Eigen::VectorXd& w);
}  // namespace detail

namespace {

double clamp_probability(double p) {
  return std::min(1.0 - kProbabilityFloor, std::max(kProbabilityFloor, p));
}

void check_training_input(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                          const Eigen::VectorXd* w, TaskKind task) {
  if (x.rows() == 0) throw std::invalid_argument("fit: empty training data");
  if (x.rows() != y.size()) throw std::invalid_argument("fit: feature/target length mismatch");
  if (w != nullptr) {
    if (w->size() != y.size()) throw std::invalid_argument("fit: weight length mismatch");
    if ((w->array() < 0.0).any()) throw std::invalid_argument("fit: negative weights");
  }
  if (task == TaskKind::kProbability) {
    for (Eigen::Index i = 0; i < y.size(); ++i) {
      if (y[i] != 0.0 && y[i] != 1.0) {
        throw std::invalid_argument("probability task requires 0/1 targets");
      }
    }
  }
}

class ConstantImpl : public FittedModel::Impl {
 public:
  explicit ConstantImpl(double value) : value_(value) {}
  Eigen::VectorXd predict(const Eigen::MatrixXd& features) const override {
    return Eigen::VectorXd::Constant(features.rows(), value_);
  }

 private:
  double value_;
};

class LinearImpl : public FittedModel::Impl {
 public:
  explicit LinearImpl(Eigen::VectorXd beta) : beta_(std::move(beta)) {}
  Eigen::VectorXd predict(const Eigen::MatrixXd& features) const override {
    return beta_[0] + (features * beta_.tail(beta_.size() - 1)).array();
  }

 private:
  Eigen::VectorXd beta_;  // intercept first
};

class LogisticImpl : public FittedModel::Impl {
 public:
  LogisticImpl(Eigen::VectorXd beta, Eigen::VectorXd center, Eigen::VectorXd scale)
      : beta_(std::move(beta)), center_(std::move(center)), scale_(std::move(scale)) {}
  Eigen::VectorXd predict(const Eigen::MatrixXd& features) const override {
    Eigen::VectorXd eta = Eigen::VectorXd::Constant(features.rows(), beta_[0]);
    for (Eigen::Index j = 0; j < features.cols(); ++j) {
      eta += beta_[j + 1] * ((features.col(j).array() - center_[j]) / scale_[j]).matrix();
    }
    return eta.unaryExpr([](double e) { return 1.0 / (1.0 + std::exp(-e)); });
  }

 private:
  Eigen::VectorXd beta_;
  Eigen::VectorXd center_;
  Eigen::VectorXd scale_;
};

class KnnImpl : public FittedModel::Impl {
 public:
  KnnImpl(Eigen::MatrixXd x, Eigen::VectorXd y, Eigen::VectorXd w, int k)
      : x_(std::move(x)), y_(std::move(y)), w_(std::move(w)), k_(k) {}

  Eigen::VectorXd predict(const Eigen::MatrixXd& features) const override {
    const Eigen::Index n = x_.rows();
    const int k = static_cast<int>(std::min<Eigen::Index>(k_, n));
    Eigen::VectorXd out(features.rows());
    std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
    std::vector<double> dist(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < features.rows(); ++i) {
      for (Eigen::Index r = 0; r < n; ++r) {
        dist[static_cast<std::size_t>(r)] = (x_.row(r) - features.row(i)).squaredNorm();
        order[static_cast<std::size_t>(r)] = r;
      }
      // Ties resolved by row index so predictions are reproducible.
      std::partial_sort(order.begin(), order.begin() + k, order.end(),
                        [&](Eigen::Index a, Eigen::Index b) {
                          const double da = dist[static_cast<std::size_t>(a)];
                          const double db = dist[static_cast<std::size_t>(b)];
                          return da < db || (da == db && a < b);
                        });
      double num = 0.0, den = 0.0;
      for (int j = 0; j < k; ++j) {
        const Eigen::Index r = order[static_cast<std::size_t>(j)];
        num += w_[r] * y_[r];
        den += w_[r];
      }
      out[i] = den > 0.0 ? num / den : y_.mean();
    }
    return out;
  }

 private:
  Eigen::MatrixXd x_;
  Eigen::VectorXd y_;
  Eigen::VectorXd w_;
  int k_;
};

FittedModel fit_mean(TaskKind task, const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                     const Eigen::VectorXd& w) {
  const double total = w.sum();
  if (total <= 0.0) throw std::invalid_argument("fit: all weights are zero");
  double value = w.dot(y) / total;
  if (task == TaskKind::kProbability) value = clamp_probability(value);
  return FittedModel(std::make_shared<ConstantImpl>(value), x.cols(), task);
}

FittedModel fit_linear(const LearnerSpec& spec, TaskKind task, const Eigen::MatrixXd& x,
                       const Eigen::VectorXd& y, const Eigen::VectorXd& w) {
  const Eigen::Index n = x.rows();
  const Eigen::Index q = x.cols() + 1;
  Eigen::MatrixXd design(n, q);
  design.col(0).setOnes();
  design.rightCols(x.cols()) = x;
  Eigen::VectorXd sqrt_w = w.array().sqrt();
  Eigen::MatrixXd dw = sqrt_w.asDiagonal() * design;
  Eigen::VectorXd yw = sqrt_w.asDiagonal() * y;

  Eigen::VectorXd beta;
  if (spec.ridge_penalty > 0.0) {
    Eigen::MatrixXd gram = dw.transpose() * dw;
    gram.diagonal().array() += spec.ridge_penalty;
    beta = gram.ldlt().solve(dw.transpose() * yw);
  } else {
    // Rank-revealing solve; degenerate (e.g. constant) columns fall back to
    // the minimum-norm solution instead of aborting the fit.
    Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(dw);
    beta = cod.solve(yw);
  }
  if (!beta.allFinite()) throw std::runtime_error("linear fit produced non-finite coefficients");
  if (task == TaskKind::kProbability) {
    // Linear probability fit still honors the clamp at prediction time.
    class ClampedLinear : public FittedModel::Impl {
     public:
      explicit ClampedLinear(Eigen::VectorXd beta) : inner_(std::move(beta)) {}
      Eigen::VectorXd predict(const Eigen::MatrixXd& f) const override {
        return inner_.predict(f);
      }

     private:
      LinearImpl inner_;
    };
    return FittedModel(std::make_shared<ClampedLinear>(std::move(beta)), x.cols(), task);
  }
  return FittedModel(std::make_shared<LinearImpl>(std::move(beta)), x.cols(), task);
}

FittedModel fit_ridge_logistic(const LearnerSpec& spec, const Eigen::MatrixXd& x,
                               const Eigen::VectorXd& y, const Eigen::VectorXd& w) {
  const Eigen::Index n = x.rows();
  const Eigen::Index p = x.cols();
  Eigen::VectorXd center(p), scale(p);
  for (Eigen::Index j = 0; j < p; ++j) {
    center[j] = x.col(j).mean();
    const double var = (x.col(j).array() - center[j]).square().mean();
    scale[j] = var > 0.0 ? std::sqrt(var) : 1.0;
  }
  Eigen::MatrixXd design(n, p + 1);
  design.col(0).setOnes();
  for (Eigen::Index j = 0; j < p; ++j) {
    design.col(j + 1) = (x.col(j).array() - center[j]) / scale[j];
  }

  Eigen::VectorXd beta = Eigen::VectorXd::Zero(p + 1);
  const double lambda = spec.logistic_penalty;
  for (int iter = 0; iter < 60; ++iter) {
    Eigen::VectorXd eta = design * beta;
    Eigen::VectorXd mu = eta.unaryExpr([](double e) { return 1.0 / (1.0 + std::exp(-e)); });
    Eigen::VectorXd irls_w = (mu.array() * (1.0 - mu.array())).max(1e-10) * w.array();
    Eigen::VectorXd grad = design.transpose() * (w.array() * (y - mu).array()).matrix();
    grad.tail(p) -= lambda * beta.tail(p);
    Eigen::MatrixXd hess = design.transpose() * irls_w.asDiagonal() * design;
    hess.diagonal().tail(p).array() += lambda;
    hess.diagonal().array() += 1e-12;
    Eigen::VectorXd step = hess.ldlt().solve(grad);
    beta += step;
    if (step.lpNorm<Eigen::Infinity>() < 1e-10) break;
  }
  if (!beta.allFinite()) throw std::runtime_error("logistic fit diverged");
  return FittedModel(std::make_shared<LogisticImpl>(std::move(beta), std::move(center),
                                                    std::move(scale)),
                     p, TaskKind::kProbability);
}

}  // namespace

void LearnerSpec::validate(TaskKind task) const {
  switch (kind) {
    case LearnerKind::kMean:
    case LearnerKind::kLinear:
      break;
    case LearnerKind::kRidgeLogistic:
      if (task != TaskKind::kProbability) {
        throw std::invalid_argument("ridge-logistic requires a probability task");
      }
      if (logistic_penalty < 0.0) throw std::invalid_argument("logistic penalty must be >= 0");
      break;
    case LearnerKind::kKnn:
      if (neighbors < 1) throw std::invalid_argument("knn requires neighbors >= 1");
      break;
    case LearnerKind::kRandomForest:
      if (trees < 1 || min_node_size < 1) {
        throw std::invalid_argument("random forest requires trees >= 1 and min_node_size >= 1");
      }
      if (feature_fraction < 0.0 || feature_fraction > 1.0) {
        throw std::invalid_argument("feature_fraction must lie in [0,1]");
      }
      break;
    case LearnerKind::kBoostedStumps:
      if (boost_rounds < 1 || learning_rate <= 0.0) {
        throw std::invalid_argument("boosted stumps require rounds >= 1 and learning_rate > 0");
      }
      break;
    case LearnerKind::kStackedEnsemble:
      if (candidates.size() < 2) {
        throw std::invalid_argument("stacked ensemble requires at least 2 candidates");
      }
      if (stack_folds < 2) throw std::invalid_argument("stacked ensemble requires >= 2 folds");
      for (const auto& candidate : candidates) candidate.validate(task);
      break;
  }
}

LearnerSpec mean_spec() {
  LearnerSpec s;
  s.kind = LearnerKind::kMean;
  return s;
}

LearnerSpec linear_spec() {
  LearnerSpec s;
  s.kind = LearnerKind::kLinear;
  return s;
}

LearnerSpec logistic_spec(double penalty) {
  LearnerSpec s;
  s.kind = LearnerKind::kRidgeLogistic;
  s.logistic_penalty = penalty;
  return s;
}

LearnerSpec knn_spec(int neighbors) {
  LearnerSpec s;
  s.kind = LearnerKind::kKnn;
  s.neighbors = neighbors;
  return s;
}

LearnerSpec forest_spec(int trees, int min_node_size, std::uint64_t seed) {
  LearnerSpec s;
  s.kind = LearnerKind::kRandomForest;
  s.trees = trees;
  s.min_node_size = min_node_size;
  s.seed = seed;
  return s;
}

LearnerSpec stumps_spec(int rounds, double learning_rate) {
  LearnerSpec s;
  s.kind = LearnerKind::kBoostedStumps;
  s.boost_rounds = rounds;
  s.learning_rate = learning_rate;
  return s;
}

LearnerSpec stacked_spec(std::vector<LearnerSpec> candidates, std::uint64_t seed) {
  LearnerSpec s;
  s.kind = LearnerKind::kStackedEnsemble;
  s.candidates = std::move(candidates);
  s.seed = seed;
  return s;
}

std::string learner_kind_name(LearnerKind kind) {
  switch (kind) {
    case LearnerKind::kMean: return "mean";
    case LearnerKind::kLinear: return "linear";
    case LearnerKind::kRidgeLogistic: return "ridge-logistic";
    case LearnerKind::kKnn: return "knn";
    case LearnerKind::kRandomForest: return "random-forest";
    case LearnerKind::kBoostedStumps: return "boosted-stumps";
    case LearnerKind::kStackedEnsemble: return "stacked-ensemble";
  }
  throw std::logic_error("unknown learner kind");
}

LearnerKind learner_kind_from_name(const std::string& name) {
  if (name == "mean") return LearnerKind::kMean;
  if (name == "linear") return LearnerKind::kLinear;
  if (name == "ridge-logistic") return LearnerKind::kRidgeLogistic;
  if (name == "knn") return LearnerKind::kKnn;
  if (name == "random-forest") return LearnerKind::kRandomForest;
  if (name == "boosted-stumps") return LearnerKind::kBoostedStumps;
  if (name == "stacked-ensemble") return LearnerKind::kStackedEnsemble;
  throw std::invalid_argument("unknown learner kind: " + name);
}

FittedModel::FittedModel(std::shared_ptr<const Impl> impl, Eigen::Index input_dim, TaskKind task)
    : impl_(std::move(impl)), input_dim_(input_dim), task_(task) {}

Eigen::VectorXd FittedModel::predict(const Eigen::MatrixXd& features) const {
  if (!impl_) throw std::logic_error("predict on an empty model");
  if (features.cols() != input_dim_) {
    throw std::invalid_argument("predict: feature width " + std::to_string(features.cols()) +
                                " does not match model input dimension " +
                                std::to_string(input_dim_));
  }
  Eigen::VectorXd out = impl_->predict(features);
  if (task_ == TaskKind::kProbability) {
    out = out.unaryExpr([](double p) { return clamp_probability(p); });
  }
  return out;
}

FittedModel fit(const LearnerSpec& spec, TaskKind task, const Eigen::MatrixXd& features,
                const Eigen::VectorXd& targets, const Eigen::VectorXd* weights) {
  spec.validate(task);
  check_training_input(features, targets, weights, task);
  Eigen::VectorXd w = weights != nullptr ? *weights : Eigen::VectorXd::Ones(targets.size());

  switch (spec.kind) {
    case LearnerKind::kMean:
      return fit_mean(task, features, targets, w);
    case LearnerKind::kLinear:
      return fit_linear(spec, task, features, targets, w);
    case LearnerKind::kRidgeLogistic:
      return fit_ridge_logistic(spec, features, targets, w);
    case LearnerKind::kKnn:
      return FittedModel(std::make_shared<KnnImpl>(features, targets, w, spec.neighbors),
                         features.cols(), task);
    case LearnerKind::kRandomForest:
      return detail::fit_forest(spec, task, features, targets, w);
    case LearnerKind::kBoostedStumps:
      return detail::fit_boosted_stumps(spec, task, features, targets, w);
    case LearnerKind::kStackedEnsemble: {
      const Eigen::Index n = targets.size();
      const int folds = static_cast<int>(std::min<Eigen::Index>(spec.stack_folds, n));
      if (folds < 2) throw std::invalid_argument("stacked ensemble needs at least 2 rows");
      FoldAssignment assignment = assign_folds(n, folds, derive_seed(spec.seed, {hash_label("stack-folds")}));
      const StackLoss loss = spec.stack_loss.value_or(
          task == TaskKind::kProbability ? StackLoss::kLog : StackLoss::kSquared);
      return fit_stacked_ensemble(spec.candidates, loss, task, features, targets, assignment,
                                  spec.seed)
          .model;
    }
  }
  throw std::logic_error("unreachable learner kind");
}

WlsResult weighted_least_squares(const Eigen::MatrixXd& design, const Eigen::VectorXd& response,
                                 const Eigen::VectorXd& weights, const Eigen::VectorXd& offset) {
  const Eigen::Index n = design.rows();
  if (response.size() != n || weights.size() != n || offset.size() != n) {
    throw std::invalid_argument("weighted_least_squares: length mismatch");
  }
  if ((weights.array() < 0.0).any()) {
    throw std::invalid_argument("weighted_least_squares: negative weights");
  }
  if (!design.allFinite()) {
    throw std::invalid_argument("weighted_least_squares: non-finite design");
  }
  std::vector<Eigen::Index> active;
  active.reserve(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) {
    if (weights[i] > 0.0) active.push_back(i);
  }
  if (active.empty()) {
    throw std::invalid_argument("weighted_least_squares: all weights are zero");
  }
  Eigen::MatrixXd dw(static_cast<Eigen::Index>(active.size()), design.cols());
  Eigen::VectorXd rw(static_cast<Eigen::Index>(active.size()));
  for (std::size_t k = 0; k < active.size(); ++k) {
    const Eigen::Index i = active[k];
    const double sw = std::sqrt(weights[i]);
    dw.row(static_cast<Eigen::Index>(k)) = sw * design.row(i);
    rw[static_cast<Eigen::Index>(k)] = sw * (response[i] - offset[i]);
  }
  Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(dw);
  WlsResult result;
  result.coefficients = cod.solve(rw);
  result.rank_deficient = cod.rank() < design.cols();
  if (!result.coefficients.allFinite()) {
    throw std::runtime_error("weighted_least_squares: non-finite solution");
  }
  return result;
}

}  // namespace catemiss
