#include <algorithm>
#include <cmath>
#include <iostream>
#include <memory>
#include <numeric>
#include <vector>

#include "catemiss/learners.hpp"
#include "catemiss/rng.hpp"

namespace catemiss {

namespace {

// Euclidean projection onto the probability simplex (Michelot).
Eigen::VectorXd project_simplex(const Eigen::VectorXd& v) {
  const Eigen::Index m = v.size();
  std::vector<double> u(v.data(), v.data() + m);
  std::sort(u.begin(), u.end(), std::greater<double>());
  double cumulative = 0.0;
  double tau = 0.0;
  int rho = 0;
  for (Eigen::Index j = 0; j < m; ++j) {
    cumulative += u[static_cast<std::size_t>(j)];
    const double candidate = (1.0 - cumulative) / static_cast<double>(j + 1);
    if (u[static_cast<std::size_t>(j)] + candidate > 0.0) {
      rho = static_cast<int>(j + 1);
      tau = candidate;
    }
  }
  (void)rho;
  return v.unaryExpr([tau](double x) { return std::max(x + tau, 0.0); });
}

double stack_loss_value(StackLoss loss, const Eigen::MatrixXd& preds, const Eigen::VectorXd& y,
                        const Eigen::VectorXd& w) {
  const Eigen::VectorXd q = preds * w;
  const double n = static_cast<double>(y.size());
  if (loss == StackLoss::kSquared) {
    return (q - y).squaredNorm() / n;
  }
  double total = 0.0;
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    total -= y[i] * std::log(q[i]) + (1.0 - y[i]) * std::log(1.0 - q[i]);
  }
  return total / n;
}

Eigen::VectorXd stack_loss_gradient(StackLoss loss, const Eigen::MatrixXd& preds,
                                    const Eigen::VectorXd& y, const Eigen::VectorXd& w) {
  const Eigen::VectorXd q = preds * w;
  const double n = static_cast<double>(y.size());
  if (loss == StackLoss::kSquared) {
    return preds.transpose() * (2.0 * (q - y)) / n;
  }
  Eigen::VectorXd pointwise(y.size());
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    pointwise[i] = (q[i] - y[i]) / (q[i] * (1.0 - q[i]));
  }
  return preds.transpose() * pointwise / n;
}

double spectral_norm(const Eigen::MatrixXd& gram) {
  Eigen::VectorXd v = Eigen::VectorXd::Ones(gram.cols());
  v.normalize();
  double value = 0.0;
  for (int iter = 0; iter < 60; ++iter) {
    Eigen::VectorXd next = gram * v;
    value = next.norm();
    if (value <= 0.0) return 0.0;
    v = next / value;
  }
  return value;
}

class StackedImpl : public FittedModel::Impl {
 public:
  StackedImpl(std::vector<FittedModel> models, Eigen::VectorXd weights)
      : models_(std::move(models)), weights_(std::move(weights)) {}

  Eigen::VectorXd predict(const Eigen::MatrixXd& features) const override {
    Eigen::VectorXd out = Eigen::VectorXd::Zero(features.rows());
    for (std::size_t j = 0; j < models_.size(); ++j) {
      out += weights_[static_cast<Eigen::Index>(j)] * models_[j].predict(features);
    }
    return out;
  }

 private:
  std::vector<FittedModel> models_;
  Eigen::VectorXd weights_;
};

Eigen::MatrixXd subset_rows(const Eigen::MatrixXd& x, const std::vector<Eigen::Index>& rows) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()), x.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = x.row(rows[i]);
  return out;
}

Eigen::VectorXd subset(const Eigen::VectorXd& v, const std::vector<Eigen::Index>& rows) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) out[static_cast<Eigen::Index>(i)] = v[rows[i]];
  return out;
}

}  // namespace

StackedFit fit_stacked_ensemble(const std::vector<LearnerSpec>& candidates, StackLoss loss,
                                TaskKind task, const Eigen::MatrixXd& features,
                                const Eigen::VectorXd& targets, const FoldAssignment& folds,
                                std::uint64_t seed) {
  if (candidates.size() < 2) {
    throw std::invalid_argument("stacked ensemble requires at least 2 candidates");
  }
  const Eigen::Index n = targets.size();
  if (static_cast<Eigen::Index>(folds.fold_of.size()) != n) {
    throw std::invalid_argument("stacked ensemble: fold assignment does not cover the rows");
  }
  const auto fold_rows = folds.rows_by_fold();

  StackedFit result;
  std::vector<Eigen::VectorXd> oof_columns;
  for (std::size_t j = 0; j < candidates.size(); ++j) {
    LearnerSpec candidate = candidates[j];
    Eigen::VectorXd column(n);
    bool ok = true;
    try {
      for (int f = 0; f < folds.num_folds; ++f) {
        std::vector<Eigen::Index> train_rows;
        train_rows.reserve(static_cast<std::size_t>(n));
        for (Eigen::Index i = 0; i < n; ++i) {
          if (folds.fold_of[static_cast<std::size_t>(i)] != f) train_rows.push_back(i);
        }
        candidate.seed = derive_seed(seed, {hash_label("stack-cv"), static_cast<std::uint64_t>(j),
                                            static_cast<std::uint64_t>(f), candidates[j].seed});
        FittedModel model = fit(candidate, task, subset_rows(features, train_rows),
                                subset(targets, train_rows));
        const auto& eval_rows = fold_rows[static_cast<std::size_t>(f)];
        Eigen::VectorXd preds = model.predict(subset_rows(features, eval_rows));
        for (std::size_t i = 0; i < eval_rows.size(); ++i) {
          column[eval_rows[i]] = preds[static_cast<Eigen::Index>(i)];
        }
      }
    } catch (const std::exception& e) {
      ok = false;
      result.warnings.push_back("candidate " + learner_kind_name(candidates[j].kind) +
                                " dropped: " + e.what());
      std::cerr << "[catemiss] warning: " << result.warnings.back() << '\n';
    }
    if (ok) {
      oof_columns.push_back(std::move(column));
      result.candidate_index.push_back(static_cast<int>(j));
    }
  }
  if (oof_columns.empty()) {
    throw std::runtime_error("stacked ensemble: every candidate failed to fit");
  }

  const Eigen::Index m = static_cast<Eigen::Index>(oof_columns.size());
  Eigen::MatrixXd preds(n, m);
  for (Eigen::Index j = 0; j < m; ++j) preds.col(j) = oof_columns[static_cast<std::size_t>(j)];

  Eigen::VectorXd w = Eigen::VectorXd::Constant(m, 1.0 / static_cast<double>(m));
  if (m == 1) {
    w[0] = 1.0;
  } else {
    // Step 0.1/L projected gradient, 500 iterations; L from the curvature of
    // the loss at the uniform start.
    const Eigen::MatrixXd gram = preds.transpose() * preds;
    double curvature = 2.0 / static_cast<double>(n);
    if (loss == StackLoss::kLog) {
      const Eigen::VectorXd q = preds * w;
      double kappa = 0.0;
      for (Eigen::Index i = 0; i < n; ++i) {
        kappa = std::max(kappa, std::max(1.0 / (q[i] * q[i]),
                                         1.0 / ((1.0 - q[i]) * (1.0 - q[i]))));
      }
      curvature = kappa / static_cast<double>(n);
    }
    const double lipschitz = std::max(curvature * spectral_norm(gram), 1e-12);
    const double step = 0.1 / lipschitz;
    for (int iter = 0; iter < 500; ++iter) {
      w = project_simplex(w - step * stack_loss_gradient(loss, preds, targets, w));
    }
    // Convexity guarantee: never worse than the best single candidate. Ties
    // resolve toward the earlier candidate.
    double best_value = stack_loss_value(loss, preds, targets, w);
    int best_vertex = -1;
    for (Eigen::Index j = 0; j < m; ++j) {
      Eigen::VectorXd vertex = Eigen::VectorXd::Zero(m);
      vertex[j] = 1.0;
      const double value = stack_loss_value(loss, preds, targets, vertex);
      if (value < best_value - 1e-12) {
        best_value = value;
        best_vertex = static_cast<int>(j);
      }
    }
    if (best_vertex >= 0) {
      w.setZero();
      w[best_vertex] = 1.0;
    }
  }
  result.cv_loss = stack_loss_value(loss, preds, targets, w);

  std::vector<FittedModel> members;
  members.reserve(static_cast<std::size_t>(m));
  for (Eigen::Index j = 0; j < m; ++j) {
    LearnerSpec candidate = candidates[static_cast<std::size_t>(result.candidate_index[static_cast<std::size_t>(j)])];
    candidate.seed = derive_seed(seed, {hash_label("stack-final"), static_cast<std::uint64_t>(j),
                                        candidate.seed});
    members.push_back(fit(candidate, task, features, targets));
  }
  result.weights = w;
  result.model = FittedModel(std::make_shared<StackedImpl>(std::move(members), w),
                             features.cols(), task);
  return result;
}

}  // namespace catemiss
