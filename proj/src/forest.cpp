#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <vector>

#include "catemiss/learners.hpp"
#include "catemiss/rng.hpp"

namespace catemiss {
namespace detail {

namespace {

struct TreeNode {
  int feature = -1;  // -1 marks a leaf
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  double value = 0.0;
};

struct SplitChoice {
  int feature = -1;
  double threshold = 0.0;
  double gain = 0.0;
};

class Tree {
 public:
  Tree(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const std::vector<double>& row_weight,
       std::vector<int> rows, int min_node_size, int mtry, Rng rng)
      : x_(x), y_(y), row_weight_(row_weight), rows_(std::move(rows)),
        min_node_size_(min_node_size), mtry_(mtry), rng_(rng) {
    nodes_.reserve(64);
    build(0, static_cast<int>(rows_.size()));
  }

  double predict_row(const Eigen::MatrixXd& x, Eigen::Index row) const {
    int node = 0;
    while (nodes_[static_cast<std::size_t>(node)].feature >= 0) {
      const TreeNode& nd = nodes_[static_cast<std::size_t>(node)];
      node = x(row, nd.feature) <= nd.threshold ? nd.left : nd.right;
    }
    return nodes_[static_cast<std::size_t>(node)].value;
  }

 private:
  int build(int lo, int hi) {
    double sum_w = 0.0, sum_wy = 0.0;
    double count = 0.0;
    for (int i = lo; i < hi; ++i) {
      const int r = rows_[static_cast<std::size_t>(i)];
      const double w = row_weight_[static_cast<std::size_t>(r)];
      sum_w += w;
      sum_wy += w * y_[r];
      count += w;
    }
    const int node_id = static_cast<int>(nodes_.size());
    nodes_.push_back(TreeNode{});
    nodes_.back().value = sum_w > 0.0 ? sum_wy / sum_w : 0.0;

    if (count < 2.0 * min_node_size_ || hi - lo < 2) return node_id;

    SplitChoice best = find_split(lo, hi, sum_w, sum_wy);
    if (best.feature < 0) return node_id;

    auto mid_it = std::partition(rows_.begin() + lo, rows_.begin() + hi, [&](int r) {
      return x_(r, best.feature) <= best.threshold;
    });
    const int mid = static_cast<int>(mid_it - rows_.begin());
    if (mid == lo || mid == hi) return node_id;

    nodes_[static_cast<std::size_t>(node_id)].feature = best.feature;
    nodes_[static_cast<std::size_t>(node_id)].threshold = best.threshold;
    const int left = build(lo, mid);
    nodes_[static_cast<std::size_t>(node_id)].left = left;
    const int right = build(mid, hi);
    nodes_[static_cast<std::size_t>(node_id)].right = right;
    return node_id;
  }

  SplitChoice find_split(int lo, int hi, double sum_w, double sum_wy) {
    const int p = static_cast<int>(x_.cols());
    feature_pool_.resize(static_cast<std::size_t>(p));
    for (int j = 0; j < p; ++j) feature_pool_[static_cast<std::size_t>(j)] = j;
    // Partial Fisher-Yates draw of mtry candidate features.
    const int tries = std::min(mtry_, p);
    for (int j = 0; j < tries; ++j) {
      const std::size_t pick = static_cast<std::size_t>(j) +
          rng_.uniform_index(static_cast<std::size_t>(p - j));
      std::swap(feature_pool_[static_cast<std::size_t>(j)], feature_pool_[pick]);
    }

    SplitChoice best;
    const double parent_score = sum_wy * sum_wy / sum_w;
    scratch_.assign(rows_.begin() + lo, rows_.begin() + hi);
    for (int t = 0; t < tries; ++t) {
      const int feature = feature_pool_[static_cast<std::size_t>(t)];
      std::sort(scratch_.begin(), scratch_.end(), [&](int a, int b) {
        const double xa = x_(a, feature), xb = x_(b, feature);
        return xa < xb || (xa == xb && a < b);
      });
      double left_w = 0.0, left_wy = 0.0, left_count = 0.0;
      for (std::size_t i = 0; i + 1 < scratch_.size(); ++i) {
        const int r = scratch_[i];
        const double w = row_weight_[static_cast<std::size_t>(r)];
        left_w += w;
        left_wy += w * y_[r];
        left_count += w;
        const double xv = x_(r, feature);
        const double xn = x_(scratch_[i + 1], feature);
        if (xn <= xv) continue;
        if (left_count < min_node_size_ || (sum_w - left_count) < min_node_size_) continue;
        const double right_w = sum_w - left_w;
        if (left_w <= 0.0 || right_w <= 0.0) continue;
        const double right_wy = sum_wy - left_wy;
        const double gain =
            left_wy * left_wy / left_w + right_wy * right_wy / right_w - parent_score;
        if (gain > best.gain + 1e-14) {
          best.feature = feature;
          best.threshold = xv + 0.5 * (xn - xv);
          best.gain = gain;
        }
      }
    }
    return best;
  }

  const Eigen::MatrixXd& x_;
  const Eigen::VectorXd& y_;
  const std::vector<double>& row_weight_;
  std::vector<int> rows_;
  int min_node_size_;
  int mtry_;
  Rng rng_;
  std::vector<TreeNode> nodes_;
  std::vector<int> feature_pool_;
  std::vector<int> scratch_;
};

class ForestImpl : public FittedModel::Impl {
 public:
  ForestImpl(const LearnerSpec& spec, const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
             const Eigen::VectorXd& w) {
    const Eigen::Index n = x.rows();
    const int p = static_cast<int>(x.cols());
    int mtry = spec.feature_fraction > 0.0
                   ? std::max(1, static_cast<int>(std::floor(spec.feature_fraction * p)))
                   : std::max(1, static_cast<int>(std::floor(std::sqrt(static_cast<double>(p)))));
    Rng master(derive_seed(spec.seed, {hash_label("forest")}));
    trees_.reserve(static_cast<std::size_t>(spec.trees));
    std::vector<double> row_weight(static_cast<std::size_t>(n));
    std::vector<int> rows;
    rows.reserve(static_cast<std::size_t>(n));
    for (int t = 0; t < spec.trees; ++t) {
      Rng tree_rng = master.fork(static_cast<std::uint64_t>(t));
      std::fill(row_weight.begin(), row_weight.end(), 0.0);
      for (Eigen::Index i = 0; i < n; ++i) {
        row_weight[tree_rng.uniform_index(static_cast<std::size_t>(n))] += 1.0;
      }
      rows.clear();
      for (Eigen::Index i = 0; i < n; ++i) {
        row_weight[static_cast<std::size_t>(i)] *= w[i];
        if (row_weight[static_cast<std::size_t>(i)] > 0.0) rows.push_back(static_cast<int>(i));
      }
      if (rows.empty()) {
        // Degenerate bootstrap (possible when most weights are zero); fall
        // back to the weighted sample.
        for (Eigen::Index i = 0; i < n; ++i) {
          row_weight[static_cast<std::size_t>(i)] = w[i];
          if (w[i] > 0.0) rows.push_back(static_cast<int>(i));
        }
      }
      trees_.emplace_back(std::make_unique<Tree>(x, y, row_weight, rows, spec.min_node_size,
                                                 mtry, tree_rng.fork(0x7eef)));
    }
  }

  Eigen::VectorXd predict(const Eigen::MatrixXd& features) const override {
    Eigen::VectorXd out = Eigen::VectorXd::Zero(features.rows());
    for (const auto& tree : trees_) {
      for (Eigen::Index i = 0; i < features.rows(); ++i) {
        out[i] += tree->predict_row(features, i);
      }
    }
    return out / static_cast<double>(trees_.size());
  }

 private:
  std::vector<std::unique_ptr<Tree>> trees_;
};

struct Stump {
  int feature = 0;
  double threshold = 0.0;
  double left = 0.0;
  double right = 0.0;
};

class StumpsImpl : public FittedModel::Impl {
 public:
  StumpsImpl(const LearnerSpec& spec, const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
             const Eigen::VectorXd& w)
      : rate_(spec.learning_rate) {
    const Eigen::Index n = x.rows();
    const int p = static_cast<int>(x.cols());
    const double total_w = w.sum();
    base_ = w.dot(y) / total_w;
    Eigen::VectorXd residual = y.array() - base_;

    // Presorted row order per feature; reused every round.
    std::vector<std::vector<int>> order(static_cast<std::size_t>(p));
    for (int j = 0; j < p; ++j) {
      auto& ord = order[static_cast<std::size_t>(j)];
      ord.resize(static_cast<std::size_t>(n));
      for (Eigen::Index i = 0; i < n; ++i) ord[static_cast<std::size_t>(i)] = static_cast<int>(i);
      std::sort(ord.begin(), ord.end(), [&](int a, int b) {
        const double xa = x(a, j), xb = x(b, j);
        return xa < xb || (xa == xb && a < b);
      });
    }

    const double min_leaf = std::max(1, spec.min_node_size);
    for (int round = 0; round < spec.boost_rounds; ++round) {
      Stump best;
      double best_gain = 0.0;
      bool found = false;
      const double sum_wr = w.dot(residual);
      for (int j = 0; j < p; ++j) {
        const auto& ord = order[static_cast<std::size_t>(j)];
        double left_w = 0.0, left_wr = 0.0;
        for (std::size_t i = 0; i + 1 < ord.size(); ++i) {
          const int r = ord[i];
          left_w += w[r];
          left_wr += w[r] * residual[r];
          const double xv = x(r, j);
          const double xn = x(ord[i + 1], j);
          if (xn <= xv) continue;
          const double right_w = total_w - left_w;
          if (left_w < min_leaf || right_w < min_leaf) continue;
          const double right_wr = sum_wr - left_wr;
          const double gain = left_wr * left_wr / left_w + right_wr * right_wr / right_w;
          if (gain > best_gain + 1e-14) {
            best_gain = gain;
            best.feature = j;
            best.threshold = xv + 0.5 * (xn - xv);
            best.left = left_wr / left_w;
            best.right = right_wr / right_w;
            found = true;
          }
        }
      }
      if (!found) break;
      stumps_.push_back(best);
      for (Eigen::Index i = 0; i < n; ++i) {
        const double fit_value = x(i, best.feature) <= best.threshold ? best.left : best.right;
        residual[i] -= rate_ * fit_value;
      }
    }
  }

  Eigen::VectorXd predict(const Eigen::MatrixXd& features) const override {
    Eigen::VectorXd out = Eigen::VectorXd::Constant(features.rows(), base_);
    for (const auto& s : stumps_) {
      for (Eigen::Index i = 0; i < features.rows(); ++i) {
        out[i] += rate_ * (features(i, s.feature) <= s.threshold ? s.left : s.right);
      }
    }
    return out;
  }

 private:
  double base_ = 0.0;
  double rate_;
  std::vector<Stump> stumps_;
};

}  // namespace

FittedModel fit_forest(const LearnerSpec& spec, TaskKind task, const Eigen::MatrixXd& x,
                       const Eigen::VectorXd& y, const Eigen::VectorXd& w) {
  return FittedModel(std::make_shared<ForestImpl>(spec, x, y, w), x.cols(), task);
}

FittedModel fit_boosted_stumps(const LearnerSpec& spec, TaskKind task, const Eigen::MatrixXd& x,
                               const Eigen::VectorXd& y, const Eigen::VectorXd& w) {
  return FittedModel(std::make_shared<StumpsImpl>(spec, x, y, w), x.cols(), task);
}

}  // namespace detail
}  // namespace catemiss
