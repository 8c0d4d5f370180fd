#include "catemiss/sieve.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace catemiss {

bool SieveBasis::has_interactions() const {
  return interaction_order >= 2 && col_min.size() <= 4;
}

Eigen::Index SieveBasis::num_features() const {
  const Eigen::Index p = col_min.size();
  Eigen::Index q = 1 + p * degree;
  if (has_interactions()) q += p * (p - 1) / 2;
  return q;
}

Eigen::MatrixXd SieveBasis::evaluate(const Eigen::MatrixXd& x) const {
  const Eigen::Index p = col_min.size();
  if (x.cols() != p) throw std::invalid_argument("sieve: column count mismatch");
  const Eigen::Index n = x.rows();
  Eigen::MatrixXd phi(n, num_features());
  phi.col(0).setOnes();

  Eigen::MatrixXd unit(n, p);
  for (Eigen::Index j = 0; j < p; ++j) {
    if (degenerate[static_cast<std::size_t>(j)]) {
      unit.col(j).setZero();
    } else {
      unit.col(j) = (x.col(j).array() - col_min[j]) / (col_max[j] - col_min[j]);
    }
  }

  Eigen::Index col = 1;
  for (Eigen::Index j = 0; j < p; ++j) {
    for (int k = 1; k <= degree; ++k, ++col) {
      if (degenerate[static_cast<std::size_t>(j)]) {
        phi.col(col).setZero();
      } else {
        phi.col(col) =
            (static_cast<double>(k) * std::numbers::pi * unit.col(j).array()).cos();
      }
    }
  }
  if (has_interactions()) {
    for (Eigen::Index i = 0; i < p; ++i) {
      for (Eigen::Index j = i + 1; j < p; ++j, ++col) {
        if (degenerate[static_cast<std::size_t>(i)] || degenerate[static_cast<std::size_t>(j)]) {
          phi.col(col).setZero();
        } else {
          phi.col(col) = (std::numbers::pi * unit.col(i).array()).cos() *
                         (std::numbers::pi * unit.col(j).array()).cos();
        }
      }
    }
  }
  return phi;
}

int default_sieve_degree(Eigen::Index n) {
  const int d = static_cast<int>(std::ceil(std::pow(static_cast<double>(n), 0.25)));
  return std::min(10, std::max(1, d));
}

SieveBasis build_sieve(const Eigen::MatrixXd& x, int degree, int interaction_order) {
  if (degree < 1) throw std::invalid_argument("sieve degree must be >= 1");
  if (!x.allFinite()) throw std::invalid_argument("sieve: non-finite training values");
  SieveBasis basis;
  basis.degree = degree;
  basis.interaction_order = interaction_order;
  basis.col_min = x.colwise().minCoeff();
  basis.col_max = x.colwise().maxCoeff();
  basis.degenerate.resize(static_cast<std::size_t>(x.cols()));
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    basis.degenerate[static_cast<std::size_t>(j)] = basis.col_min[j] == basis.col_max[j];
  }
  return basis;
}

Eigen::VectorXd ep_weights(const Dataset& data, const NuisanceEstimates& nuisances,
                           bool missing_aware) {
  const Eigen::Index n = data.n_rows();
  if (nuisances.pi.size() != n || nuisances.g.size() != n) {
    throw std::invalid_argument("ep_weights: nuisance length mismatch");
  }
  Eigen::VectorXd weights(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double pi = nuisances.pi[i];
    const double inv_arm = data.treatment[i] == 1 ? 1.0 / pi : 1.0 / (1.0 - pi);
    if (missing_aware) {
      weights[i] = data.observed[i] == 1 ? inv_arm / nuisances.g[i] : 0.0;
    } else {
      weights[i] = inv_arm;
    }
  }
  return weights;
}

TargetedOutcomes itmle_update(const Dataset& data, const NuisanceEstimates& nuisances,
                              const SieveBasis& basis, const Eigen::VectorXd& weights,
                              const Eigen::VectorXd* completed_outcomes) {
  const Eigen::Index n = data.n_rows();
  if (weights.size() != n) throw std::invalid_argument("itmle_update: weight length mismatch");
  if ((weights.array() < 0.0).any()) {
    throw std::invalid_argument("itmle_update: negative weights");
  }
  if (completed_outcomes != nullptr && completed_outcomes->size() != n) {
    throw std::invalid_argument("itmle_update: completed outcome length mismatch");
  }

  std::vector<Eigen::Index> rows;
  rows.reserve(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) {
    if (completed_outcomes != nullptr || data.observed[i] == 1) rows.push_back(i);
  }
  double weight_mass = 0.0;
  for (Eigen::Index r : rows) weight_mass += weights[r];
  if (rows.empty() || weight_mass <= 0.0) {
    throw std::runtime_error("no effective observations for targeting");
  }

  const Eigen::MatrixXd x_all = data.het_matrix();
  Eigen::MatrixXd design(static_cast<Eigen::Index>(rows.size()), basis.num_features());
  Eigen::VectorXd response(static_cast<Eigen::Index>(rows.size()));
  Eigen::VectorXd offset(static_cast<Eigen::Index>(rows.size()));
  Eigen::VectorXd w(static_cast<Eigen::Index>(rows.size()));
  {
    Eigen::MatrixXd x_rows(static_cast<Eigen::Index>(rows.size()), x_all.cols());
    for (std::size_t i = 0; i < rows.size(); ++i) x_rows.row(static_cast<Eigen::Index>(i)) = x_all.row(rows[i]);
    design = basis.evaluate(x_rows);
  }
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const Eigen::Index r = rows[i];
    response[static_cast<Eigen::Index>(i)] =
        completed_outcomes != nullptr ? (*completed_outcomes)[r] : data.outcome_at(r);
    offset[static_cast<Eigen::Index>(i)] = nuisances.mu_a[r];
    w[static_cast<Eigen::Index>(i)] = weights[r];
  }

  const WlsResult wls = weighted_least_squares(design, response, w, offset);

  TargetedOutcomes out;
  out.epsilon = wls.coefficients;
  out.weights = weights;
  const Eigen::VectorXd shift = basis.evaluate(x_all) * wls.coefficients;
  out.mu1_star = nuisances.mu1 + shift;
  out.mu0_star = nuisances.mu0 - shift;
  return out;
}

PseudoOutcomes ep_pseudo(const TargetedOutcomes& targeted) {
  PseudoOutcomes out;
  out.kind = targeted.missing_aware ? PseudoKind::kMep : PseudoKind::kEp;
  const Eigen::Index n = targeted.mu0_star.size();
  out.values.resize(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) {
    const double value = targeted.mu1_star[i] - targeted.mu0_star[i];
    if (!std::isfinite(value)) {
      throw std::runtime_error("non-finite EP pseudo-outcome at row " + std::to_string(i));
    }
    out.values[static_cast<std::size_t>(i)] = value;
  }
  return out;
}

}  // namespace catemiss
