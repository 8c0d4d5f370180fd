#include "catemiss/pseudo.hpp"

#include <cmath>
#include <stdexcept>

namespace catemiss {

std::string pseudo_kind_name(PseudoKind kind) {
  switch (kind) {
    case PseudoKind::kDr: return "dr";
    case PseudoKind::kMdr: return "mdr";
    case PseudoKind::kEp: return "ep";
    case PseudoKind::kMep: return "mep";
    case PseudoKind::kIptwIpcw: return "iptw-ipcw";
  }
  throw std::logic_error("unknown pseudo kind");
}

std::string missing_policy_name(MissingPolicy policy) {
  switch (policy) {
    case MissingPolicy::kAvailableCase: return "ac";
    case MissingPolicy::kImputed: return "imputed";
    case MissingPolicy::kNative: return "native";
  }
  throw std::logic_error("unknown missing policy");
}

MissingPolicy missing_policy_from_name(const std::string& name) {
  if (name == "ac") return MissingPolicy::kAvailableCase;
  if (name == "imputed") return MissingPolicy::kImputed;
  if (name == "native") return MissingPolicy::kNative;
  throw std::invalid_argument("unknown missing policy: " + name);
}

std::size_t PseudoOutcomes::present_count() const {
  std::size_t count = 0;
  for (const auto& v : values) {
    if (v.has_value()) ++count;
  }
  return count;
}

namespace {

void check_lengths(const Dataset& data, const NuisanceEstimates& nuisances) {
  const Eigen::Index n = data.n_rows();
  if (nuisances.pi.size() != n || nuisances.g.size() != n || nuisances.mu0.size() != n ||
      nuisances.mu1.size() != n || nuisances.mu_a.size() != n) {
    throw std::invalid_argument("nuisance estimates do not match dataset size");
  }
}

}  // namespace

PseudoOutcomes dr_pseudo(const Dataset& data, const NuisanceEstimates& nuisances,
                         MissingPolicy policy, const Eigen::VectorXd* imputed_outcomes) {
  check_lengths(data, nuisances);
  if (policy == MissingPolicy::kNative) {
    throw std::invalid_argument("dr_pseudo supports available-case or imputed policies");
  }
  if (policy == MissingPolicy::kImputed &&
      (imputed_outcomes == nullptr || imputed_outcomes->size() != data.n_rows())) {
    throw std::invalid_argument("imputed policy requires completed outcomes for all rows");
  }

  PseudoOutcomes out;
  out.kind = PseudoKind::kDr;
  out.values.resize(static_cast<std::size_t>(data.n_rows()));
  for (Eigen::Index i = 0; i < data.n_rows(); ++i) {
    if (policy == MissingPolicy::kAvailableCase && data.observed[i] == 0) continue;
    const double y =
        policy == MissingPolicy::kImputed ? (*imputed_outcomes)[i] : data.outcome_at(i);
    const double a = static_cast<double>(data.treatment[i]);
    const double pi = nuisances.pi[i];
    const double value = (a - pi) / (pi * (1.0 - pi)) * (y - nuisances.mu_a[i]) +
                         nuisances.mu1[i] - nuisances.mu0[i];
    if (!std::isfinite(value)) {
      throw std::runtime_error("non-finite DR pseudo-outcome at row " + std::to_string(i));
    }
    out.values[static_cast<std::size_t>(i)] = value;
  }
  return out;
}

PseudoOutcomes mdr_pseudo(const Dataset& data, const NuisanceEstimates& nuisances) {
  check_lengths(data, nuisances);
  PseudoOutcomes out;
  out.kind = PseudoKind::kMdr;
  out.values.resize(static_cast<std::size_t>(data.n_rows()));
  for (Eigen::Index i = 0; i < data.n_rows(); ++i) {
    const double contrast = nuisances.mu1[i] - nuisances.mu0[i];
    double value = contrast;
    if (data.observed[i] == 1) {
      const double a = static_cast<double>(data.treatment[i]);
      const double pi = nuisances.pi[i];
      const double g = nuisances.g[i];
      value += (a - pi) / (pi * (1.0 - pi) * g) * (data.outcome_at(i) - nuisances.mu_a[i]);
    }
    if (!std::isfinite(value)) {
      throw std::runtime_error("non-finite mDR pseudo-outcome at row " + std::to_string(i));
    }
    out.values[static_cast<std::size_t>(i)] = value;
  }
  return out;
}

PseudoOutcomes iptw_ipcw_pseudo(const Dataset& data, const NuisanceEstimates& nuisances) {
  check_lengths(data, nuisances);
  PseudoOutcomes out;
  out.kind = PseudoKind::kIptwIpcw;
  out.values.resize(static_cast<std::size_t>(data.n_rows()));
  for (Eigen::Index i = 0; i < data.n_rows(); ++i) {
    double value = 0.0;
    if (data.observed[i] == 1) {
      const double y = data.outcome_at(i);
      const double pi = nuisances.pi[i];
      const double g = nuisances.g[i];
      if (data.treatment[i] == 1) {
        value = y / (g * pi);
      } else {
        value = -y / (g * (1.0 - pi));
      }
    }
    if (!std::isfinite(value)) {
      throw std::runtime_error("non-finite IPTW-IPCW pseudo-outcome at row " + std::to_string(i));
    }
    out.values[static_cast<std::size_t>(i)] = value;
  }
  return out;
}

}  // namespace catemiss
