#pragma once

#include <optional>
#include <string>
#include <vector>

#include "catemiss/crossfit.hpp"
#include "catemiss/dataset.hpp"

namespace catemiss {

enum class PseudoKind { kDr, kMdr, kEp, kMep, kIptwIpcw };

enum class MissingPolicy { kAvailableCase, kImputed, kNative };

std::string pseudo_kind_name(PseudoKind kind);
std::string missing_policy_name(MissingPolicy policy);
MissingPolicy missing_policy_from_name(const std::string& name);

// Stage-one targets for the stage-two regression. A disengaged entry means the
// row is excluded from stage two by construction.
struct PseudoOutcomes {
  std::vector<std::optional<double>> values;
  PseudoKind kind = PseudoKind::kDr;
  std::string provenance;

  std::size_t present_count() const;
};

// Y_dr = (A - pi)/(pi(1-pi)) * (Y - mu_A) + mu1 - mu0.
// Available-case: defined on observed rows only. Imputed: defined everywhere
// with Y replaced by the completed outcomes.
PseudoOutcomes dr_pseudo(const Dataset& data, const NuisanceEstimates& nuisances,
                         MissingPolicy policy,
                         const Eigen::VectorXd* imputed_outcomes = nullptr);

// Y_mdr = (A - pi) C /(pi(1-pi) G) * (Y - mu_A) + mu1 - mu0. Censored rows
// contribute exactly mu1 - mu0 and never read the absent outcome.
PseudoOutcomes mdr_pseudo(const Dataset& data, const NuisanceEstimates& nuisances);

// Y = C A Y/(G pi) - C (1-A) Y/(G (1-pi)); zero on censored rows.
PseudoOutcomes iptw_ipcw_pseudo(const Dataset& data, const NuisanceEstimates& nuisances);

}  // namespace catemiss
