#pragma once

#include <string>
#include <vector>

#include "catemiss/dataset.hpp"

namespace catemiss {

// Column-role bindings for CSV ingestion. Covariate columns default to every
// column not bound to a role; x_cols defaults to all covariates.
struct CsvSchema {
  std::string treatment_col;
  std::string missing_col;
  std::string outcome_col;
  std::vector<std::string> covariate_cols;
  std::vector<std::string> x_cols;
};

Dataset load_csv(const std::string& path, const CsvSchema& schema);

// Writes header + rows; numeric cells use shortest round-trip formatting and
// censored outcomes are empty cells. Column names follow the schema, with
// covariates falling back to z0..z{p-1}.
void write_csv(const std::string& path, const Dataset& data, const CsvSchema& schema);

// Shortest decimal string that parses back to exactly the same double.
std::string format_double(double value);

}  // namespace catemiss
