#include "catemiss/csv.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

namespace catemiss {

namespace {

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::stringstream ss(line);
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

std::string strip(const std::string& s) {
  auto begin = s.find_first_not_of(" \t\r\n");
  if (begin == std::string::npos) return "";
  auto end = s.find_last_not_of(" \t\r\n");
  return s.substr(begin, end - begin + 1);
}

double parse_double(const std::string& cell, const std::string& column, std::size_t row) {
  const std::string text = strip(cell);
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw SchemaError("cannot parse number in column '" + column + "' at row " +
                      std::to_string(row) + ": '" + text + "'");
  }
  return value;
}

int parse_binary(const std::string& cell, const std::string& column, std::size_t row) {
  const double value = parse_double(cell, column, row);
  if (value != 0.0 && value != 1.0) {
    throw SchemaError("column '" + column + "' must be 0/1 at row " + std::to_string(row) +
                      ": got " + strip(cell));
  }
  return value == 1.0 ? 1 : 0;
}

std::size_t column_index(const std::vector<std::string>& header, const std::string& name) {
  auto it = std::find(header.begin(), header.end(), name);
  if (it == header.end()) {
    throw SchemaError("column '" + name + "' not found in header");
  }
  return static_cast<std::size_t>(it - header.begin());
}

}  // namespace

std::string format_double(double value) {
  char buffer[40];
  auto [ptr, ec] = std::to_chars(buffer, buffer + sizeof(buffer), value);
  return std::string(buffer, ptr);
}

Dataset load_csv(const std::string& path, const CsvSchema& schema) {
  if (schema.treatment_col.empty() || schema.missing_col.empty() || schema.outcome_col.empty()) {
    throw SchemaError("schema must name treatment, missingness and outcome columns");
  }
  std::ifstream in(path);
  if (!in) throw SchemaError("cannot open file: " + path);

  std::string line;
  if (!std::getline(in, line)) throw SchemaError("empty file: " + path);
  std::vector<std::string> header = split_line(line);
  for (auto& name : header) name = strip(name);

  const std::size_t a_col = column_index(header, schema.treatment_col);
  const std::size_t c_col = column_index(header, schema.missing_col);
  const std::size_t y_col = column_index(header, schema.outcome_col);

  std::vector<std::string> covariate_names = schema.covariate_cols;
  if (covariate_names.empty()) {
    for (const auto& name : header) {
      if (name != schema.treatment_col && name != schema.missing_col &&
          name != schema.outcome_col) {
        covariate_names.push_back(name);
      }
    }
  }
  if (covariate_names.empty()) {
    throw SchemaError("schema yields no covariate columns");
  }
  std::vector<std::size_t> z_cols;
  z_cols.reserve(covariate_names.size());
  for (const auto& name : covariate_names) z_cols.push_back(column_index(header, name));

  std::vector<std::string> x_names = schema.x_cols.empty() ? covariate_names : schema.x_cols;
  std::vector<Eigen::Index> het_index;
  for (const auto& name : x_names) {
    auto it = std::find(covariate_names.begin(), covariate_names.end(), name);
    if (it == covariate_names.end()) {
      throw SchemaError("x column '" + name + "' is not a covariate column");
    }
    het_index.push_back(static_cast<Eigen::Index>(it - covariate_names.begin()));
  }

  std::vector<std::vector<double>> z_rows;
  std::vector<int> a_values, c_values;
  std::vector<std::optional<double>> y_values;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    if (strip(line).empty()) continue;
    std::vector<std::string> cells = split_line(line);
    if (cells.size() != header.size()) {
      throw SchemaError("row " + std::to_string(row) + " has " + std::to_string(cells.size()) +
                        " cells, expected " + std::to_string(header.size()));
    }
    const int a = parse_binary(cells[a_col], schema.treatment_col, row);
    const int c = parse_binary(cells[c_col], schema.missing_col, row);
    const std::string y_text = strip(cells[y_col]);
    if (c == 1 && y_text.empty()) {
      throw SchemaError("outcome missing for non-missing row " + std::to_string(row));
    }
    if (c == 0 && !y_text.empty()) {
      throw SchemaError("outcome recorded for censored row " + std::to_string(row));
    }
    std::optional<double> y;
    if (c == 1) y = parse_double(cells[y_col], schema.outcome_col, row);

    std::vector<double> z(z_cols.size());
    for (std::size_t j = 0; j < z_cols.size(); ++j) {
      z[j] = parse_double(cells[z_cols[j]], covariate_names[j], row);
    }
    z_rows.push_back(std::move(z));
    a_values.push_back(a);
    c_values.push_back(c);
    y_values.push_back(y);
    ++row;
  }
  if (row == 0) throw SchemaError("no data rows in " + path);

  Dataset data;
  data.covariates.resize(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(z_cols.size()));
  data.treatment.resize(static_cast<Eigen::Index>(row));
  data.observed.resize(static_cast<Eigen::Index>(row));
  data.outcome = std::move(y_values);
  data.heterogeneity_index = std::move(het_index);
  for (std::size_t i = 0; i < row; ++i) {
    for (std::size_t j = 0; j < z_cols.size(); ++j) {
      data.covariates(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = z_rows[i][j];
    }
    data.treatment[static_cast<Eigen::Index>(i)] = a_values[i];
    data.observed[static_cast<Eigen::Index>(i)] = c_values[i];
  }
  data.validate();
  return data;
}

void write_csv(const std::string& path, const Dataset& data, const CsvSchema& schema) {
  std::ofstream out(path);
  if (!out) throw SchemaError("cannot open file for writing: " + path);

  std::vector<std::string> covariate_names = schema.covariate_cols;
  if (static_cast<Eigen::Index>(covariate_names.size()) != data.n_cols()) {
    covariate_names.clear();
    for (Eigen::Index j = 0; j < data.n_cols(); ++j) {
      covariate_names.push_back("z" + std::to_string(j));
    }
  }
  for (const auto& name : covariate_names) out << name << ',';
  out << schema.treatment_col << ',' << schema.missing_col << ',' << schema.outcome_col << '\n';

  for (Eigen::Index i = 0; i < data.n_rows(); ++i) {
    for (Eigen::Index j = 0; j < data.n_cols(); ++j) {
      out << format_double(data.covariates(i, j)) << ',';
    }
    out << data.treatment[i] << ',' << data.observed[i] << ',';
    const auto& y = data.outcome[static_cast<std::size_t>(i)];
    if (y.has_value()) out << format_double(*y);
    out << '\n';
  }
}

}  // namespace catemiss
