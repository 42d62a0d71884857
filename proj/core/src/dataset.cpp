#include "clvboost/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <system_error>

#include <nlohmann/json.hpp>

#include "clvboost/errors.hpp"
#include "clvboost/rng.hpp"

namespace clvboost {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t'))
    s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
    s.remove_suffix(1);
  return s;
}

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> cells;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string::npos) {
      cells.emplace_back(trim(std::string_view(line).substr(start)));
      break;
    }
    cells.emplace_back(trim(std::string_view(line).substr(start, comma - start)));
    start = comma + 1;
  }
  return cells;
}

bool parse_double(std::string_view cell, double& out) {
  if (cell.empty()) return false;
  const char* begin = cell.data();
  const char* end = begin + cell.size();
  const auto result = std::from_chars(begin, end, out);
  if (result.ec != std::errc() || result.ptr != end) return false;
  return std::isfinite(out);
}

}  // namespace

std::string to_string(ScalingMode mode) {
  switch (mode) {
    case ScalingMode::kCenterOnly: return "center";
    case ScalingMode::kStandard: return "standard";
    case ScalingMode::kPareto: return "pareto";
  }
  return "standard";
}

std::optional<ScalingMode> scaling_mode_from_string(std::string_view name) {
  if (name == "center") return ScalingMode::kCenterOnly;
  if (name == "standard") return ScalingMode::kStandard;
  if (name == "pareto") return ScalingMode::kPareto;
  return std::nullopt;
}

CsvLoad load_csv_full(const std::string& path,
                      const std::optional<std::string>& response_column,
                      const std::optional<std::string>& strata_column) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open file '" + path + "'");

  std::vector<std::vector<std::string>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    rows.push_back(split_line(line));
  }
  if (rows.empty()) throw DataError("empty CSV file '" + path + "'");

  const std::vector<std::string> header = rows.front();
  const std::size_t ncols = header.size();
  for (std::size_t r = 1; r < rows.size(); ++r)
    if (rows[r].size() != ncols)
      throw DataError("row " + std::to_string(r) + " of '" + path + "' has " +
                      std::to_string(rows[r].size()) + " cells, expected " +
                      std::to_string(ncols));
  const std::size_t nrows = rows.size() - 1;
  if (nrows < 2) throw DataError("'" + path + "' has fewer than 2 data rows");

  auto column_index = [&](const std::string& name) -> std::optional<std::size_t> {
    for (std::size_t c = 0; c < ncols; ++c)
      if (header[c] == name) return c;
    return std::nullopt;
  };

  std::optional<std::size_t> strata_col;
  if (strata_column) {
    strata_col = column_index(*strata_column);
    if (!strata_col)
      throw DataError("strata column '" + *strata_column + "' not found");
  }
  std::optional<std::size_t> response_col;
  if (response_column) {
    response_col = column_index(*response_column);
    if (!response_col)
      throw DataError("response column '" + *response_column + "' not found");
    if (strata_col && *strata_col == *response_col)
      throw DataError("response and strata name the same column");
  }

  // Leading id column: auto-detected by non-numeric content, unless that
  // column is already claimed as response or strata.
  std::optional<std::size_t> id_col;
  if ((!strata_col || *strata_col != 0) && (!response_col || *response_col != 0)) {
    double unused;
    for (std::size_t r = 1; r <= nrows; ++r) {
      if (!parse_double(rows[r][0], unused)) {
        id_col = 0;
        break;
      }
    }
  }

  std::vector<std::size_t> predictor_cols;
  for (std::size_t c = 0; c < ncols; ++c) {
    if (id_col && c == *id_col) continue;
    if (strata_col && c == *strata_col) continue;
    if (response_col && c == *response_col) continue;
    predictor_cols.push_back(c);
  }
  if (predictor_cols.empty())
    throw DataError("'" + path + "' has no predictor columns");

  CsvLoad out;
  Dataset& data = out.data;
  data.values.resize(static_cast<Index>(nrows),
                     static_cast<Index>(predictor_cols.size()));
  data.var_names.reserve(predictor_cols.size());
  std::set<std::string> seen;
  for (const std::size_t c : predictor_cols) {
    if (!seen.insert(header[c]).second)
      throw DataError("duplicate variable name '" + header[c] + "'");
    data.var_names.push_back(header[c]);
  }

  for (std::size_t r = 1; r <= nrows; ++r) {
    for (std::size_t k = 0; k < predictor_cols.size(); ++k) {
      const std::size_t c = predictor_cols[k];
      double value;
      if (!parse_double(rows[r][c], value))
        throw DataError("non-numeric cell at row " + std::to_string(r) +
                        ", column '" + header[c] + "'");
      data.values(static_cast<Index>(r - 1), static_cast<Index>(k)) = value;
    }
  }

  if (response_col) {
    Vector y(static_cast<Index>(nrows));
    for (std::size_t r = 1; r <= nrows; ++r) {
      double value;
      if (!parse_double(rows[r][*response_col], value))
        throw DataError("non-numeric cell at row " + std::to_string(r) +
                        ", column '" + header[*response_col] + "'");
      y[static_cast<Index>(r - 1)] = value;
    }
    data.response = std::move(y);
  }

  if (strata_col) {
    std::vector<std::string> labels;
    labels.reserve(nrows);
    for (std::size_t r = 1; r <= nrows; ++r) labels.push_back(rows[r][*strata_col]);
    out.strata = std::move(labels);
  }

  data.obs_ids.reserve(nrows);
  for (std::size_t r = 1; r <= nrows; ++r)
    data.obs_ids.push_back(id_col ? rows[r][*id_col] : std::to_string(r));

  return out;
}

std::pair<PreprocessParams, Matrix> fit_preprocess_x(
    const Matrix& x, const std::vector<std::string>& var_names,
    ScalingMode mode) {
  const Index n = x.rows();
  const Index p = x.cols();
  if (n < 2) throw DataError("need at least 2 observations");
  if (p < 1) throw DataError("need at least 1 predictor");

  PreprocessParams params;
  params.mode = mode;
  params.centers.resize(p);
  params.divisors.resize(p);
  Matrix pre(n, p);
  for (Index j = 0; j < p; ++j) {
    const double mean = x.col(j).mean();
    Vector centered = x.col(j).array() - mean;
    const double variance =
        centered.squaredNorm() / static_cast<double>(n - 1);
    if (!(variance > 0.0)) {
      const std::string name = j < static_cast<Index>(var_names.size())
                                   ? var_names[static_cast<std::size_t>(j)]
                                   : std::to_string(j);
      throw DataError("zero-variance column '" + name + "'");
    }
    double divisor = 1.0;
    if (mode == ScalingMode::kStandard) divisor = std::sqrt(variance);
    if (mode == ScalingMode::kPareto) divisor = std::sqrt(std::sqrt(variance));
    params.centers[j] = mean;
    params.divisors[j] = divisor;
    pre.col(j) = centered / divisor;
  }
  return {std::move(params), std::move(pre)};
}

Preprocessed fit_preprocess(const Dataset& data, ScalingMode mode) {
  if (!data.response) throw DataError("dataset has no response");
  if (data.response->size() != data.n())
    throw DimensionError("response length does not match the data");

  Preprocessed out;
  auto [params, x] = fit_preprocess_x(data.values, data.var_names, mode);
  out.params = std::move(params);
  out.x = std::move(x);
  out.params.y_center = data.response->mean();
  out.y = data.response->array() - out.params.y_center;
  return out;
}

Matrix apply_preprocess(const PreprocessParams& params, const Matrix& x_new) {
  if (x_new.cols() != params.centers.size())
    throw DimensionError("matrix has " + std::to_string(x_new.cols()) +
                         " columns, preprocessing expects " +
                         std::to_string(params.centers.size()));
  Matrix out(x_new.rows(), x_new.cols());
  for (Index j = 0; j < x_new.cols(); ++j)
    out.col(j) = (x_new.col(j).array() - params.centers[j]) / params.divisors[j];
  return out;
}

FoldAssignment make_folds(int n, int k,
                          const std::optional<std::vector<std::string>>& strata,
                          std::uint64_t seed) {
  if (k < 2) throw DataError("fold count must be at least 2");
  if (k > n) throw DataError("fold count exceeds the number of observations");
  if (strata && static_cast<int>(strata->size()) != n)
    throw DimensionError("strata length does not match the data");

  // Strata in sorted label order; one shared generator and a fold cursor
  // carried across strata keep every fold non-empty.
  std::map<std::string, std::vector<int>> groups;
  if (strata) {
    for (int i = 0; i < n; ++i)
      groups[(*strata)[static_cast<std::size_t>(i)]].push_back(i);
  } else {
    auto& all = groups[""];
    all.resize(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) all[static_cast<std::size_t>(i)] = i;
  }

  Xoshiro256pp rng(seed);
  FoldAssignment folds;
  folds.k = k;
  folds.fold_of.assign(static_cast<std::size_t>(n), -1);
  int cursor = 0;
  for (auto& [label, idx] : groups) {
    for (std::size_t i = idx.size(); i > 1; --i) {
      const std::size_t j = static_cast<std::size_t>(rng.below(i));
      std::swap(idx[i - 1], idx[j]);
    }
    for (const int obs : idx) {
      folds.fold_of[static_cast<std::size_t>(obs)] = cursor % k;
      ++cursor;
    }
  }
  return folds;
}

std::string fold_assignment_to_json(const FoldAssignment& folds) {
  nlohmann::json j;
  j["k"] = folds.k;
  j["fold_of"] = folds.fold_of;
  return j.dump(2) + "\n";
}

std::string format_double(double value) {
  char buf[40];
  const auto result = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, result.ptr);
}

std::string matrix_csv(const Matrix& values,
                       const std::vector<std::string>& col_names) {
  if (static_cast<Index>(col_names.size()) != values.cols())
    throw DimensionError("column name count does not match the matrix");
  std::string out;
  for (std::size_t c = 0; c < col_names.size(); ++c) {
    if (c) out += ',';
    out += col_names[c];
  }
  out += '\n';
  for (Index i = 0; i < values.rows(); ++i) {
    for (Index j = 0; j < values.cols(); ++j) {
      if (j) out += ',';
      out += format_double(values(i, j));
    }
    out += '\n';
  }
  return out;
}

std::string vector_csv(const Vector& values, const std::string& col_name) {
  std::string out = col_name + "\n";
  for (Index i = 0; i < values.size(); ++i) out += format_double(values[i]) + "\n";
  return out;
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write file '" + path + "'");
  out << content;
  if (!out) throw DataError("failed writing file '" + path + "'");
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace clvboost
