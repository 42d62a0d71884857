#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "clvboost/types.hpp"

namespace clvboost {

enum class ScalingMode {
  kCenterOnly,  // subtract the column mean
  kStandard,    // divide by the sample standard deviation
  kPareto,      // divide by the square root of the standard deviation
};

std::string to_string(ScalingMode mode);
std::optional<ScalingMode> scaling_mode_from_string(std::string_view name);

struct Dataset {
  Matrix values;                       // n x p, observations by rows
  std::vector<std::string> var_names;  // p, unique
  std::vector<std::string> obs_ids;    // n
  std::optional<Vector> response;      // length n when present

  Index n() const { return values.rows(); }
  Index p() const { return values.cols(); }
};

/// Per-variable centers and scale divisors fitted on training data and
/// reusable on new data. Divisors are strictly positive.
struct PreprocessParams {
  Vector centers;
  Vector divisors;
  ScalingMode mode = ScalingMode::kStandard;
  double y_center = 0.0;  // training mean of the response
};

struct Preprocessed {
  PreprocessParams params;
  Matrix x;  // column means 0; scaled per mode
  Vector y;  // response minus its mean
};

struct FoldAssignment {
  std::vector<int> fold_of;  // n entries in [0, k)
  int k = 0;
};

struct CsvLoad {
  Dataset data;
  std::optional<std::vector<std::string>> strata;  // set when a column was named
};

/// Reads a CSV with a mandatory header row and '.' decimal separator. A
/// leading id column is auto-detected by non-numeric content. The named
/// response/strata columns are removed from the predictor block.
CsvLoad load_csv_full(const std::string& path,
                      const std::optional<std::string>& response_column = {},
                      const std::optional<std::string>& strata_column = {});

inline Dataset load_csv(const std::string& path,
                        const std::optional<std::string>& response_column = {}) {
  return load_csv_full(path, response_column).data;
}

/// Column statistics for a centered/scaled predictor block without a
/// response (used by clustering-only runs); y_center is left at 0.
std::pair<PreprocessParams, Matrix> fit_preprocess_x(
    const Matrix& x, const std::vector<std::string>& var_names,
    ScalingMode mode);

/// Fits centers/divisors on the dataset (response required) and returns the
/// preprocessed blocks. Zero-variance predictors are a hard error.
Preprocessed fit_preprocess(const Dataset& data, ScalingMode mode);

/// (X - centers) / divisors columnwise, always with the stored training
/// parameters.
Matrix apply_preprocess(const PreprocessParams& params, const Matrix& x_new);

/// Deterministic fold assignment: a seeded shuffle followed by a round-robin
/// deal. With strata the deal runs within each stratum (strata processed in
/// sorted label order, the fold cursor carried across strata), so per-stratum
/// fold counts differ by at most one.
FoldAssignment make_folds(int n, int k,
                          const std::optional<std::vector<std::string>>& strata,
                          std::uint64_t seed);

std::string fold_assignment_to_json(const FoldAssignment& folds);

/// CSV writers: header row plus shortest round-trip number formatting.
std::string matrix_csv(const Matrix& values,
                       const std::vector<std::string>& col_names);
std::string vector_csv(const Vector& values, const std::string& col_name);

std::string format_double(double value);

void write_file(const std::string& path, const std::string& content);
std::string read_file(const std::string& path);

}  // namespace clvboost
