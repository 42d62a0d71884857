#pragma once

#include <optional>
#include <string>
#include <vector>

#include "clvboost/clv.hpp"
#include "clvboost/dataset.hpp"
#include "clvboost/types.hpp"

namespace clvboost {

struct BoostStep {
  int iteration = 0;             // 1-based
  int node_id = -1;
  double alpha = 0.0;            // OLS coefficient of the unit-norm component
  double correlation = 0.0;      // cor(component, residuals) at selection
  double rss_before = 0.0;
  double rss_after = 0.0;
  double var_before = 0.0;       // sample variance of the residuals
  double var_after = 0.0;
  std::vector<int> members;      // selected node's members
  std::vector<double> loadings;  // aligned with members (in-memory only)
};

struct GroupImportance {
  std::vector<int> members;
  double importance = 0.0;           // summed residual-variance decrease
  double relative_importance = 0.0;  // importance / var(y)
  int first_occurrence = 0;          // iteration of first selection
  int occurrences = 0;
};

struct LmClvModel {
  double nu = 0.5;
  int M = 50;
  ScalingMode mode = ScalingMode::kStandard;
  PreprocessParams preprocess;
  std::vector<BoostStep> steps;
  Vector beta_pre;        // coefficients on the preprocessed scale
  Vector beta_raw;        // beta_pre / divisors
  double intercept_raw = 0.0;
  double y_variance = 0.0;
  std::vector<GroupImportance> importance;  // sorted by first occurrence

  Index p() const { return beta_raw.size(); }
};

struct BaseLearnerPick {
  int node_id = -1;
  double correlation = 0.0;  // signed cor(component, residuals)
};

/// Dendrogram base-learner: per partition level picks the active node whose
/// component best correlates (in absolute value) with the residuals, then
/// returns the largest of those per-level winners that passes the
/// Kaiser-Guttman unidimensionality test. Some singleton always qualifies.
BaseLearnerPick base_learner(const Dendrogram& d, const Vector& residuals,
                             int threads = 1);

/// Boosting loop on an already preprocessed block with a prebuilt hierarchy
/// (the cross-validation path re-enters here without rebuilding).
LmClvModel fit_with_dendrogram(const Dendrogram& d, const Matrix& x_pre,
                               const Vector& y_pre,
                               const PreprocessParams& params, double nu,
                               int M, int threads = 1);

/// Full pipeline: preprocess, build the hierarchy once, then run up to M
/// boosting iterations with shrinkage nu.
LmClvModel fit(const Dataset& data, double nu, int M, ScalingMode mode,
               int threads = 1);

/// intercept + X beta on the original scale.
Vector predict(const LmClvModel& model, const Matrix& x_new);

/// Equivalent prediction through the per-step components:
/// y_center + sum_m nu alpha_m (preprocessed X restricted to members) v_m.
Vector predict_by_steps(const LmClvModel& model, const Matrix& x_new,
                        std::optional<int> upto = {});

/// Coefficients of the partial model after `upto` steps (default all);
/// variables never selected have coefficient exactly zero.
std::pair<Vector, double> coefficients(const LmClvModel& model,
                                       std::optional<int> upto = {});

/// Importance table keyed by canonical member set, sorted by first
/// occurrence.
std::vector<GroupImportance> group_importance(const LmClvModel& model);

std::string model_to_json(const LmClvModel& model);
LmClvModel model_from_json(const std::string& text);

}  // namespace clvboost
