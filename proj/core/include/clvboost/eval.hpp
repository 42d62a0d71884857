#pragma once

#include <string>
#include <vector>

#include "clvboost/boosting.hpp"
#include "clvboost/dataset.hpp"
#include "clvboost/types.hpp"

namespace clvboost {

double rmse(const Vector& y, const Vector& yhat);

/// Cross-validated error curve for one shrinkage value. Index m of rmse_cv
/// is the pooled held-out RMSE after m boosting iterations; index 0 is the
/// null model (training mean of each fold).
struct CvCurve {
  double nu = 0.0;
  std::vector<double> rmse_cv;           // M+1 entries, pooled
  Matrix per_fold_rmse;                  // k x (M+1)
  // Selected member sets per fold and iteration, for stability reports.
  std::vector<std::vector<std::vector<int>>> fold_step_members;
};

/// Per fold: preprocess and build the hierarchy on the training part only,
/// fit up to M iterations for every nu, and score the held-out part at every
/// iteration count.
std::vector<CvCurve> cross_validate_lmclv(const Dataset& data,
                                          const FoldAssignment& folds,
                                          const std::vector<double>& nu_grid,
                                          int M, ScalingMode mode,
                                          int threads = 1);

enum class BaselineMethod { kPcr, kPls1 };

std::string to_string(BaselineMethod method);

/// Fitted latent-component regression path on a preprocessed block.
/// Column a-1 of beta_path holds the coefficients of the a-component model;
/// rmse_train[a] is the training error with a components (index 0 = null).
struct BaselineFit {
  BaselineMethod method = BaselineMethod::kPcr;
  int ncomp = 0;                 // components actually extracted
  Matrix beta_path;              // p x ncomp
  Matrix scores;                 // n x ncomp, pairwise orthogonal
  std::vector<double> rmse_train;
};

/// Principal-components regression: scores are projections onto the leading
/// eigenvectors of the cross-product; the response is regressed on them.
BaselineFit pcr_fit(const Matrix& x_pre, const Vector& y_pre, int ncomp);

/// Univariate-response NIPALS partial least squares with deflation of both
/// blocks. Stops early (returning fewer components) when the weight vector
/// degenerates.
BaselineFit pls1_fit(const Matrix& x_pre, const Vector& y_pre, int ncomp);

struct BaselineResult {
  BaselineMethod method = BaselineMethod::kPcr;
  std::vector<double> rmse_train;  // on the full dataset, index 0 = null
  std::vector<double> rmse_cv;     // pooled, index 0 = null
};

BaselineResult cross_validate_baseline(const Dataset& data,
                                       const FoldAssignment& folds, int ncomp,
                                       ScalingMode mode,
                                       BaselineMethod method);

/// Plot-ready outputs: "nu,m,fold,rmse" rows and a JSON summary carrying the
/// pooled curves and the (nu, m) argmin.
std::string cv_curves_csv(const std::vector<CvCurve>& curves);
std::string cv_summary_json(const std::vector<CvCurve>& curves, int k);

}  // namespace clvboost
