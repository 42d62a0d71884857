#include "clvboost/eval.hpp"

#include <algorithm>
#include <cmath>

#include <nlohmann/json.hpp>

#include "clvboost/errors.hpp"
#include "clvboost/numerics.hpp"

namespace clvboost {

namespace {

Dataset subset_rows(const Dataset& data, const std::vector<int>& rows) {
  Dataset out;
  out.values.resize(static_cast<Index>(rows.size()), data.p());
  out.var_names = data.var_names;
  out.obs_ids.reserve(rows.size());
  if (data.response) out.response = Vector(static_cast<Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    out.values.row(static_cast<Index>(i)) = data.values.row(rows[i]);
    out.obs_ids.push_back(data.obs_ids.empty()
                              ? std::to_string(rows[i] + 1)
                              : data.obs_ids[static_cast<std::size_t>(rows[i])]);
    if (data.response) (*out.response)[static_cast<Index>(i)] = (*data.response)[rows[i]];
  }
  return out;
}

Matrix cross_product(const Matrix& x) {
  Matrix s = Matrix::Zero(x.cols(), x.cols());
  s.selfadjointView<Eigen::Lower>().rankUpdate(x.transpose());
  s.triangularView<Eigen::StrictlyUpper>() = s.transpose();
  return s;
}

Matrix gram(const Matrix& x) {
  Matrix g = Matrix::Zero(x.rows(), x.rows());
  g.selfadjointView<Eigen::Lower>().rankUpdate(x);
  g.triangularView<Eigen::StrictlyUpper>() = g.transpose();
  return g;
}

void check_folds(const Dataset& data, const FoldAssignment& folds) {
  if (static_cast<Index>(folds.fold_of.size()) != data.n())
    throw DimensionError("fold assignment length does not match the data");
  if (folds.k < 2) throw DataError("fold count must be at least 2");
  for (const int f : folds.fold_of)
    if (f < 0 || f >= folds.k) throw DataError("fold index out of range");
}

}  // namespace

double rmse(const Vector& y, const Vector& yhat) {
  if (y.size() != yhat.size() || y.size() < 1)
    throw DimensionError("rmse needs two vectors of equal positive length");
  return std::sqrt((y - yhat).squaredNorm() / static_cast<double>(y.size()));
}

std::vector<CvCurve> cross_validate_lmclv(const Dataset& data,
                                          const FoldAssignment& folds,
                                          const std::vector<double>& nu_grid,
                                          int M, ScalingMode mode,
                                          int threads) {
  if (!data.response) throw DataError("dataset has no response");
  check_folds(data, folds);
  if (nu_grid.empty()) throw DataError("empty nu grid");
  for (const double nu : nu_grid)
    if (!(nu > 0.0) || nu > 1.0) throw DataError("shrinkage nu must lie in (0, 1]");
  if (M < 1) throw DataError("iteration cap M must be at least 1");

  const int k = folds.k;
  const Index n = data.n();

  std::vector<CvCurve> curves(nu_grid.size());
  for (std::size_t ni = 0; ni < nu_grid.size(); ++ni) {
    curves[ni].nu = nu_grid[ni];
    curves[ni].rmse_cv.assign(static_cast<std::size_t>(M) + 1, 0.0);
    curves[ni].per_fold_rmse = Matrix::Zero(k, M + 1);
    curves[ni].fold_step_members.resize(static_cast<std::size_t>(k));
  }
  std::vector<std::vector<double>> pooled(
      nu_grid.size(), std::vector<double>(static_cast<std::size_t>(M) + 1, 0.0));

  for (int f = 0; f < k; ++f) {
    std::vector<int> train_rows, test_rows;
    for (Index i = 0; i < n; ++i) {
      if (folds.fold_of[static_cast<std::size_t>(i)] == f)
        test_rows.push_back(static_cast<int>(i));
      else
        train_rows.push_back(static_cast<int>(i));
    }
    if (test_rows.empty()) throw DataError("fold " + std::to_string(f) + " is empty");
    if (train_rows.size() < 3)
      throw DataError("fold " + std::to_string(f) +
                      " leaves fewer than 3 training rows");

    // Training-side artifacts never see the held-out rows.
    const Dataset train = subset_rows(data, train_rows);
    const Dataset test = subset_rows(data, test_rows);
    const Preprocessed pre = fit_preprocess(train, mode);
    const Dendrogram dendro = build_hierarchy(pre.x, threads);
    const Matrix x_test_pre = apply_preprocess(pre.params, test.values);
    const Vector& y_test = *test.response;

    for (std::size_t ni = 0; ni < nu_grid.size(); ++ni) {
      const LmClvModel model = fit_with_dendrogram(
          dendro, pre.x, pre.y, pre.params, nu_grid[ni], M, threads);

      Vector yhat = Vector::Constant(y_test.size(), pre.params.y_center);
      for (int m = 0; m <= M; ++m) {
        if (m > 0 && m <= static_cast<int>(model.steps.size())) {
          const BoostStep& step = model.steps[static_cast<std::size_t>(m - 1)];
          Vector contribution = Vector::Zero(y_test.size());
          for (std::size_t i = 0; i < step.members.size(); ++i)
            contribution += step.loadings[i] * x_test_pre.col(step.members[i]);
          yhat += model.nu * step.alpha * contribution;
        }
        const double sq = (y_test - yhat).squaredNorm();
        pooled[ni][static_cast<std::size_t>(m)] += sq;
        curves[ni].per_fold_rmse(f, m) =
            std::sqrt(sq / static_cast<double>(y_test.size()));
      }

      auto& fold_members = curves[ni].fold_step_members[static_cast<std::size_t>(f)];
      fold_members.reserve(model.steps.size());
      for (const BoostStep& step : model.steps) fold_members.push_back(step.members);
    }
  }

  for (std::size_t ni = 0; ni < nu_grid.size(); ++ni)
    for (std::size_t m = 0; m <= static_cast<std::size_t>(M); ++m)
      curves[ni].rmse_cv[m] = std::sqrt(pooled[ni][m] / static_cast<double>(n));
  return curves;
}

std::string to_string(BaselineMethod method) {
  return method == BaselineMethod::kPcr ? "pcr" : "pls1";
}

BaselineFit pcr_fit(const Matrix& x_pre, const Vector& y_pre, int ncomp) {
  const Index n = x_pre.rows();
  const Index p = x_pre.cols();
  if (n != y_pre.size()) throw DimensionError("response length mismatch");
  const int a_max = static_cast<int>(std::min<Index>(n - 1, p));
  if (ncomp < 1 || ncomp > a_max)
    throw DataError("component count out of range");

  BaselineFit fit;
  fit.method = BaselineMethod::kPcr;
  fit.beta_path.resize(p, ncomp);
  fit.scores.resize(n, ncomp);
  fit.rmse_train.assign(static_cast<std::size_t>(ncomp) + 1, 0.0);

  // Axes from whichever cross-product is smaller; eigenvalues coincide.
  EigenSystem sys;
  const bool use_gram = p > n;
  sys = sym_full_eig(SymMatrix(use_gram ? gram(x_pre) : cross_product(x_pre)), true);

  Vector residual = y_pre;
  Vector beta = Vector::Zero(p);
  fit.rmse_train[0] = std::sqrt(residual.squaredNorm() / static_cast<double>(n));
  int extracted = 0;
  for (int a = 0; a < ncomp; ++a) {
    const double lambda = sys.values[a];
    if (!(lambda > 1e-12 * std::max(1.0, sys.values[0]))) break;  // rank exhausted
    Vector axis;
    if (use_gram) {
      axis = x_pre.transpose() * sys.vectors.col(a);
      axis /= std::sqrt(lambda);
      axis.normalize();
    } else {
      axis = sys.vectors.col(a);
    }
    fix_sign_convention(axis);
    const Vector score = x_pre * axis;
    const double denom = score.squaredNorm();
    if (!(denom > 0.0)) break;
    const double theta = score.dot(residual) / denom;
    beta += theta * axis;
    residual -= theta * score;
    fit.scores.col(a) = score;
    fit.beta_path.col(a) = beta;
    fit.rmse_train[static_cast<std::size_t>(a) + 1] =
        std::sqrt(residual.squaredNorm() / static_cast<double>(n));
    extracted = a + 1;
  }
  fit.ncomp = extracted;
  fit.beta_path.conservativeResize(p, extracted);
  fit.scores.conservativeResize(n, extracted);
  fit.rmse_train.resize(static_cast<std::size_t>(extracted) + 1);
  return fit;
}

BaselineFit pls1_fit(const Matrix& x_pre, const Vector& y_pre, int ncomp) {
  const Index n = x_pre.rows();
  const Index p = x_pre.cols();
  if (n != y_pre.size()) throw DimensionError("response length mismatch");
  const int a_max = static_cast<int>(std::min<Index>(n - 1, p));
  if (ncomp < 1 || ncomp > a_max)
    throw DataError("component count out of range");

  BaselineFit fit;
  fit.method = BaselineMethod::kPls1;
  fit.beta_path.resize(p, ncomp);
  fit.scores.resize(n, ncomp);
  fit.rmse_train.assign(static_cast<std::size_t>(ncomp) + 1, 0.0);
  fit.rmse_train[0] = std::sqrt(y_pre.squaredNorm() / static_cast<double>(n));

  Matrix x = x_pre;
  Vector residual = y_pre;
  const double weight_floor = 1e-10 * (x_pre.transpose() * y_pre).norm();
  const double score_floor = 1e-12 * x_pre.norm();

  Matrix weights(p, ncomp);   // w_a
  Matrix x_loadings(p, ncomp);  // p_a
  Vector y_loadings(ncomp);   // q_a
  Matrix basis(p, ncomp);     // r_a with X_orig r_a = t_a

  Vector beta = Vector::Zero(p);
  int extracted = 0;
  for (int a = 0; a < ncomp; ++a) {
    Vector w = x.transpose() * residual;
    const double wnorm = w.norm();
    if (!(wnorm > weight_floor)) break;  // degenerate deflation
    w /= wnorm;
    Vector t = x * w;
    const double tnorm = t.norm();
    if (!(tnorm > score_floor)) break;
    t /= tnorm;
    const Vector p_load = x.transpose() * t;
    const double q = t.dot(residual);

    x -= t * p_load.transpose();
    residual -= q * t;

    // Back-transform to the undeflated block: basis solves the triangular
    // system formed by the loading/weight inner products.
    Vector r = w;
    for (int i = 0; i < a; ++i)
      r -= x_loadings.col(i).dot(w) * basis.col(i);
    r /= p_load.dot(w);

    weights.col(a) = w;
    x_loadings.col(a) = p_load;
    y_loadings[a] = q;
    basis.col(a) = r;
    fit.scores.col(a) = t;
    beta += q * r;
    fit.beta_path.col(a) = beta;
    fit.rmse_train[static_cast<std::size_t>(a) + 1] =
        std::sqrt(residual.squaredNorm() / static_cast<double>(n));
    extracted = a + 1;
  }
  fit.ncomp = extracted;
  fit.beta_path.conservativeResize(p, extracted);
  fit.scores.conservativeResize(n, extracted);
  fit.rmse_train.resize(static_cast<std::size_t>(extracted) + 1);
  return fit;
}

BaselineResult cross_validate_baseline(const Dataset& data,
                                       const FoldAssignment& folds, int ncomp,
                                       ScalingMode mode,
                                       BaselineMethod method) {
  if (!data.response) throw DataError("dataset has no response");
  check_folds(data, folds);
  if (ncomp < 1) throw DataError("component count out of range");

  auto run_fit = [&](const Matrix& x, const Vector& y, int a) {
    return method == BaselineMethod::kPcr ? pcr_fit(x, y, a) : pls1_fit(x, y, a);
  };

  BaselineResult result;
  result.method = method;

  {
    const Preprocessed pre = fit_preprocess(data, mode);
    const int a = std::min<int>(
        ncomp, static_cast<int>(std::min<Index>(data.n() - 1, data.p())));
    result.rmse_train = run_fit(pre.x, pre.y, a).rmse_train;
  }

  const Index n = data.n();
  std::vector<double> pooled(static_cast<std::size_t>(ncomp) + 1, 0.0);
  for (int f = 0; f < folds.k; ++f) {
    std::vector<int> train_rows, test_rows;
    for (Index i = 0; i < n; ++i) {
      if (folds.fold_of[static_cast<std::size_t>(i)] == f)
        test_rows.push_back(static_cast<int>(i));
      else
        train_rows.push_back(static_cast<int>(i));
    }
    if (test_rows.empty()) throw DataError("fold " + std::to_string(f) + " is empty");
    if (train_rows.size() < 3)
      throw DataError("fold " + std::to_string(f) +
                      " leaves fewer than 3 training rows");

    const Dataset train = subset_rows(data, train_rows);
    const Dataset test = subset_rows(data, test_rows);
    const Preprocessed pre = fit_preprocess(train, mode);
    const int a_fold = std::min<int>(
        ncomp, static_cast<int>(std::min<Index>(train.n() - 1, train.p())));
    const BaselineFit fit = run_fit(pre.x, pre.y, a_fold);
    const Matrix x_test_pre = apply_preprocess(pre.params, test.values);
    const Vector& y_test = *test.response;

    for (int a = 0; a <= ncomp; ++a) {
      Vector yhat = Vector::Constant(y_test.size(), pre.params.y_center);
      const int use = std::min(a, fit.ncomp);
      if (use > 0) yhat += x_test_pre * fit.beta_path.col(use - 1);
      pooled[static_cast<std::size_t>(a)] += (y_test - yhat).squaredNorm();
    }
  }
  result.rmse_cv.resize(static_cast<std::size_t>(ncomp) + 1);
  for (std::size_t a = 0; a < pooled.size(); ++a)
    result.rmse_cv[a] = std::sqrt(pooled[a] / static_cast<double>(n));
  return result;
}

std::string cv_curves_csv(const std::vector<CvCurve>& curves) {
  std::string out = "nu,m,fold,rmse\n";
  for (const CvCurve& curve : curves) {
    const Index k = curve.per_fold_rmse.rows();
    const Index m_count = curve.per_fold_rmse.cols();
    for (Index m = 0; m < m_count; ++m)
      for (Index f = 0; f < k; ++f)
        out += format_double(curve.nu) + "," + std::to_string(m) + "," +
               std::to_string(f) + "," + format_double(curve.per_fold_rmse(f, m)) +
               "\n";
  }
  return out;
}

std::string cv_summary_json(const std::vector<CvCurve>& curves, int k) {
  nlohmann::json j;
  j["k"] = k;
  nlohmann::json arr = nlohmann::json::array();
  double best = 0.0;
  double best_nu = 0.0;
  int best_m = -1;
  for (const CvCurve& curve : curves) {
    arr.push_back({{"nu", curve.nu}, {"rmse_cv", curve.rmse_cv}});
    for (std::size_t m = 0; m < curve.rmse_cv.size(); ++m) {
      if (best_m < 0 || curve.rmse_cv[m] < best) {
        best = curve.rmse_cv[m];
        best_nu = curve.nu;
        best_m = static_cast<int>(m);
      }
    }
  }
  j["curves"] = std::move(arr);
  j["argmin"] = {{"nu", best_nu}, {"m", best_m}, {"rmse_cv", best}};
  return j.dump(2) + "\n";
}

}  // namespace clvboost
