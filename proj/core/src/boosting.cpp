#include "clvboost/boosting.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include <nlohmann/json.hpp>

#include "clvboost/errors.hpp"
#include "clvboost/numerics.hpp"
#include "clvboost/parallel.hpp"

namespace clvboost {

namespace {

constexpr double kResidualStopFactor = 1e-10;  // of sd(y)

std::vector<GroupImportance> importance_from_steps(
    const std::vector<BoostStep>& steps, double y_variance) {
  std::map<std::vector<int>, GroupImportance> table;
  for (const BoostStep& step : steps) {
    auto [it, fresh] = table.try_emplace(step.members);
    GroupImportance& entry = it->second;
    if (fresh) {
      entry.members = step.members;
      entry.first_occurrence = step.iteration;
    }
    entry.importance += step.var_before - step.var_after;
    entry.occurrences += 1;
  }
  std::vector<GroupImportance> out;
  out.reserve(table.size());
  for (auto& [members, entry] : table) {
    if (y_variance > 0.0) entry.relative_importance = entry.importance / y_variance;
    out.push_back(std::move(entry));
  }
  std::sort(out.begin(), out.end(), [](const GroupImportance& a,
                                       const GroupImportance& b) {
    return a.first_occurrence < b.first_occurrence;
  });
  return out;
}

Vector step_contribution(const Matrix& x_pre, const BoostStep& step) {
  Vector out = Vector::Zero(x_pre.rows());
  for (std::size_t i = 0; i < step.members.size(); ++i)
    out += step.loadings[i] * x_pre.col(step.members[i]);
  return out;
}

}  // namespace

BaseLearnerPick base_learner(const Dendrogram& d, const Vector& residuals,
                             int threads) {
  if (residuals.size() != d.n)
    throw DimensionError("residual length does not match the hierarchy");
  if (!(sample_sd(residuals) > 0.0))
    throw NumericalError("zero-variance residuals");

  const int p = d.p;
  const std::size_t node_count = d.nodes.size();
  std::vector<double> cor(node_count);
  parallel_for(node_count, threads, [&](std::size_t begin, std::size_t end) {
    for (std::size_t v = begin; v < end; ++v)
      cor[v] = pearson_cor(d.nodes[v].component, residuals);
  });

  // Active range of node v over the merge counter: [birth, death).
  std::vector<int> birth(node_count), death(node_count);
  for (std::size_t v = 0; v < node_count; ++v) {
    const int id = d.nodes[v].id;
    birth[v] = id < p ? 0 : id - (p - 1);
    const int parent = d.parent[v];
    death[v] = parent < 0 ? p : parent - (p - 1);
  }

  // Per partition level: the active node with the largest |cor|
  // (ties: larger group, then smaller id).
  std::vector<int> winners;
  winners.reserve(static_cast<std::size_t>(p));
  for (int level = 1; level <= p; ++level) {
    const int applied = p - level;
    int best = -1;
    for (std::size_t v = 0; v < node_count; ++v) {
      if (birth[v] > applied || applied >= death[v]) continue;
      if (best < 0) {
        best = static_cast<int>(v);
        continue;
      }
      const double a = std::abs(cor[v]);
      const double b = std::abs(cor[static_cast<std::size_t>(best)]);
      const int size_v = d.nodes[v].size();
      const int size_b = d.nodes[static_cast<std::size_t>(best)].size();
      if (a > b || (a == b && (size_v > size_b ||
                               (size_v == size_b &&
                                d.nodes[v].id < d.nodes[static_cast<std::size_t>(best)].id))))
        best = static_cast<int>(v);
    }
    winners.push_back(best);
  }

  // Largest unidimensional winner; the level-p winner is a singleton and
  // singletons always qualify, so a pick exists.
  int pick = -1;
  for (const int w : winners) {
    const ClusterNode& node = d.nodes[static_cast<std::size_t>(w)];
    if (!kg_unidimensional(node, p)) continue;
    if (pick < 0) {
      pick = w;
      continue;
    }
    const ClusterNode& best = d.nodes[static_cast<std::size_t>(pick)];
    const double a = std::abs(cor[static_cast<std::size_t>(w)]);
    const double b = std::abs(cor[static_cast<std::size_t>(pick)]);
    if (node.size() > best.size() ||
        (node.size() == best.size() &&
         (a > b || (a == b && node.id < best.id))))
      pick = w;
  }

  return {d.nodes[static_cast<std::size_t>(pick)].id,
          cor[static_cast<std::size_t>(pick)]};
}

LmClvModel fit_with_dendrogram(const Dendrogram& d, const Matrix& x_pre,
                               const Vector& y_pre,
                               const PreprocessParams& params, double nu,
                               int M, int threads) {
  if (!(nu > 0.0) || nu > 1.0)
    throw DataError("shrinkage nu must lie in (0, 1]");
  if (M < 1) throw DataError("iteration cap M must be at least 1");
  if (x_pre.rows() != y_pre.size())
    throw DimensionError("response length does not match the data");

  LmClvModel model;
  model.nu = nu;
  model.M = M;
  model.mode = params.mode;
  model.preprocess = params;
  model.beta_pre = Vector::Zero(x_pre.cols());
  model.y_variance = sample_variance(y_pre);

  Vector e = y_pre;
  const double sd_y = sample_sd(y_pre);
  if (sd_y > 0.0) {
    for (int m = 1; m <= M; ++m) {
      if (sample_sd(e) < kResidualStopFactor * sd_y) break;
      const BaseLearnerPick pick = base_learner(d, e, threads);
      const ClusterNode& node = d.nodes[static_cast<std::size_t>(pick.node_id)];

      BoostStep step;
      step.iteration = m;
      step.node_id = pick.node_id;
      step.correlation = pick.correlation;
      step.alpha = node.component.dot(e);  // OLS: the component has unit norm
      step.members = node.members;
      step.loadings = node.loadings;
      step.rss_before = e.squaredNorm();
      step.var_before = sample_variance(e);
      e -= nu * step.alpha * node.component;
      step.rss_after = e.squaredNorm();
      step.var_after = sample_variance(e);

      for (std::size_t i = 0; i < step.members.size(); ++i)
        model.beta_pre[step.members[i]] += nu * step.alpha * step.loadings[i];
      model.steps.push_back(std::move(step));
    }
  }

  model.beta_raw = model.beta_pre.array() / params.divisors.array();
  model.intercept_raw = params.y_center - model.beta_raw.dot(params.centers);
  model.importance = importance_from_steps(model.steps, model.y_variance);
  return model;
}

LmClvModel fit(const Dataset& data, double nu, int M, ScalingMode mode,
               int threads) {
  Preprocessed pre = fit_preprocess(data, mode);
  Dendrogram d = build_hierarchy(pre.x, threads);
  return fit_with_dendrogram(d, pre.x, pre.y, pre.params, nu, M, threads);
}

Vector predict(const LmClvModel& model, const Matrix& x_new) {
  if (x_new.cols() != model.p())
    throw DimensionError("matrix has " + std::to_string(x_new.cols()) +
                         " columns, model expects " + std::to_string(model.p()));
  return (x_new * model.beta_raw).array() + model.intercept_raw;
}

Vector predict_by_steps(const LmClvModel& model, const Matrix& x_new,
                        std::optional<int> upto) {
  const int count = upto ? *upto : static_cast<int>(model.steps.size());
  if (count < 0 || count > model.M)
    throw DataError("step count out of range");
  const Matrix x_pre = apply_preprocess(model.preprocess, x_new);
  Vector yhat = Vector::Constant(x_new.rows(), model.preprocess.y_center);
  for (int m = 0; m < count && m < static_cast<int>(model.steps.size()); ++m) {
    const BoostStep& step = model.steps[static_cast<std::size_t>(m)];
    if (step.loadings.size() != step.members.size())
      throw DataError("model steps carry no loadings (serialized model?)");
    yhat += model.nu * step.alpha * step_contribution(x_pre, step);
  }
  return yhat;
}

std::pair<Vector, double> coefficients(const LmClvModel& model,
                                       std::optional<int> upto) {
  if (!upto || *upto >= static_cast<int>(model.steps.size()))
    return {model.beta_raw, model.intercept_raw};
  if (*upto < 0) throw DataError("step count out of range");

  Vector beta_pre = Vector::Zero(model.p());
  for (int m = 0; m < *upto; ++m) {
    const BoostStep& step = model.steps[static_cast<std::size_t>(m)];
    if (step.loadings.size() != step.members.size())
      throw DataError("model steps carry no loadings (serialized model?)");
    for (std::size_t i = 0; i < step.members.size(); ++i)
      beta_pre[step.members[i]] += model.nu * step.alpha * step.loadings[i];
  }
  Vector beta_raw = beta_pre.array() / model.preprocess.divisors.array();
  const double intercept =
      model.preprocess.y_center - beta_raw.dot(model.preprocess.centers);
  return {std::move(beta_raw), intercept};
}

std::vector<GroupImportance> group_importance(const LmClvModel& model) {
  return model.importance;
}

std::string model_to_json(const LmClvModel& model) {
  nlohmann::json j;
  j["nu"] = model.nu;
  j["M"] = model.M;
  j["mode"] = to_string(model.mode);
  j["centers"] = std::vector<double>(model.preprocess.centers.data(),
                                     model.preprocess.centers.data() +
                                         model.preprocess.centers.size());
  j["divisors"] = std::vector<double>(model.preprocess.divisors.data(),
                                      model.preprocess.divisors.data() +
                                          model.preprocess.divisors.size());
  j["y_center"] = model.preprocess.y_center;
  nlohmann::json steps = nlohmann::json::array();
  for (const BoostStep& step : model.steps) {
    steps.push_back({{"iteration", step.iteration},
                     {"node_id", step.node_id},
                     {"members", step.members},
                     {"alpha", step.alpha},
                     {"correlation", step.correlation},
                     {"rss_drop", step.rss_before - step.rss_after}});
  }
  j["steps"] = std::move(steps);
  j["beta_raw"] = std::vector<double>(model.beta_raw.data(),
                                      model.beta_raw.data() + model.beta_raw.size());
  j["intercept_raw"] = model.intercept_raw;
  nlohmann::json importance = nlohmann::json::array();
  for (const GroupImportance& g : model.importance) {
    importance.push_back({{"members", g.members},
                          {"importance", g.importance},
                          {"relative_importance", g.relative_importance},
                          {"first_occurrence", g.first_occurrence},
                          {"occurrences", g.occurrences}});
  }
  j["importance"] = std::move(importance);
  return j.dump(2) + "\n";
}

LmClvModel model_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("invalid model JSON: ") + e.what());
  }
  try {
    LmClvModel model;
    model.nu = j.at("nu").get<double>();
    model.M = j.at("M").get<int>();
    const auto mode = scaling_mode_from_string(j.at("mode").get<std::string>());
    if (!mode) throw DataError("unknown scaling mode in model JSON");
    model.mode = *mode;
    const auto centers = j.at("centers").get<std::vector<double>>();
    const auto divisors = j.at("divisors").get<std::vector<double>>();
    model.preprocess.mode = *mode;
    model.preprocess.centers = Eigen::Map<const Vector>(
        centers.data(), static_cast<Index>(centers.size()));
    model.preprocess.divisors = Eigen::Map<const Vector>(
        divisors.data(), static_cast<Index>(divisors.size()));
    model.preprocess.y_center = j.at("y_center").get<double>();
    for (const auto& item : j.at("steps")) {
      BoostStep step;
      step.iteration = item.at("iteration").get<int>();
      step.node_id = item.at("node_id").get<int>();
      step.members = item.at("members").get<std::vector<int>>();
      step.alpha = item.at("alpha").get<double>();
      step.correlation = item.at("correlation").get<double>();
      step.rss_before = item.at("rss_drop").get<double>();  // only the drop survives
      step.rss_after = 0.0;
      model.steps.push_back(std::move(step));
    }
    const auto beta = j.at("beta_raw").get<std::vector<double>>();
    model.beta_raw =
        Eigen::Map<const Vector>(beta.data(), static_cast<Index>(beta.size()));
    model.beta_pre =
        model.beta_raw.array() * model.preprocess.divisors.array();
    model.intercept_raw = j.at("intercept_raw").get<double>();
    for (const auto& item : j.at("importance")) {
      GroupImportance g;
      g.members = item.at("members").get<std::vector<int>>();
      g.importance = item.at("importance").get<double>();
      g.relative_importance = item.at("relative_importance").get<double>();
      g.first_occurrence = item.at("first_occurrence").get<int>();
      g.occurrences = item.at("occurrences").get<int>();
      model.importance.push_back(std::move(g));
    }
    return model;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("invalid model JSON: ") + e.what());
  }
}

}  // namespace clvboost
