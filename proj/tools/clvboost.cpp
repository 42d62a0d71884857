#include <chrono>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "clvboost/boosting.hpp"
#include "clvboost/clv.hpp"
#include "clvboost/dataset.hpp"
#include "clvboost/errors.hpp"
#include "clvboost/eval.hpp"
#include "clvboost/log.hpp"
#include "clvboost/simulate.hpp"
#include "clvboost/version.hpp"
#include "manifest.hpp"

namespace fs = std::filesystem;
using clvboost::tools::Manifest;

namespace {

struct GlobalFlags {
  std::uint64_t seed = 1;
  int threads = 0;  // 0 = hardware concurrency
  std::string scale = "standard";
  std::string out;
};

clvboost::ScalingMode scale_of(const GlobalFlags& flags) {
  const auto mode = clvboost::scaling_mode_from_string(flags.scale);
  if (!mode) throw clvboost::DataError("unknown scaling mode '" + flags.scale + "'");
  return *mode;
}

std::string out_path(const GlobalFlags& flags, const std::string& name) {
  return (fs::path(flags.out) / name).string();
}

void prepare_out_dir(const GlobalFlags& flags) {
  std::error_code ec;
  fs::create_directories(flags.out, ec);
  if (ec || !fs::is_directory(flags.out))
    throw clvboost::DataError("cannot create output directory '" + flags.out + "'");
}

// JSON outputs carry a back-reference to the manifest of the run.
void write_json_output(const GlobalFlags& flags, Manifest& manifest,
                       const std::string& name, const std::string& content) {
  nlohmann::json j = nlohmann::json::parse(content);
  j["manifest"] = "manifest.json";
  clvboost::write_file(out_path(flags, name), j.dump(2) + "\n");
  manifest.outputs.push_back(name);
}

void write_csv_output(const GlobalFlags& flags, Manifest& manifest,
                      const std::string& name, const std::string& content) {
  clvboost::write_file(out_path(flags, name), content);
  manifest.outputs.push_back(name);
}

void finish_manifest(const GlobalFlags& flags, Manifest& manifest,
                     std::chrono::steady_clock::time_point start) {
  manifest.seed = flags.seed;
  manifest.wall_time_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() -
                                                start)
          .count();
  clvboost::write_file(out_path(flags, "manifest.json"), manifest.to_json());
}

std::vector<std::string> default_var_names(int p) {
  std::vector<std::string> names;
  names.reserve(static_cast<std::size_t>(p));
  for (int j = 1; j <= p; ++j) names.push_back("x" + std::to_string(j));
  return names;
}

std::string join_doubles(const std::vector<double>& values) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out += ',';
    out += clvboost::format_double(values[i]);
  }
  return out;
}

std::string join_ints(const std::vector<int>& values, char sep = ',') {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out += sep;
    out += std::to_string(values[i]);
  }
  return out;
}

// Loads predictors plus optional response/strata columns; --y takes the
// response from a separate single-column CSV instead.
clvboost::CsvLoad load_inputs(const std::string& x_path,
                              const std::optional<std::string>& response,
                              const std::optional<std::string>& strata,
                              const std::optional<std::string>& y_path,
                              Manifest& manifest) {
  if (response && y_path)
    throw clvboost::DataError("give either --response or --y, not both");
  clvboost::CsvLoad load = clvboost::load_csv_full(x_path, response, strata);
  manifest.add_input(x_path);
  if (y_path) {
    const clvboost::Dataset y_data = clvboost::load_csv(*y_path);
    manifest.add_input(*y_path);
    if (y_data.values.cols() != 1)
      throw clvboost::DataError("'" + *y_path + "' must hold exactly one column");
    if (y_data.values.rows() != load.data.values.rows())
      throw clvboost::DimensionError("response row count does not match the data");
    load.data.response = y_data.values.col(0);
  }
  return load;
}

void cmd_simulate(const GlobalFlags& flags, int n,
                  const std::vector<int>& groups, double noise_x,
                  double noise_y, const std::vector<double>& b) {
  const auto start = std::chrono::steady_clock::now();
  prepare_out_dir(flags);

  clvboost::SimulationConfig config;
  config.n = n;
  if (!groups.empty()) config.group_sizes = groups;
  config.noise_sd_x = noise_x;
  config.noise_sd_y = noise_y;
  if (!b.empty())
    config.b = Eigen::Map<const clvboost::Vector>(
        b.data(), static_cast<clvboost::Index>(b.size()));
  config.seed = flags.seed;

  const clvboost::SimulatedData sim = clvboost::simulate(config);

  Manifest manifest;
  manifest.command = "simulate";
  manifest.parameters = {{"n", std::to_string(config.n)},
                         {"groups", join_ints(config.group_sizes)},
                         {"noise_x", clvboost::format_double(noise_x)},
                         {"noise_y", clvboost::format_double(noise_y)},
                         {"threads", std::to_string(flags.threads)}};

  write_csv_output(flags, manifest, "X.csv",
                   clvboost::matrix_csv(sim.x, default_var_names(
                                                   static_cast<int>(sim.x.cols()))));
  write_csv_output(flags, manifest, "y.csv", clvboost::vector_csv(sim.y, "y"));

  nlohmann::json truth;
  truth["seed"] = config.seed;
  truth["n"] = config.n;
  truth["group_sizes"] = config.group_sizes;
  truth["b"] = std::vector<double>(config.b.size() ? config.b.data() : nullptr,
                                   config.b.size() ? config.b.data() + config.b.size()
                                                   : nullptr);
  truth["noise_sd_x"] = config.noise_sd_x;
  truth["noise_sd_y"] = config.noise_sd_y;
  truth["allocation"] = sim.allocation;
  truth["omega"] = sim.omega;
  write_json_output(flags, manifest, "truth.json", truth.dump());

  finish_manifest(flags, manifest, start);
  clvboost::log_info("simulate: wrote " + std::to_string(sim.x.rows()) + "x" +
                     std::to_string(sim.x.cols()) + " data to " + flags.out);
}

void cmd_cluster(const GlobalFlags& flags, const std::string& x_path,
                 const std::optional<std::string>& response,
                 const std::optional<std::string>& strata,
                 const std::vector<int>& ks, bool full) {
  const auto start = std::chrono::steady_clock::now();
  prepare_out_dir(flags);

  Manifest manifest;
  manifest.command = "cluster";
  const clvboost::CsvLoad load = load_inputs(x_path, response, strata, {}, manifest);
  const clvboost::Dataset& data = load.data;

  auto [params, x_pre] =
      clvboost::fit_preprocess_x(data.values, data.var_names, scale_of(flags));
  const clvboost::Dendrogram dendro = clvboost::build_hierarchy(x_pre, flags.threads);

  manifest.parameters = {{"x", x_path},
                         {"scale", flags.scale},
                         {"k", join_ints(ks)},
                         {"full", full ? "true" : "false"},
                         {"threads", std::to_string(flags.threads)}};

  write_json_output(flags, manifest, "dendrogram.json",
                    clvboost::dendrogram_to_json(dendro, full));

  for (const int k : ks) {
    const std::vector<int> part = clvboost::partition_at(dendro, k);
    std::vector<int> cluster_of(static_cast<std::size_t>(dendro.p), 0);
    for (std::size_t c = 0; c < part.size(); ++c)
      for (const int j : dendro.nodes[static_cast<std::size_t>(part[c])].members)
        cluster_of[static_cast<std::size_t>(j)] = static_cast<int>(c) + 1;
    std::string csv = "variable,cluster,node_id\n";
    for (int j = 0; j < dendro.p; ++j) {
      const int c = cluster_of[static_cast<std::size_t>(j)];
      csv += data.var_names[static_cast<std::size_t>(j)] + "," +
             std::to_string(c) + "," + std::to_string(part[static_cast<std::size_t>(c - 1)]) +
             "\n";
    }
    write_csv_output(flags, manifest, "partition_k" + std::to_string(k) + ".csv", csv);
  }

  finish_manifest(flags, manifest, start);
}

void cmd_fit(const GlobalFlags& flags, const std::string& x_path,
             const std::optional<std::string>& response,
             const std::optional<std::string>& strata,
             const std::optional<std::string>& y_path, double nu, int M) {
  const auto start = std::chrono::steady_clock::now();
  prepare_out_dir(flags);

  Manifest manifest;
  manifest.command = "fit";
  const clvboost::CsvLoad load =
      load_inputs(x_path, response, strata, y_path, manifest);
  if (!load.data.response)
    throw clvboost::DataError("fit needs a response (--response or --y)");

  const clvboost::LmClvModel model =
      clvboost::fit(load.data, nu, M, scale_of(flags), flags.threads);

  manifest.parameters = {{"x", x_path},
                         {"nu", clvboost::format_double(nu)},
                         {"M", std::to_string(M)},
                         {"scale", flags.scale},
                         {"threads", std::to_string(flags.threads)}};
  write_json_output(flags, manifest, "model.json", clvboost::model_to_json(model));
  finish_manifest(flags, manifest, start);

  const clvboost::Vector fitted = clvboost::predict(model, load.data.values);
  clvboost::log_info("fit: " + std::to_string(model.steps.size()) +
                     " steps, train rmse " +
                     clvboost::format_double(
                         clvboost::rmse(*load.data.response, fitted)));
}

void cmd_predict(const GlobalFlags& flags, const std::string& model_path,
                 const std::string& x_path) {
  const auto start = std::chrono::steady_clock::now();
  prepare_out_dir(flags);

  Manifest manifest;
  manifest.command = "predict";
  const clvboost::LmClvModel model =
      clvboost::model_from_json(clvboost::read_file(model_path));
  manifest.add_input(model_path);
  const clvboost::Dataset data = clvboost::load_csv(x_path);
  manifest.add_input(x_path);

  const clvboost::Vector yhat = clvboost::predict(model, data.values);
  manifest.parameters = {{"model", model_path}, {"x", x_path}};
  write_csv_output(flags, manifest, "yhat.csv", clvboost::vector_csv(yhat, "yhat"));
  finish_manifest(flags, manifest, start);
}

void cmd_cv(const GlobalFlags& flags, const std::string& x_path,
            const std::optional<std::string>& response,
            const std::optional<std::string>& strata,
            const std::optional<std::string>& y_path,
            const std::vector<double>& nu_grid, int M, int k) {
  const auto start = std::chrono::steady_clock::now();
  prepare_out_dir(flags);

  Manifest manifest;
  manifest.command = "cv";
  const clvboost::CsvLoad load =
      load_inputs(x_path, response, strata, y_path, manifest);
  if (!load.data.response)
    throw clvboost::DataError("cv needs a response (--response or --y)");

  const clvboost::FoldAssignment folds = clvboost::make_folds(
      static_cast<int>(load.data.n()), k, load.strata, flags.seed);
  const std::vector<clvboost::CvCurve> curves = clvboost::cross_validate_lmclv(
      load.data, folds, nu_grid, M, scale_of(flags), flags.threads);

  manifest.parameters = {{"x", x_path},
                         {"nu", join_doubles(nu_grid)},
                         {"M", std::to_string(M)},
                         {"k", std::to_string(k)},
                         {"scale", flags.scale},
                         {"strata", strata ? *strata : ""},
                         {"threads", std::to_string(flags.threads)}};
  write_csv_output(flags, manifest, "cv.csv", clvboost::cv_curves_csv(curves));
  write_json_output(flags, manifest, "cv.json",
                    clvboost::cv_summary_json(curves, folds.k));
  write_json_output(flags, manifest, "folds.json",
                    clvboost::fold_assignment_to_json(folds));
  finish_manifest(flags, manifest, start);
}

void cmd_importance(const GlobalFlags& flags, const std::string& model_path) {
  const auto start = std::chrono::steady_clock::now();
  prepare_out_dir(flags);

  Manifest manifest;
  manifest.command = "importance";
  const clvboost::LmClvModel model =
      clvboost::model_from_json(clvboost::read_file(model_path));
  manifest.add_input(model_path);

  std::string csv =
      "group,first_occurrence,occurrences,members,importance,relative_importance\n";
  const auto table = clvboost::group_importance(model);
  for (std::size_t g = 0; g < table.size(); ++g) {
    const clvboost::GroupImportance& entry = table[g];
    csv += std::to_string(g + 1) + "," + std::to_string(entry.first_occurrence) +
           "," + std::to_string(entry.occurrences) + "," +
           join_ints(entry.members, '|') + "," +
           clvboost::format_double(entry.importance) + "," +
           clvboost::format_double(entry.relative_importance) + "\n";
  }
  manifest.parameters = {{"model", model_path}};
  write_csv_output(flags, manifest, "importance.csv", csv);
  finish_manifest(flags, manifest, start);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"clvboost: variable clustering around latent components as the "
               "base-learner of an L2-boosting regression"};
  app.set_version_flag("--version", std::string(clvboost::kVersion));
  app.require_subcommand(1);

  GlobalFlags flags;
  app.add_option("--seed", flags.seed, "Seed for all randomness")
      ->capture_default_str();
  app.add_option("--threads", flags.threads,
                 "Worker thread cap (0 = hardware concurrency); results do "
                 "not depend on it")
      ->capture_default_str();
  app.add_option("--scale", flags.scale, "Scaling mode (default standard)")
      ->check(CLI::IsMember({"center", "standard", "pareto"}))
      ->capture_default_str();
  app.add_option("--out", flags.out, "Output directory")->required();

  // simulate
  auto* sim = app.add_subcommand("simulate", "Generate grouped toy data");
  sim->fallthrough();
  int sim_n = 100;
  std::vector<int> sim_groups;
  double sim_noise_x = 1.0, sim_noise_y = 1.0;
  std::vector<double> sim_b;
  sim->add_option("--n", sim_n, "Observations")->capture_default_str();
  sim->add_option("--groups", sim_groups,
                  "Comma-separated group sizes (default 35,5,10,10,10)")
      ->delimiter(',');
  sim->add_option("--noise-x", sim_noise_x, "Predictor noise sd")
      ->capture_default_str();
  sim->add_option("--noise-y", sim_noise_y, "Response noise sd")
      ->capture_default_str();
  sim->add_option("--b", sim_b, "Response coefficients (default 1,5,3,0,0)")
      ->delimiter(',');
  sim->callback([&] {
    cmd_simulate(flags, sim_n, sim_groups, sim_noise_x, sim_noise_y, sim_b);
  });

  // shared data options
  std::string x_path;
  std::string model_path;
  std::optional<std::string> response, strata, y_path;
  auto add_data_options = [&](CLI::App* cmd, bool with_response) {
    cmd->add_option("--x", x_path, "Predictor CSV")->required();
    if (with_response) {
      cmd->add_option("--response", response,
                      "Response column name inside --x");
      cmd->add_option("--y", y_path, "Single-column response CSV");
    }
    cmd->add_option("--strata", strata,
                    "Stratification column name inside --x (excluded from "
                    "the predictors)");
  };

  // cluster
  auto* cluster = app.add_subcommand("cluster", "Build the variable hierarchy");
  cluster->fallthrough();
  std::vector<int> cluster_ks;
  bool cluster_full = false;
  add_data_options(cluster, true);
  cluster->add_option("--k", cluster_ks, "Partition sizes to export")
      ->delimiter(',')
      ->check(CLI::PositiveNumber);
  cluster->add_flag("--full", cluster_full,
                    "Embed latent components in the dendrogram JSON");
  cluster->callback(
      [&] { cmd_cluster(flags, x_path, response, strata, cluster_ks, cluster_full); });

  // fit
  auto* fit = app.add_subcommand("fit", "Fit the boosted clustering model");
  fit->fallthrough();
  double fit_nu = 0.5;
  int fit_m = 50;
  add_data_options(fit, true);
  fit->add_option("--nu", fit_nu, "Shrinkage in (0, 1] (default 0.5)")
      ->check(CLI::Range(1e-9, 1.0))
      ->capture_default_str();
  fit->add_option("--M", fit_m, "Iteration cap (default 50)")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  fit->callback([&] { cmd_fit(flags, x_path, response, strata, y_path, fit_nu, fit_m); });

  // predict
  auto* predict = app.add_subcommand("predict", "Predict with a model JSON");
  predict->fallthrough();
  predict->add_option("--model", model_path, "Model JSON path")->required();
  predict->add_option("--x", x_path, "Predictor CSV")->required();
  predict->callback([&] { cmd_predict(flags, model_path, x_path); });

  // cv
  auto* cv = app.add_subcommand("cv", "Cross-validated error curves");
  cv->fallthrough();
  std::vector<double> cv_nus{0.5};
  int cv_m = 50;
  int cv_k = 5;
  add_data_options(cv, true);
  cv->add_option("--nu", cv_nus, "Comma-separated shrinkage grid")
      ->delimiter(',')
      ->check(CLI::Range(1e-9, 1.0));
  cv->add_option("--M", cv_m, "Iteration cap")->check(CLI::PositiveNumber)
      ->capture_default_str();
  cv->add_option("--k", cv_k, "Fold count")->check(CLI::Range(2, 1 << 20))
      ->capture_default_str();
  cv->callback(
      [&] { cmd_cv(flags, x_path, response, strata, y_path, cv_nus, cv_m, cv_k); });

  // importance
  auto* importance =
      app.add_subcommand("importance", "Group importance table from a model");
  importance->fallthrough();
  importance->add_option("--model", model_path, "Model JSON path")->required();
  importance->callback([&] { cmd_importance(flags, model_path); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  } catch (const clvboost::DimensionError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  } catch (const clvboost::NumericalError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 5;
  } catch (const clvboost::DataError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
