#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "qforest/data.hpp"
#include "qforest_app/config.hpp"

namespace qforest::app {

struct PreparedData {
  Dataset train;
  Dataset test;
  std::size_t num_classes = 2;
  std::vector<std::string> warnings;
};

/// Load or generate, PCA, normalise, relabel, then split; all keyed by seed.
PreparedData prepare_data(const ExperimentConfig& config, std::uint64_t seed);

struct RunResult {
  std::uint64_t seed = 0;
  double train_accuracy = 0.0;
  double test_accuracy = 0.0;
  std::optional<double> sigma;
  std::size_t unique_estimations = 0;
  std::size_t kernel_requests = 0;
  std::optional<double> tree_correlation;
  std::size_t n_train = 0;
  std::size_t n_test = 0;
  nlohmann::json nodes = nlohmann::json::array();
  std::optional<double> spectral_error;
  nlohmann::json model;
  std::vector<std::string> warnings;
};

/// Trains and evaluates one seed. `spectral` adds the Nystrom kernel error
/// on the training set for quantum models.
RunResult run_experiment(const ExperimentConfig& config, std::uint64_t seed, std::size_t threads,
                         bool spectral = false);

/// Runs every seed (in parallel) and returns results in seed order.
std::vector<RunResult> run_all(const ExperimentConfig& config, std::size_t threads, bool spectral = false);

nlohmann::json make_report(const ExperimentConfig& config, const std::vector<RunResult>& runs,
                           double wall_time_s);
nlohmann::json make_model_file(const ExperimentConfig& config, const std::vector<RunResult>& runs);

/// Serialised form used for report files: sorted keys, two-space indent.
std::string dump(const nlohmann::json& j);

/// Writes model.json and report.json into `out_dir`; returns the report.
nlohmann::json cmd_train(const ExperimentConfig& config, const std::filesystem::path& out_dir, std::size_t threads);

/// Accuracy of every stored model on a labelled CSV.
nlohmann::json cmd_eval(const std::filesystem::path& model_path, const std::filesystem::path& data_path,
                        std::optional<std::uint64_t> seed);

/// Tidy CSV: one row per (value, seed) plus mean and std rows per value.
std::string cmd_sweep(const ExperimentConfig& config, const std::string& param, const std::vector<double>& values,
                      std::size_t threads);

struct RelabelOptions {
  std::string strategy = "qrf";
  EmbeddingSpec embedding = EmbeddingSpec::iqp(4);
  std::size_t pca_dim = 0;  // 0 = reduce to the embedding input dimension when needed
  double noise = 0.1;
  std::optional<double> gamma;
  std::uint64_t seed = 0;
};

Dataset cmd_relabel(const Dataset& input, const RelabelOptions& options, std::vector<std::string>& warnings);

Dataset cmd_gen_dlp(const DlpConcept& dlp, std::size_t n, std::uint64_t seed);

std::vector<double> parse_values(const std::string& csv);

}  // namespace qforest::app
