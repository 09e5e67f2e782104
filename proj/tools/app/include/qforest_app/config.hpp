#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "qforest/data.hpp"
#include "qforest/qsim.hpp"
#include "qforest/tree.hpp"

namespace qforest::app {

/// Schema violation; the message starts with the offending field path.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& path, const std::string& what)
      : std::runtime_error(path + ": " + what), path_(path) {}
  const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
};

enum class ModelKind { Qrf, Qsvm, Crf, RbfSvm };

std::string to_string(ModelKind m);

struct GeneratorConfig {
  std::string kind;  // uniform | blobs | dlp
  std::size_t n = 200;
  std::size_t dim = 4;
  std::size_t classes = 2;
  double spread = 0.15;
  std::optional<std::uint64_t> seed;  // default: the run seed
  DlpConcept dlp;
};

struct DataConfig {
  std::optional<std::filesystem::path> path;
  std::optional<GeneratorConfig> generator;
  double split = 0.6;
};

struct PreprocessConfig {
  std::size_t pca_dim = 0;  // 0 = keep all features
  bool normalize = true;
};

struct RelabelConfig {
  std::string strategy = "none";  // none | qk | qrf
  std::optional<EmbeddingSpec> embedding;  // defaults to the first model embedding
  double noise = 0.1;
  std::optional<double> gamma;  // RBF gamma for qk; default 1 / D
};

struct HyperConfig {
  std::size_t trees = 5;
  int depth = 4;
  std::size_t min_split = 2;
  std::optional<std::size_t> partition_size;  // default: all training points
  std::vector<std::size_t> landmarks{10};       // per depth, last repeats
  std::vector<EmbeddingSpec> embeddings;        // per depth, last repeats
  double C = 1.0;
  double c_growth = 10.0;
  int max_retries = 5;
  double ig_threshold = 0.0;
  std::uint64_t shots = 0;  // 0 = exact kernel
  PseudoStrategy strategy = PseudoStrategy::EvenSplit;
  std::optional<double> gamma;  // RBF-SVM; default 1 / D
  double tol = 1e-6;
  int max_passes = 200;
};

struct ExperimentConfig {
  ModelKind model = ModelKind::Qrf;
  DataConfig data;
  PreprocessConfig preprocess;
  RelabelConfig relabel;
  HyperConfig hyper;
  std::vector<std::uint64_t> seeds{0};
  std::filesystem::path outputs = "out";

  /// Per-depth schedule for the quantum tree (length = max(#L, #embeddings)).
  std::vector<DepthParams> schedule() const;
};

/// Strict parse: unknown keys and type errors raise ConfigError.
ExperimentConfig parse_config(const nlohmann::json& j);
ExperimentConfig load_config(const std::filesystem::path& path);

/// Canonical JSON form (all defaults filled in).
nlohmann::json to_json(const ExperimentConfig& c);

/// Parses "iqp:4", "hea:4", "hea:4:2", "dlp:59:2:4:2".
EmbeddingSpec parse_embedding_string(const std::string& s);

/// Applies a sweep value to the named hyperparameter (L, M, C, d, T, N_p).
void apply_parameter(ExperimentConfig& c, const std::string& param, double value);

}  // namespace qforest::app
