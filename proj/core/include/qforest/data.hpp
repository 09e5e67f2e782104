#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "qforest/qsim.hpp"
#include "qforest/rng.hpp"

namespace qforest {

struct DatasetMeta {
  std::vector<std::string> feature_names;
  std::size_t pca_components = 0;     // 0 when no PCA was applied
  std::vector<double> feature_min;    // from normalisation, if applied
  std::vector<double> feature_max;
  std::vector<std::string> comments;  // provenance lines, without the leading '#'
};

struct Dataset {
  Eigen::MatrixXd features;
  std::vector<int> labels;
  DatasetMeta meta;

  std::size_t size() const { return labels.size(); }
  std::size_t dim() const { return static_cast<std::size_t>(features.cols()); }
  /// max label + 1 (0 for an empty set).
  std::size_t num_classes() const;
  Dataset subset(const std::vector<std::size_t>& ids) const;
};

/// Header row of feature names ending in a `label` column; '#' lines are
/// comments. Throws ParseError naming the offending line.
Dataset parse_csv(const std::string& text);
Dataset load_csv(const std::filesystem::path& path);

/// Comments first (as '# ' lines), then header and rows. Values are written
/// in shortest round-trip form.
std::string to_csv(const Dataset& data);
void save_csv(const Dataset& data, const std::filesystem::path& path);

struct PcaResult {
  Eigen::MatrixXd projected;   // N x D
  Eigen::MatrixXd components;  // original_dim x D, columns by descending variance
  Eigen::VectorXd variances;   // eigenvalues of the covariance, descending (all of them)
  Eigen::VectorXd mean;
};

/// Projection of mean-centred data on the top-D covariance eigenvectors.
/// Each component is signed so its largest-magnitude entry is positive.
PcaResult pca(const Eigen::MatrixXd& X, std::size_t target_dim);
Eigen::MatrixXd pca_reduce(const Eigen::MatrixXd& X, std::size_t target_dim);

struct Normalisation {
  Eigen::MatrixXd features;             // kept columns mapped to [0, pi]
  std::vector<double> min;              // per kept column
  std::vector<double> max;
  std::vector<std::size_t> kept;        // original indices of kept columns
  std::vector<std::size_t> dropped;     // constant columns
};

/// x -> pi (x - min) / (max - min) per feature, over the whole pool.
/// Constant features are dropped; if all are constant, throws DegenerateError.
Normalisation normalize_to_pi(const Eigen::MatrixXd& X);

struct QkRelabel {
  std::vector<int> labels;
  Eigen::VectorXd phi;
  double top_eigenvalue = 0.0;
};

/// Labels from the top eigenvector of sqrt(K_Q) K_C^{-1} sqrt(K_Q). With
/// probability 1 - noise a label is sign(phi_i), else uniform; +1 -> 1, -1 -> 0.
QkRelabel relabel_qk_from_grams(const Eigen::MatrixXd& KQ, const Eigen::MatrixXd& KC, double noise, StreamKey key);
std::vector<int> relabel_qk(const Eigen::MatrixXd& X, const EmbeddingSpec& spec, double rbf_gamma, double noise,
                            StreamKey key);

/// Quartile of sorted values by linear interpolation between order statistics.
double quantile_sorted(const std::vector<double>& sorted, double q);

/// Labels from the projection P_i = k(x_i, x'') - k(x_i, x') against two
/// random pivots: 0 if P < q1 or q2 <= P < q3, else 1.
std::vector<int> labels_from_projection(const std::vector<double>& projection);
std::vector<int> relabel_qrf(const Eigen::MatrixXd& X, const EmbeddingSpec& spec, StreamKey key);

struct DlpConcept {
  std::int64_t p = 59;
  std::int64_t g = 2;
  int q = 4;
  std::int64_t s1 = 1;  // interval anchor in log space for coordinate 0
  std::int64_t s2 = 1;  // and for coordinate 1

  void validate() const;
  std::int64_t half_width() const { return (p - 3) / 2; }
};

/// log in [s, s + (p-3)/2] on the cycle Z_{p-1}.
bool in_log_interval(std::int64_t log_value, std::int64_t s, std::int64_t p);

/// +1 iff exactly one coordinate's log lies in its interval.
int dlp_concept_label(std::int64_t x0, std::int64_t x1, const DlpConcept& dlp, const DiscreteLogTable& table);

/// N points uniform on Z_p^* x Z_p^*; labels 1 for concept value +1 and 0 for -1.
Dataset gen_dlp_dataset(const DlpConcept& dlp, std::size_t n, StreamKey key);

struct SplitSets {
  Dataset train;
  Dataset test;
  bool stratified = true;
};

/// Shuffled split, stratified by class with largest-remainder allocation.
/// Falls back to an unstratified split when a class has fewer than two
/// members.
SplitSets split(const Dataset& data, double ratio, StreamKey key);

}  // namespace qforest
