#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "qforest/kernel.hpp"
#include "qforest/nystrom.hpp"
#include "qforest/qsim.hpp"
#include "qforest/rng.hpp"
#include "qforest/svm.hpp"

namespace qforest {

/// Entropy in bits, 0 log 0 = 0. The distribution need not be normalised to
/// exactly 1 but entries must be non-negative.
double entropy(std::span<const double> distribution);

/// Entropy of the empirical class distribution of `labels`.
double label_entropy(std::span<const int> labels, std::size_t num_classes);

/// H(S) - sum_i |S_i|/|S| H(S_i). S_left and S_right must partition S as
/// multisets of labels.
double info_gain(std::span<const int> all, std::span<const int> left, std::span<const int> right,
                 std::size_t num_classes);

enum class PseudoStrategy { OneAgainstAll, EvenSplit };

std::string to_string(PseudoStrategy s);
PseudoStrategy parse_pseudo_strategy(const std::string& s);

/// Node-local binarisation of the classes present at a node.
struct PseudoClassMap {
  std::vector<int> negative;
  std::vector<int> positive;
  PseudoStrategy strategy = PseudoStrategy::EvenSplit;

  /// +1 for classes in `positive`, -1 otherwise.
  double sign_of(int label) const;
};

/// OAA: one random class against the rest (the single class is negative).
/// ES: a random ceil(|C|/2) subset (negative) against the rest.
PseudoClassMap make_pseudo_map(std::span<const int> classes_present, PseudoStrategy strategy, StreamKey key);

struct DepthParams {
  EmbeddingSpec embedding;
  std::size_t landmarks;
};

struct TrainConfig {
  int max_depth = 4;            // root has depth 1; nodes at max_depth are leaves
  std::size_t min_split = 2;    // nodes with |S| <= min_split are leaves
  std::vector<DepthParams> schedule;  // entry i for depth i + 1; last entry repeats
  double C = 1.0;
  double c_growth = 10.0;
  int max_retries = 5;
  double ig_threshold = 0.0;
  ShotPlan plan;
  PseudoStrategy strategy = PseudoStrategy::EvenSplit;
  std::size_t num_classes = 2;
  svm::SolverOptions solver;
  StreamKey key;

  const DepthParams& params_at(int depth) const;
  void validate() const;
};

struct SplitDiagnostics {
  double information_gain = 0.0;
  std::optional<double> margin;  // empty for a zero weight vector
  double model_complexity = 0.0;
  int retries = 0;
  double final_C = 0.0;
  std::size_t rank = 0;
  bool converged = true;
};

struct TreeNode {
  int depth = 1;
  std::vector<std::size_t> counts;  // training instances per class reaching the node
  std::vector<double> distribution;
  bool inherited = false;           // empty child holding its parent's distribution

  bool is_split = false;
  std::optional<NystromMap> nystrom;
  svm::LinearModel model;
  PseudoClassMap pseudo;
  SplitDiagnostics diagnostics;
  int left = -1;   // decision < 0
  int right = -1;  // decision >= 0
};

/// Nodes in creation order; nodes[0] is the root.
struct Tree {
  std::vector<TreeNode> nodes;
  std::size_t num_classes = 2;

  std::size_t depth() const;
  std::size_t leaf_count() const;
};

/// Instances of the training matrix that reach a node.
struct SplitResult {
  TreeNode node;
  std::vector<std::size_t> negative;
  std::vector<std::size_t> positive;
};

/// Trains one split function on instance ids `S` (rows of X). Returns
/// nullopt when every attempt leaves one side empty and none beats the IG
/// threshold; the caller then makes the node a leaf.
std::optional<SplitResult> train_split_node(const Eigen::MatrixXd& X, std::span<const int> labels,
                                            std::span<const std::size_t> S, int depth, const TrainConfig& config,
                                            StreamKey node_key, KernelCache& cache);

/// Trains a tree on instance ids `S`. Labels are indexed by row of X.
Tree train_qdt(const Eigen::MatrixXd& X, std::span<const int> labels, std::span<const std::size_t> S,
               const TrainConfig& config, KernelCache& cache);

struct TraceStep {
  int node;
  double decision;
};

/// Leaf distribution reached by x.
std::vector<double> predict_qdt(const Tree& tree, const Eigen::VectorXd& x);

/// Same traversal, also returning the split decisions along the path.
std::vector<double> predict_qdt(const Tree& tree, const Eigen::VectorXd& x, std::vector<TraceStep>& trace);

/// Index of the largest entry; ties go to the smallest index.
int argmax_label(std::span<const double> distribution);

}  // namespace qforest
