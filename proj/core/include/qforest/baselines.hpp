#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "qforest/kernel.hpp"
#include "qforest/qsim.hpp"
#include "qforest/svm.hpp"

namespace qforest {

/// Axis-aligned split x[feature] < threshold goes left.
struct CartNode {
  int depth = 1;
  std::vector<std::size_t> counts;
  std::vector<double> distribution;
  bool inherited = false;

  bool is_split = false;
  std::size_t feature = 0;
  double threshold = 0.0;
  double information_gain = 0.0;
  int left = -1;
  int right = -1;
};

struct CartTree {
  std::vector<CartNode> nodes;
  std::size_t num_classes = 2;
};

struct CartSplit {
  std::size_t feature = 0;
  double threshold = 0.0;
  double information_gain = 0.0;
};

/// Best axis-aligned split over all features and midpoints of consecutive
/// distinct values; ties go to the lowest feature, then lowest threshold.
/// nullopt when every feature is constant on `ids`.
std::optional<CartSplit> best_cart_split(const Eigen::MatrixXd& X, std::span<const int> labels,
                                         std::span<const std::size_t> ids, std::size_t num_classes);

/// Same leaf rules as the quantum tree: depth >= max_depth, |S| <= min_split,
/// or a single class.
CartTree train_cart(const Eigen::MatrixXd& X, std::span<const int> labels, std::span<const std::size_t> ids,
                    int max_depth, std::size_t min_split, std::size_t num_classes);

std::vector<double> predict_cart(const CartTree& tree, const Eigen::VectorXd& x);

struct CartForest {
  std::vector<CartTree> trees;
  std::vector<std::vector<std::size_t>> subsets;
  std::size_t num_classes = 2;
};

/// Bagging identical to train_forest (same subsets for the same seed).
CartForest train_crf(const Eigen::MatrixXd& X, std::span<const int> labels, std::size_t trees,
                     std::size_t partition_size, int max_depth, std::size_t min_split, std::size_t num_classes,
                     std::uint64_t seed, std::size_t threads = 1);

/// Mean of the tree distributions.
std::vector<double> predict_crf(const CartForest& forest, const Eigen::VectorXd& x);

/// Binary kernel SVM classifier over labels {0, 1} (1 maps to +1).
struct KernelSvmClassifier {
  enum class Kind { Rbf, Quantum };
  Kind kind = Kind::Rbf;
  double gamma = 1.0;
  std::optional<EmbeddingSpec> spec;
  ShotPlan plan;
  svm::KernelModel model;
  Eigen::MatrixXd support_vectors;        // rows, aligned with model.support
  std::vector<std::size_t> support_ids;   // training ids, for ad-hoc shot streams
};

KernelSvmClassifier train_rbf_svm(const Eigen::MatrixXd& X, std::span<const int> labels, double gamma, double C,
                                  const svm::SolverOptions& options = {});

/// QSVM on the full N x N Gram measured through the cache.
KernelSvmClassifier train_qsvm(const Eigen::MatrixXd& X, std::span<const int> labels, const EmbeddingSpec& spec,
                               double C, const ShotPlan& plan, KernelCache& cache,
                               const svm::SolverOptions& options = {});

double decision(const KernelSvmClassifier& clf, const Eigen::VectorXd& x);

/// Decision values for every row of X.
Eigen::VectorXd decisions(const KernelSvmClassifier& clf, const Eigen::MatrixXd& X);

/// 1 when the decision value is >= 0, else 0.
std::vector<int> predict_labels(const KernelSvmClassifier& clf, const Eigen::MatrixXd& X);

}  // namespace qforest
