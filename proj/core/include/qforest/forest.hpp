#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <span>
#include <vector>

#include "qforest/kernel.hpp"
#include "qforest/tree.hpp"

namespace qforest {

struct Forest {
  std::vector<Tree> trees;
  std::vector<std::vector<std::size_t>> subsets;  // bagged training ids per tree
  TrainConfig config;
  std::size_t partition_size = 0;
  std::size_t num_classes = 2;
  std::uint64_t master_seed = 0;
};

/// Bagging without replacement: tree t trains on N_p ids drawn with key
/// (master_seed, t). Trees train on up to `threads` workers and share
/// `cache`; the result does not depend on the worker count.
Forest train_forest(const Eigen::MatrixXd& X, std::span<const int> labels, std::size_t trees, std::size_t partition_size,
                    const TrainConfig& config, std::uint64_t master_seed, KernelCache& cache, std::size_t threads = 1);

struct Prediction {
  std::vector<double> distribution;
  int label = 0;
};

Prediction predict(const Forest& forest, const Eigen::VectorXd& x);

/// Per-tree leaf distributions for every row of X: result[t][i].
std::vector<std::vector<std::vector<double>>> tree_distributions(const Forest& forest, const Eigen::MatrixXd& X,
                                                                 std::size_t threads = 1);

/// Forest predictions from per-tree distributions (mean, argmax).
std::vector<Prediction> vote(const std::vector<std::vector<std::vector<double>>>& per_tree);

std::vector<Prediction> predict_all(const Forest& forest, const Eigen::MatrixXd& X, std::size_t threads = 1);

double accuracy(std::span<const int> predicted, std::span<const int> truth);
double accuracy(const Forest& forest, const Eigen::MatrixXd& X, std::span<const int> labels, std::size_t threads = 1);

/// Spearman correlation with average ranks. Returns NaN when either
/// sequence is constant.
double spearman(std::span<const double> a, std::span<const double> b);

struct TreeCorrelation {
  Eigen::MatrixXd matrix;  // NaN marks undefined pairs
  double mean_off_diagonal = 0.0;  // NaN when no pair is defined
  std::size_t defined_pairs = 0;
};

/// Rank correlation between the trees' predicted-label sequences.
TreeCorrelation tree_correlation(const std::vector<std::vector<int>>& tree_labels);
TreeCorrelation tree_correlation(const Forest& forest, const Eigen::MatrixXd& X, std::size_t threads = 1);

/// unique_estimations / N^2.
double estimation_ratio(const KernelCache& cache, std::size_t n);

}  // namespace qforest
