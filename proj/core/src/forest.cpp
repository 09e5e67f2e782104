#include "qforest/forest.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "qforest/error.hpp"
#include "qforest/nystrom.hpp"
#include "qforest/parallel.hpp"

namespace qforest {

Forest train_forest(const Eigen::MatrixXd& X, std::span<const int> labels, std::size_t trees, std::size_t partition_size,
                    const TrainConfig& config, std::uint64_t master_seed, KernelCache& cache, std::size_t threads) {
  const auto n = static_cast<std::size_t>(X.rows());
  if (n == 0) throw InvalidInput("cannot train a forest on an empty set");
  if (trees < 1) throw InvalidInput("forest needs at least one tree");
  if (partition_size < 1 || partition_size > n) throw InvalidInput("partition size must lie in [1, N]");
  config.validate();

  Forest forest;
  forest.config = config;
  forest.partition_size = partition_size;
  forest.num_classes = config.num_classes;
  forest.master_seed = master_seed;
  forest.trees.resize(trees);
  forest.subsets.resize(trees);

  const StreamKey root(master_seed);
  parallel_for(trees, threads, [&](std::size_t t) {
    const StreamKey tree_key = root.derive(static_cast<std::uint64_t>(t));
    auto subset = select_landmarks(n, partition_size, tree_key.derive("bag"));
    std::sort(subset.begin(), subset.end());
    TrainConfig tree_config = config;
    tree_config.key = tree_key.derive("train");
    forest.trees[t] = train_qdt(X, labels, subset, tree_config, cache);
    forest.subsets[t] = std::move(subset);
  });
  return forest;
}

std::vector<std::vector<std::vector<double>>> tree_distributions(const Forest& forest, const Eigen::MatrixXd& X,
                                                                 std::size_t threads) {
  const std::size_t t_count = forest.trees.size();
  const auto n = static_cast<std::size_t>(X.rows());
  std::vector<std::vector<std::vector<double>>> out(t_count, std::vector<std::vector<double>>(n));
  parallel_for(t_count * n, threads, [&](std::size_t k) {
    const std::size_t t = k / n;
    const std::size_t i = k % n;
    out[t][i] = predict_qdt(forest.trees[t], X.row(static_cast<Eigen::Index>(i)).transpose());
  });
  return out;
}

std::vector<Prediction> vote(const std::vector<std::vector<std::vector<double>>>& per_tree) {
  if (per_tree.empty()) throw InvalidInput("no trees to vote");
  const std::size_t n = per_tree.front().size();
  std::vector<Prediction> out(n);
  const double t_count = static_cast<double>(per_tree.size());
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> mean(per_tree.front()[i].size(), 0.0);
    for (const auto& tree : per_tree) {
      for (std::size_t c = 0; c < mean.size(); ++c) mean[c] += tree[i][c];
    }
    for (double& v : mean) v /= t_count;
    out[i].label = argmax_label(mean);
    out[i].distribution = std::move(mean);
  }
  return out;
}

std::vector<Prediction> predict_all(const Forest& forest, const Eigen::MatrixXd& X, std::size_t threads) {
  return vote(tree_distributions(forest, X, threads));
}

Prediction predict(const Forest& forest, const Eigen::VectorXd& x) {
  Eigen::MatrixXd row = x.transpose();
  return predict_all(forest, row, 1).front();
}

double accuracy(std::span<const int> predicted, std::span<const int> truth) {
  if (truth.empty()) throw InvalidInput("accuracy of an empty test set");
  if (predicted.size() != truth.size()) throw InvalidInput("prediction count does not match labels");
  std::size_t hits = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) hits += predicted[i] == truth[i] ? 1 : 0;
  return static_cast<double>(hits) / static_cast<double>(truth.size());
}

double accuracy(const Forest& forest, const Eigen::MatrixXd& X, std::span<const int> labels, std::size_t threads) {
  if (labels.empty()) throw InvalidInput("accuracy of an empty test set");
  const auto preds = predict_all(forest, X, threads);
  std::vector<int> predicted;
  for (const auto& p : preds) predicted.push_back(p.label);
  return accuracy(predicted, labels);
}

namespace {

std::vector<double> average_ranks(std::span<const double> v) {
  std::vector<std::size_t> order(v.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> ranks(v.size());
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    while (j + 1 < order.size() && v[order[j + 1]] == v[order[i]]) ++j;
    const double r = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = r;
    i = j + 1;
  }
  return ranks;
}

}  // namespace

double spearman(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw InvalidInput("correlated sequences differ in length");
  if (a.size() < 2) return std::numeric_limits<double>::quiet_NaN();
  const auto ra = average_ranks(a);
  const auto rb = average_ranks(b);
  const double n = static_cast<double>(a.size());
  const double ma = std::accumulate(ra.begin(), ra.end(), 0.0) / n;
  const double mb = std::accumulate(rb.begin(), rb.end(), 0.0) / n;
  double sab = 0.0;
  double saa = 0.0;
  double sbb = 0.0;
  for (std::size_t i = 0; i < ra.size(); ++i) {
    sab += (ra[i] - ma) * (rb[i] - mb);
    saa += (ra[i] - ma) * (ra[i] - ma);
    sbb += (rb[i] - mb) * (rb[i] - mb);
  }
  if (saa == 0.0 || sbb == 0.0) return std::numeric_limits<double>::quiet_NaN();
  return sab / std::sqrt(saa * sbb);
}

TreeCorrelation tree_correlation(const std::vector<std::vector<int>>& tree_labels) {
  const std::size_t t = tree_labels.size();
  if (t < 2) throw InvalidInput("tree correlation needs at least two trees");
  std::vector<std::vector<double>> seqs;
  for (const auto& labels : tree_labels) seqs.emplace_back(labels.begin(), labels.end());

  TreeCorrelation out;
  out.matrix = Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(t));
  double sum = 0.0;
  for (std::size_t i = 0; i < t; ++i) {
    for (std::size_t j = i + 1; j < t; ++j) {
      const double r = spearman(seqs[i], seqs[j]);
      out.matrix(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = r;
      out.matrix(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = r;
      if (!std::isnan(r)) {
        sum += r;
        ++out.defined_pairs;
      }
    }
  }
  out.mean_off_diagonal =
      out.defined_pairs > 0 ? sum / static_cast<double>(out.defined_pairs) : std::numeric_limits<double>::quiet_NaN();
  return out;
}

TreeCorrelation tree_correlation(const Forest& forest, const Eigen::MatrixXd& X, std::size_t threads) {
  const auto per_tree = tree_distributions(forest, X, threads);
  std::vector<std::vector<int>> labels;
  for (const auto& tree : per_tree) {
    std::vector<int> l;
    for (const auto& d : tree) l.push_back(argmax_label(d));
    labels.push_back(std::move(l));
  }
  return tree_correlation(labels);
}

double estimation_ratio(const KernelCache& cache, std::size_t n) {
  if (n == 0) throw InvalidInput("estimation ratio needs N >= 1");
  return static_cast<double>(cache.unique_estimations()) / (static_cast<double>(n) * static_cast<double>(n));
}

}  // namespace qforest
