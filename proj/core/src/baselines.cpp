#include "qforest/baselines.hpp"

#include <algorithm>
#include <functional>
#include <numeric>

#include "qforest/error.hpp"
#include "qforest/nystrom.hpp"
#include "qforest/parallel.hpp"
#include "qforest/tree.hpp"

namespace qforest {

namespace {

std::vector<std::size_t> counts_of(std::span<const int> labels, std::span<const std::size_t> ids, std::size_t k) {
  std::vector<std::size_t> counts(k, 0);
  for (std::size_t id : ids) {
    const int y = labels[id];
    if (y < 0 || static_cast<std::size_t>(y) >= k) throw InvalidInput("label outside the class range");
    ++counts[static_cast<std::size_t>(y)];
  }
  return counts;
}

double entropy_of(const std::vector<std::size_t>& counts) {
  std::size_t total = 0;
  for (auto c : counts) total += c;
  if (total == 0) return 0.0;
  std::vector<double> d(counts.begin(), counts.end());
  return entropy(d);
}

std::vector<double> normalise(const std::vector<std::size_t>& counts) {
  const double total = static_cast<double>(std::accumulate(counts.begin(), counts.end(), std::size_t{0}));
  std::vector<double> d;
  for (auto c : counts) d.push_back(static_cast<double>(c) / total);
  return d;
}

std::vector<double> binary_targets(std::span<const int> labels) {
  std::vector<double> y;
  for (int l : labels) {
    if (l != 0 && l != 1) throw InvalidInput("kernel SVM classifier supports labels 0 and 1 only");
    y.push_back(l == 1 ? 1.0 : -1.0);
  }
  return y;
}

void keep_support(KernelSvmClassifier& clf, const Eigen::MatrixXd& X) {
  clf.support_ids = clf.model.support;
  clf.support_vectors.resize(static_cast<Eigen::Index>(clf.support_ids.size()), X.cols());
  for (std::size_t s = 0; s < clf.support_ids.size(); ++s) {
    clf.support_vectors.row(static_cast<Eigen::Index>(s)) = X.row(static_cast<Eigen::Index>(clf.support_ids[s]));
  }
}

}  // namespace

std::optional<CartSplit> best_cart_split(const Eigen::MatrixXd& X, std::span<const int> labels,
                                         std::span<const std::size_t> ids, std::size_t num_classes) {
  const auto parent = counts_of(labels, ids, num_classes);
  const double h_parent = entropy_of(parent);
  const double n = static_cast<double>(ids.size());
  std::optional<CartSplit> best;
  std::vector<std::size_t> order(ids.begin(), ids.end());
  for (Eigen::Index f = 0; f < X.cols(); ++f) {
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return X(static_cast<Eigen::Index>(a), f) < X(static_cast<Eigen::Index>(b), f); });
    std::vector<std::size_t> left(num_classes, 0);
    std::vector<std::size_t> right = parent;
    for (std::size_t k = 0; k + 1 < order.size(); ++k) {
      const auto y = static_cast<std::size_t>(labels[order[k]]);
      ++left[y];
      --right[y];
      const double v = X(static_cast<Eigen::Index>(order[k]), f);
      const double next = X(static_cast<Eigen::Index>(order[k + 1]), f);
      if (!(next > v)) continue;
      const double nl = static_cast<double>(k + 1);
      const double gain = std::max(0.0, h_parent - nl / n * entropy_of(left) - (n - nl) / n * entropy_of(right));
      const double threshold = 0.5 * (v + next);
      // Features and thresholds are visited in increasing order, so strict
      // improvement keeps the lowest (feature, threshold) among ties.
      if (!best || gain > best->information_gain) {
        best = CartSplit{static_cast<std::size_t>(f), threshold, gain};
      }
    }
  }
  return best;
}

CartTree train_cart(const Eigen::MatrixXd& X, std::span<const int> labels, std::span<const std::size_t> ids,
                    int max_depth, std::size_t min_split, std::size_t num_classes) {
  if (ids.empty()) throw InvalidInput("cannot train a tree on an empty set");
  if (max_depth < 1) throw InvalidInput("max depth must be at least 1");
  CartTree tree;
  tree.num_classes = num_classes;
  std::function<int(std::vector<std::size_t>, int, const std::vector<double>*)> grow =
      [&](std::vector<std::size_t> node_ids, int depth, const std::vector<double>* parent) -> int {
    const int index = static_cast<int>(tree.nodes.size());
    CartNode node;
    node.depth = depth;
    node.counts = counts_of(labels, node_ids, num_classes);
    if (node_ids.empty()) {
      node.distribution = *parent;
      node.inherited = true;
      tree.nodes.push_back(std::move(node));
      return index;
    }
    node.distribution = normalise(node.counts);
    const auto classes = std::count_if(node.counts.begin(), node.counts.end(), [](std::size_t c) { return c > 0; });
    std::optional<CartSplit> split;
    if (depth < max_depth && node_ids.size() > min_split && classes > 1) {
      split = best_cart_split(X, labels, node_ids, num_classes);
    }
    if (!split) {
      tree.nodes.push_back(std::move(node));
      return index;
    }
    node.is_split = true;
    node.feature = split->feature;
    node.threshold = split->threshold;
    node.information_gain = split->information_gain;
    std::vector<std::size_t> left;
    std::vector<std::size_t> right;
    for (std::size_t id : node_ids) {
      (X(static_cast<Eigen::Index>(id), static_cast<Eigen::Index>(split->feature)) < split->threshold ? left : right)
          .push_back(id);
    }
    const std::vector<double> dist = node.distribution;
    tree.nodes.push_back(std::move(node));
    const int l = grow(std::move(left), depth + 1, &dist);
    const int r = grow(std::move(right), depth + 1, &dist);
    tree.nodes[static_cast<std::size_t>(index)].left = l;
    tree.nodes[static_cast<std::size_t>(index)].right = r;
    return index;
  };
  grow(std::vector<std::size_t>(ids.begin(), ids.end()), 1, nullptr);
  return tree;
}

std::vector<double> predict_cart(const CartTree& tree, const Eigen::VectorXd& x) {
  if (tree.nodes.empty()) throw InvalidInput("tree has no nodes");
  int idx = 0;
  while (true) {
    const CartNode& node = tree.nodes[static_cast<std::size_t>(idx)];
    if (!node.is_split) return node.distribution;
    if (static_cast<Eigen::Index>(node.feature) >= x.size()) throw InvalidInput("instance dimension does not match the tree");
    idx = x(static_cast<Eigen::Index>(node.feature)) < node.threshold ? node.left : node.right;
  }
}

CartForest train_crf(const Eigen::MatrixXd& X, std::span<const int> labels, std::size_t trees,
                     std::size_t partition_size, int max_depth, std::size_t min_split, std::size_t num_classes,
                     std::uint64_t seed, std::size_t threads) {
  const auto n = static_cast<std::size_t>(X.rows());
  if (n == 0) throw InvalidInput("cannot train a forest on an empty set");
  if (trees < 1) throw InvalidInput("forest needs at least one tree");
  if (partition_size < 1 || partition_size > n) throw InvalidInput("partition size must lie in [1, N]");
  CartForest forest;
  forest.num_classes = num_classes;
  forest.trees.resize(trees);
  forest.subsets.resize(trees);
  const StreamKey root(seed);
  parallel_for(trees, threads, [&](std::size_t t) {
    auto subset = select_landmarks(n, partition_size, root.derive(static_cast<std::uint64_t>(t)).derive("bag"));
    std::sort(subset.begin(), subset.end());
    forest.trees[t] = train_cart(X, labels, subset, max_depth, min_split, num_classes);
    forest.subsets[t] = std::move(subset);
  });
  return forest;
}

std::vector<double> predict_crf(const CartForest& forest, const Eigen::VectorXd& x) {
  std::vector<double> mean(forest.num_classes, 0.0);
  for (const auto& tree : forest.trees) {
    const auto d = predict_cart(tree, x);
    for (std::size_t c = 0; c < mean.size(); ++c) mean[c] += d[c];
  }
  for (double& v : mean) v /= static_cast<double>(forest.trees.size());
  return mean;
}

KernelSvmClassifier train_rbf_svm(const Eigen::MatrixXd& X, std::span<const int> labels, double gamma, double C,
                                  const svm::SolverOptions& options) {
  if (!(gamma > 0.0)) throw InvalidInput("RBF gamma must be positive");
  const auto y = binary_targets(labels);
  KernelSvmClassifier clf;
  clf.kind = KernelSvmClassifier::Kind::Rbf;
  clf.gamma = gamma;
  clf.model = svm::train_kernel(rbf_gram(X, gamma), y, C, options);
  keep_support(clf, X);
  return clf;
}

KernelSvmClassifier train_qsvm(const Eigen::MatrixXd& X, std::span<const int> labels, const EmbeddingSpec& spec,
                               double C, const ShotPlan& plan, KernelCache& cache, const svm::SolverOptions& options) {
  const auto y = binary_targets(labels);
  std::vector<std::size_t> all(static_cast<std::size_t>(X.rows()));
  std::iota(all.begin(), all.end(), 0);
  const GramBlock block = gram_block(X, all, all, spec, plan, cache);
  KernelSvmClassifier clf;
  clf.kind = KernelSvmClassifier::Kind::Quantum;
  clf.spec = spec;
  clf.plan = plan;
  clf.model = svm::train_kernel(block.entries, y, C, options);
  keep_support(clf, X);
  return clf;
}

namespace {

double kernel_to_support(const KernelSvmClassifier& clf, const Eigen::VectorXd& x, std::size_t s) {
  const Eigen::VectorXd sv = clf.support_vectors.row(static_cast<Eigen::Index>(s)).transpose();
  if (clf.kind == KernelSvmClassifier::Kind::Rbf) return rbf_kernel(x, sv, clf.gamma);
  return quantum_kernel(x, sv, *clf.spec, adhoc_plan(clf.plan, *clf.spec, as_span(x), clf.support_ids[s]));
}

}  // namespace

double decision(const KernelSvmClassifier& clf, const Eigen::VectorXd& x) {
  if (x.size() != clf.support_vectors.cols()) throw InvalidInput("instance dimension does not match the model");
  double f = clf.model.bias;
  for (std::size_t s = 0; s < clf.support_ids.size(); ++s) {
    f += clf.model.coefficients(static_cast<Eigen::Index>(s)) * kernel_to_support(clf, x, s);
  }
  return f;
}

Eigen::VectorXd decisions(const KernelSvmClassifier& clf, const Eigen::MatrixXd& X) {
  Eigen::VectorXd out(X.rows());
  if (clf.kind == KernelSvmClassifier::Kind::Quantum && clf.plan.is_exact() && clf.spec->is_circuit() &&
      clf.support_vectors.rows() > 0) {
    const Eigen::MatrixXd k = exact_cross_gram(X, clf.support_vectors, *clf.spec);
    out = k * clf.model.coefficients + Eigen::VectorXd::Constant(X.rows(), clf.model.bias);
    return out;
  }
  for (Eigen::Index i = 0; i < X.rows(); ++i) out(i) = decision(clf, X.row(i).transpose());
  return out;
}

std::vector<int> predict_labels(const KernelSvmClassifier& clf, const Eigen::MatrixXd& X) {
  const Eigen::VectorXd d = decisions(clf, X);
  std::vector<int> out;
  for (Eigen::Index i = 0; i < d.size(); ++i) out.push_back(d(i) >= 0.0 ? 1 : 0);
  return out;
}

}  // namespace qforest
