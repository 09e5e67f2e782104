#include "qforest/tree.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>

#include "qforest/error.hpp"
#include "qforest/linalg.hpp"

namespace qforest {

double entropy(std::span<const double> distribution) {
  double total = 0.0;
  for (double p : distribution) {
    if (p < 0.0 || !std::isfinite(p)) throw InvalidInput("probabilities must be finite and non-negative");
    total += p;
  }
  if (total <= 0.0) throw InvalidInput("distribution has no mass");
  double h = 0.0;
  for (double p : distribution) {
    if (p > 0.0) {
      const double q = p / total;
      h -= q * std::log2(q);
    }
  }
  return h;
}

namespace {

std::vector<std::size_t> class_counts(std::span<const int> labels, std::size_t num_classes) {
  std::vector<std::size_t> counts(num_classes, 0);
  for (int y : labels) {
    if (y < 0 || static_cast<std::size_t>(y) >= num_classes) throw InvalidInput("label outside the class range");
    ++counts[static_cast<std::size_t>(y)];
  }
  return counts;
}

double counts_entropy(const std::vector<std::size_t>& counts) {
  std::vector<double> d(counts.begin(), counts.end());
  return entropy(d);
}

std::vector<double> normalise(const std::vector<std::size_t>& counts) {
  const double total = static_cast<double>(std::accumulate(counts.begin(), counts.end(), std::size_t{0}));
  std::vector<double> d(counts.size());
  for (std::size_t c = 0; c < counts.size(); ++c) d[c] = static_cast<double>(counts[c]) / total;
  return d;
}

}  // namespace

double label_entropy(std::span<const int> labels, std::size_t num_classes) {
  if (labels.empty()) return 0.0;
  return counts_entropy(class_counts(labels, num_classes));
}

double info_gain(std::span<const int> all, std::span<const int> left, std::span<const int> right,
                 std::size_t num_classes) {
  const auto c_all = class_counts(all, num_classes);
  const auto c_left = class_counts(left, num_classes);
  const auto c_right = class_counts(right, num_classes);
  for (std::size_t c = 0; c < num_classes; ++c) {
    if (c_all[c] != c_left[c] + c_right[c]) throw InvalidInput("children do not partition the parent set");
  }
  if (all.empty()) throw InvalidInput("information gain of an empty set");
  const double n = static_cast<double>(all.size());
  double gain = counts_entropy(c_all);
  if (!left.empty()) gain -= static_cast<double>(left.size()) / n * counts_entropy(c_left);
  if (!right.empty()) gain -= static_cast<double>(right.size()) / n * counts_entropy(c_right);
  return std::max(0.0, gain);
}

std::string to_string(PseudoStrategy s) { return s == PseudoStrategy::OneAgainstAll ? "oaa" : "es"; }

PseudoStrategy parse_pseudo_strategy(const std::string& s) {
  if (s == "oaa" || s == "OAA") return PseudoStrategy::OneAgainstAll;
  if (s == "es" || s == "ES") return PseudoStrategy::EvenSplit;
  throw InvalidInput("unknown pseudo-class strategy: " + s);
}

double PseudoClassMap::sign_of(int label) const {
  return std::find(positive.begin(), positive.end(), label) != positive.end() ? 1.0 : -1.0;
}

PseudoClassMap make_pseudo_map(std::span<const int> classes_present, PseudoStrategy strategy, StreamKey key) {
  std::vector<int> classes(classes_present.begin(), classes_present.end());
  std::sort(classes.begin(), classes.end());
  classes.erase(std::unique(classes.begin(), classes.end()), classes.end());
  if (classes.size() < 2) throw InvalidInput("a pseudo-class map needs at least two classes");

  Stream rng(key);
  PseudoClassMap map;
  map.strategy = strategy;
  const std::size_t negative_size = strategy == PseudoStrategy::OneAgainstAll ? 1 : (classes.size() + 1) / 2;
  rng.shuffle(classes);
  map.negative.assign(classes.begin(), classes.begin() + static_cast<std::ptrdiff_t>(negative_size));
  map.positive.assign(classes.begin() + static_cast<std::ptrdiff_t>(negative_size), classes.end());
  std::sort(map.negative.begin(), map.negative.end());
  std::sort(map.positive.begin(), map.positive.end());
  return map;
}

const DepthParams& TrainConfig::params_at(int depth) const {
  if (schedule.empty()) throw InvalidInput("empty embedding schedule");
  const auto idx = static_cast<std::size_t>(std::max(depth, 1) - 1);
  return schedule[std::min(idx, schedule.size() - 1)];
}

void TrainConfig::validate() const {
  if (max_depth < 1) throw InvalidInput("max depth must be at least 1");
  if (min_split < 1) throw InvalidInput("min split size must be at least 1");
  if (schedule.empty()) throw InvalidInput("embedding schedule is empty");
  for (const auto& p : schedule) {
    if (p.landmarks < 1) throw InvalidInput("landmark count must be at least 1");
  }
  if (!(C > 0.0)) throw InvalidInput("C must be positive");
  if (!(c_growth > 1.0)) throw InvalidInput("C growth factor must exceed 1");
  if (max_retries < 0) throw InvalidInput("max retries must be non-negative");
  if (num_classes < 1) throw InvalidInput("class count must be positive");
}

std::size_t Tree::depth() const {
  int d = 0;
  for (const auto& n : nodes) d = std::max(d, n.depth);
  return static_cast<std::size_t>(d);
}

std::size_t Tree::leaf_count() const {
  return static_cast<std::size_t>(std::count_if(nodes.begin(), nodes.end(), [](const TreeNode& n) { return !n.is_split; }));
}

namespace {

struct Attempt {
  double gain = -1.0;
  bool both_sides = false;
  int index = 0;
  double C = 0.0;
  std::optional<NystromMap> map;
  svm::LinearModel model;
  PseudoClassMap pseudo;
  std::vector<std::size_t> negative;
  std::vector<std::size_t> positive;
  Eigen::MatrixXd features;
  std::vector<double> pseudo_labels;
};

bool better(const Attempt& a, const Attempt& b) {
  if (a.gain != b.gain) return a.gain > b.gain;
  if (a.both_sides != b.both_sides) return a.both_sides;
  return a.index < b.index;
}

// y^T (F F^T)^+ y evaluated through the L x L Gram of the features.
double feature_complexity(const Eigen::MatrixXd& F, std::span<const double> y) {
  const Eigen::Map<const Eigen::VectorXd> labels(y.data(), static_cast<Eigen::Index>(y.size()));
  const Eigen::MatrixXd g = F.transpose() * F;
  const Eigen::VectorXd v = linalg::pinv(0.5 * (g + g.transpose())) * (F.transpose() * labels);
  return v.squaredNorm();
}

TreeNode make_leaf(int depth, std::vector<std::size_t> counts) {
  TreeNode node;
  node.depth = depth;
  node.distribution = normalise(counts);
  node.counts = std::move(counts);
  return node;
}

}  // namespace

std::optional<SplitResult> train_split_node(const Eigen::MatrixXd& X, std::span<const int> labels,
                                            std::span<const std::size_t> S, int depth, const TrainConfig& config,
                                            StreamKey node_key, KernelCache& cache) {
  std::vector<int> node_labels;
  node_labels.reserve(S.size());
  for (std::size_t id : S) node_labels.push_back(labels[id]);
  std::vector<int> present = node_labels;
  std::sort(present.begin(), present.end());
  present.erase(std::unique(present.begin(), present.end()), present.end());
  if (present.size() < 2) throw InvalidInput("split node needs at least two classes");

  const DepthParams& params = config.params_at(depth);
  const std::size_t l = std::min(params.landmarks, S.size());

  Attempt best;
  double C = config.C;
  int attempts_made = 0;
  for (int a = 0; a <= config.max_retries; ++a) {
    ++attempts_made;
    const StreamKey attempt_key = node_key.derive(static_cast<std::uint64_t>(a));
    Attempt cur;
    cur.index = a;
    cur.C = C;
    cur.pseudo = make_pseudo_map(present, config.strategy, attempt_key.derive("pseudo"));

    std::vector<std::size_t> landmark_ids;
    for (std::size_t pos : select_landmarks(S.size(), l, attempt_key.derive("landmarks"))) {
      landmark_ids.push_back(S[pos]);
    }
    const GramBlock block = gram_block(X, S, landmark_ids, params.embedding, config.plan, cache);

    bool usable = true;
    try {
      cur.map = make_nystrom_map(block, X, params.embedding, config.plan);
    } catch (const DegenerateError&) {
      usable = false;
    }
    if (usable) {
      cur.features = map_rows(block.entries, *cur.map);
      cur.pseudo_labels.reserve(block.row_ids.size());
      for (std::size_t id : block.row_ids) cur.pseudo_labels.push_back(cur.pseudo.sign_of(labels[id]));
      cur.model = svm::train_linear(cur.features, cur.pseudo_labels, C, config.solver);

      std::vector<int> left_labels;
      std::vector<int> right_labels;
      for (std::size_t r = 0; r < block.row_ids.size(); ++r) {
        const Eigen::VectorXd z = cur.features.row(static_cast<Eigen::Index>(r)).transpose();
        const std::size_t id = block.row_ids[r];
        if (svm::decision(cur.model, z) < 0.0) {
          cur.negative.push_back(id);
          left_labels.push_back(labels[id]);
        } else {
          cur.positive.push_back(id);
          right_labels.push_back(labels[id]);
        }
      }
      cur.gain = info_gain(node_labels, left_labels, right_labels, config.num_classes);
      cur.both_sides = !cur.negative.empty() && !cur.positive.empty();
    }

    const bool accepted = usable && cur.gain > config.ig_threshold;
    if (usable && (best.gain < 0.0 || better(cur, best))) best = std::move(cur);
    if (accepted) break;
    C *= config.c_growth;
  }

  if (best.gain < 0.0 || !best.both_sides) return std::nullopt;

  SplitResult result;
  TreeNode& node = result.node;
  node.depth = depth;
  node.counts = class_counts(node_labels, config.num_classes);
  node.distribution = normalise(node.counts);
  node.is_split = true;
  node.pseudo = best.pseudo;
  node.diagnostics.information_gain = best.gain;
  const double wnorm = best.model.weights.norm();
  if (wnorm > 0.0) node.diagnostics.margin = 2.0 / wnorm;
  node.diagnostics.model_complexity = feature_complexity(best.features, best.pseudo_labels);
  node.diagnostics.retries = attempts_made - 1;
  node.diagnostics.final_C = best.C;
  node.diagnostics.rank = best.map->rank;
  node.diagnostics.converged = best.model.converged;
  best.model.alphas.resize(0);
  node.model = std::move(best.model);
  node.nystrom = std::move(best.map);
  std::sort(best.negative.begin(), best.negative.end());
  std::sort(best.positive.begin(), best.positive.end());
  result.negative = std::move(best.negative);
  result.positive = std::move(best.positive);
  return result;
}

Tree train_qdt(const Eigen::MatrixXd& X, std::span<const int> labels, std::span<const std::size_t> S,
               const TrainConfig& config, KernelCache& cache) {
  config.validate();
  if (S.empty()) throw InvalidInput("cannot train a tree on an empty set");
  if (labels.size() != static_cast<std::size_t>(X.rows())) throw InvalidInput("label count does not match data");

  Tree tree;
  tree.num_classes = config.num_classes;

  // Depth-first, left before right. Children are keyed by their path so the
  // random draws at a node do not depend on the rest of the tree.
  std::function<int(std::vector<std::size_t>, int, StreamKey, const std::vector<double>*)> grow =
      [&](std::vector<std::size_t> ids, int depth, StreamKey key, const std::vector<double>* parent) -> int {
    const int index = static_cast<int>(tree.nodes.size());
    if (ids.empty()) {
      TreeNode leaf;
      leaf.depth = depth;
      leaf.counts.assign(config.num_classes, 0);
      leaf.distribution = *parent;
      leaf.inherited = true;
      tree.nodes.push_back(std::move(leaf));
      return index;
    }
    std::vector<int> node_labels;
    for (std::size_t id : ids) node_labels.push_back(labels[id]);
    auto counts = class_counts(node_labels, config.num_classes);
    const auto classes = std::count_if(counts.begin(), counts.end(), [](std::size_t c) { return c > 0; });

    std::optional<SplitResult> split;
    if (depth < config.max_depth && ids.size() > config.min_split && classes > 1) {
      split = train_split_node(X, labels, ids, depth, config, key, cache);
    }
    if (!split) {
      tree.nodes.push_back(make_leaf(depth, std::move(counts)));
      return index;
    }
    tree.nodes.push_back(std::move(split->node));
    const std::vector<double> dist = tree.nodes[static_cast<std::size_t>(index)].distribution;
    const int left = grow(std::move(split->negative), depth + 1, key.derive("left"), &dist);
    const int right = grow(std::move(split->positive), depth + 1, key.derive("right"), &dist);
    tree.nodes[static_cast<std::size_t>(index)].left = left;
    tree.nodes[static_cast<std::size_t>(index)].right = right;
    return index;
  };

  grow(std::vector<std::size_t>(S.begin(), S.end()), 1, config.key.derive("root"), nullptr);
  return tree;
}

std::vector<double> predict_qdt(const Tree& tree, const Eigen::VectorXd& x, std::vector<TraceStep>& trace) {
  trace.clear();
  if (tree.nodes.empty()) throw InvalidInput("tree has no nodes");
  int idx = 0;
  while (true) {
    const TreeNode& node = tree.nodes[static_cast<std::size_t>(idx)];
    if (!node.is_split) return node.distribution;
    const NystromMap& map = *node.nystrom;
    if (x.size() != map.landmark_vectors.cols()) throw InvalidInput("instance dimension does not match the tree");
    const Eigen::VectorXd z = map_point(landmark_kernels(x, map), map);
    const double d = svm::decision(node.model, z);
    trace.push_back({idx, d});
    idx = d < 0.0 ? node.left : node.right;
  }
}

std::vector<double> predict_qdt(const Tree& tree, const Eigen::VectorXd& x) {
  std::vector<TraceStep> trace;
  return predict_qdt(tree, x, trace);
}

int argmax_label(std::span<const double> distribution) {
  if (distribution.empty()) throw InvalidInput("empty distribution");
  int best = 0;
  for (std::size_t c = 1; c < distribution.size(); ++c) {
    if (distribution[c] > distribution[static_cast<std::size_t>(best)]) best = static_cast<int>(c);
  }
  return best;
}

}  // namespace qforest
