#include "qforest/serialize.hpp"

#include "qforest/error.hpp"

namespace qforest::io {

json matrix_to_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return json{{"rows", m.rows()}, {"cols", m.cols()}, {"data", std::move(rows)}};
}

Eigen::MatrixXd matrix_from_json(const json& j) {
  const auto rows = j.at("rows").get<Eigen::Index>();
  const auto cols = j.at("cols").get<Eigen::Index>();
  const json& data = j.at("data");
  if (static_cast<Eigen::Index>(data.size()) != rows) throw InvalidInput("matrix row count mismatch");
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const json& row = data.at(static_cast<std::size_t>(r));
    if (static_cast<Eigen::Index>(row.size()) != cols) throw InvalidInput("matrix column count mismatch");
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = row.at(static_cast<std::size_t>(c)).get<double>();
  }
  return m;
}

json vector_to_json(const Eigen::VectorXd& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

Eigen::VectorXd vector_from_json(const json& j) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v(static_cast<Eigen::Index>(i)) = j.at(i).get<double>();
  return v;
}

json to_json(const EmbeddingSpec& spec) {
  return std::visit(
      [](const auto& e) -> json {
        using T = std::decay_t<decltype(e)>;
        if constexpr (std::is_same_v<T, IqpEmbedding>) {
          return {{"kind", "iqp"}, {"qubits", e.n_qubits}};
        } else if constexpr (std::is_same_v<T, HardwareEfficientEmbedding>) {
          return {{"kind", "hea"}, {"qubits", e.n_qubits}, {"layers", e.layers}};
        } else {
          return {{"kind", "dlp"}, {"p", e.p}, {"g", e.g}, {"q", e.q}, {"dims", e.dims}};
        }
      },
      spec.variant());
}

EmbeddingSpec embedding_from_json(const json& j) {
  const auto kind = j.at("kind").get<std::string>();
  if (kind == "iqp") return EmbeddingSpec::iqp(j.at("qubits").get<int>());
  if (kind == "hea") return EmbeddingSpec::hardware_efficient(j.at("qubits").get<int>(), j.value("layers", -1));
  if (kind == "dlp") {
    return EmbeddingSpec::dlp_interval(j.at("p").get<std::int64_t>(), j.at("g").get<std::int64_t>(),
                                       j.at("q").get<int>(), j.at("dims").get<int>());
  }
  throw InvalidInput("unknown embedding kind: " + kind);
}

json to_json(const ShotPlan& plan) { return {{"shots", plan.shots}, {"key", plan.key.value()}}; }

ShotPlan plan_from_json(const json& j) {
  return ShotPlan{j.at("shots").get<std::uint64_t>(), StreamKey(j.at("key").get<std::uint64_t>())};
}

json to_json(const TrainConfig& c) {
  json schedule = json::array();
  for (const auto& p : c.schedule) schedule.push_back({{"embedding", to_json(p.embedding)}, {"landmarks", p.landmarks}});
  return {{"max_depth", c.max_depth},
          {"min_split", c.min_split},
          {"schedule", std::move(schedule)},
          {"C", c.C},
          {"c_growth", c.c_growth},
          {"max_retries", c.max_retries},
          {"ig_threshold", c.ig_threshold},
          {"plan", to_json(c.plan)},
          {"strategy", to_string(c.strategy)},
          {"num_classes", c.num_classes},
          {"solver", {{"tol", c.solver.tol}, {"max_passes", c.solver.max_passes}}},
          {"key", c.key.value()}};
}

TrainConfig train_config_from_json(const json& j) {
  TrainConfig c;
  c.max_depth = j.at("max_depth").get<int>();
  c.min_split = j.at("min_split").get<std::size_t>();
  for (const auto& p : j.at("schedule")) {
    c.schedule.push_back({embedding_from_json(p.at("embedding")), p.at("landmarks").get<std::size_t>()});
  }
  c.C = j.at("C").get<double>();
  c.c_growth = j.at("c_growth").get<double>();
  c.max_retries = j.at("max_retries").get<int>();
  c.ig_threshold = j.at("ig_threshold").get<double>();
  c.plan = plan_from_json(j.at("plan"));
  c.strategy = parse_pseudo_strategy(j.at("strategy").get<std::string>());
  c.num_classes = j.at("num_classes").get<std::size_t>();
  c.solver.tol = j.at("solver").at("tol").get<double>();
  c.solver.max_passes = j.at("solver").at("max_passes").get<int>();
  c.key = StreamKey(j.at("key").get<std::uint64_t>());
  return c;
}

namespace {

json node_common(int depth, const std::vector<std::size_t>& counts, const std::vector<double>& distribution,
                 bool inherited) {
  return {{"depth", depth}, {"counts", counts}, {"distribution", distribution}, {"inherited", inherited}};
}

}  // namespace

json to_json(const Tree& tree) {
  json nodes = json::array();
  for (const auto& n : tree.nodes) {
    json j = node_common(n.depth, n.counts, n.distribution, n.inherited);
    if (!n.is_split) {
      j["type"] = "leaf";
    } else {
      j["type"] = "split";
      const NystromMap& m = *n.nystrom;
      j["nystrom"] = {{"landmark_ids", m.landmark_ids},
                      {"landmark_vectors", matrix_to_json(m.landmark_vectors)},
                      {"transform", matrix_to_json(m.transform)},
                      {"rank", m.rank},
                      {"embedding", to_json(m.spec)},
                      {"plan", to_json(m.plan)}};
      j["model"] = {{"weights", vector_to_json(n.model.weights)},
                    {"bias", n.model.bias},
                    {"C", n.model.C},
                    {"converged", n.model.converged},
                    {"iterations", n.model.iterations}};
      j["pseudo"] = {{"negative", n.pseudo.negative},
                     {"positive", n.pseudo.positive},
                     {"strategy", to_string(n.pseudo.strategy)}};
      const auto& d = n.diagnostics;
      j["diagnostics"] = {{"information_gain", d.information_gain},
                          {"margin", d.margin ? json(*d.margin) : json(nullptr)},
                          {"model_complexity", d.model_complexity},
                          {"retries", d.retries},
                          {"final_C", d.final_C},
                          {"rank", d.rank},
                          {"converged", d.converged}};
      j["left"] = n.left;
      j["right"] = n.right;
    }
    nodes.push_back(std::move(j));
  }
  return {{"num_classes", tree.num_classes}, {"nodes", std::move(nodes)}};
}

Tree tree_from_json(const json& j) {
  Tree tree;
  tree.num_classes = j.at("num_classes").get<std::size_t>();
  for (const auto& jn : j.at("nodes")) {
    TreeNode n;
    n.depth = jn.at("depth").get<int>();
    n.counts = jn.at("counts").get<std::vector<std::size_t>>();
    n.distribution = jn.at("distribution").get<std::vector<double>>();
    n.inherited = jn.at("inherited").get<bool>();
    const auto type = jn.at("type").get<std::string>();
    if (type == "split") {
      n.is_split = true;
      const json& jm = jn.at("nystrom");
      n.nystrom.emplace(NystromMap{.landmark_ids = jm.at("landmark_ids").get<std::vector<std::size_t>>(),
                                   .landmark_vectors = matrix_from_json(jm.at("landmark_vectors")),
                                   .transform = matrix_from_json(jm.at("transform")),
                                   .rank = jm.at("rank").get<std::size_t>(),
                                   .spec = embedding_from_json(jm.at("embedding")),
                                   .plan = plan_from_json(jm.at("plan"))});
      const json& model = jn.at("model");
      n.model.weights = vector_from_json(model.at("weights"));
      n.model.bias = model.at("bias").get<double>();
      n.model.C = model.at("C").get<double>();
      n.model.converged = model.at("converged").get<bool>();
      n.model.iterations = model.at("iterations").get<std::size_t>();
      const json& pseudo = jn.at("pseudo");
      n.pseudo.negative = pseudo.at("negative").get<std::vector<int>>();
      n.pseudo.positive = pseudo.at("positive").get<std::vector<int>>();
      n.pseudo.strategy = parse_pseudo_strategy(pseudo.at("strategy").get<std::string>());
      const json& d = jn.at("diagnostics");
      n.diagnostics.information_gain = d.at("information_gain").get<double>();
      if (!d.at("margin").is_null()) n.diagnostics.margin = d.at("margin").get<double>();
      n.diagnostics.model_complexity = d.at("model_complexity").get<double>();
      n.diagnostics.retries = d.at("retries").get<int>();
      n.diagnostics.final_C = d.at("final_C").get<double>();
      n.diagnostics.rank = d.at("rank").get<std::size_t>();
      n.diagnostics.converged = d.at("converged").get<bool>();
      n.left = jn.at("left").get<int>();
      n.right = jn.at("right").get<int>();
    } else if (type != "leaf") {
      throw InvalidInput("unknown node type: " + type);
    }
    tree.nodes.push_back(std::move(n));
  }
  if (tree.nodes.empty()) throw InvalidInput("serialized tree has no nodes");
  return tree;
}

json to_json(const Forest& forest) {
  json trees = json::array();
  for (const auto& t : forest.trees) trees.push_back(to_json(t));
  return {{"type", "qrf"},
          {"trees", std::move(trees)},
          {"subsets", forest.subsets},
          {"config", to_json(forest.config)},
          {"partition_size", forest.partition_size},
          {"num_classes", forest.num_classes},
          {"master_seed", forest.master_seed}};
}

Forest forest_from_json(const json& j) {
  Forest f;
  for (const auto& t : j.at("trees")) f.trees.push_back(tree_from_json(t));
  f.subsets = j.at("subsets").get<std::vector<std::vector<std::size_t>>>();
  f.config = train_config_from_json(j.at("config"));
  f.partition_size = j.at("partition_size").get<std::size_t>();
  f.num_classes = j.at("num_classes").get<std::size_t>();
  f.master_seed = j.at("master_seed").get<std::uint64_t>();
  return f;
}

json to_json(const CartTree& tree) {
  json nodes = json::array();
  for (const auto& n : tree.nodes) {
    json j = node_common(n.depth, n.counts, n.distribution, n.inherited);
    if (n.is_split) {
      j["type"] = "split";
      j["feature"] = n.feature;
      j["threshold"] = n.threshold;
      j["information_gain"] = n.information_gain;
      j["left"] = n.left;
      j["right"] = n.right;
    } else {
      j["type"] = "leaf";
    }
    nodes.push_back(std::move(j));
  }
  return {{"num_classes", tree.num_classes}, {"nodes", std::move(nodes)}};
}

CartTree cart_tree_from_json(const json& j) {
  CartTree tree;
  tree.num_classes = j.at("num_classes").get<std::size_t>();
  for (const auto& jn : j.at("nodes")) {
    CartNode n;
    n.depth = jn.at("depth").get<int>();
    n.counts = jn.at("counts").get<std::vector<std::size_t>>();
    n.distribution = jn.at("distribution").get<std::vector<double>>();
    n.inherited = jn.at("inherited").get<bool>();
    if (jn.at("type").get<std::string>() == "split") {
      n.is_split = true;
      n.feature = jn.at("feature").get<std::size_t>();
      n.threshold = jn.at("threshold").get<double>();
      n.information_gain = jn.at("information_gain").get<double>();
      n.left = jn.at("left").get<int>();
      n.right = jn.at("right").get<int>();
    }
    tree.nodes.push_back(std::move(n));
  }
  if (tree.nodes.empty()) throw InvalidInput("serialized tree has no nodes");
  return tree;
}

json to_json(const CartForest& forest) {
  json trees = json::array();
  for (const auto& t : forest.trees) trees.push_back(to_json(t));
  return {{"type", "crf"}, {"trees", std::move(trees)}, {"subsets", forest.subsets}, {"num_classes", forest.num_classes}};
}

CartForest cart_forest_from_json(const json& j) {
  CartForest f;
  for (const auto& t : j.at("trees")) f.trees.push_back(cart_tree_from_json(t));
  f.subsets = j.at("subsets").get<std::vector<std::vector<std::size_t>>>();
  f.num_classes = j.at("num_classes").get<std::size_t>();
  return f;
}

json to_json(const KernelSvmClassifier& clf) {
  json j = {{"type", clf.kind == KernelSvmClassifier::Kind::Rbf ? "rbf-svm" : "qsvm"},
            {"gamma", clf.gamma},
            {"plan", to_json(clf.plan)},
            {"bias", clf.model.bias},
            {"C", clf.model.C},
            {"converged", clf.model.converged},
            {"coefficients", vector_to_json(clf.model.coefficients)},
            {"support_ids", clf.support_ids},
            {"support_vectors", matrix_to_json(clf.support_vectors)}};
  j["embedding"] = clf.spec ? to_json(*clf.spec) : json(nullptr);
  return j;
}

KernelSvmClassifier kernel_svm_from_json(const json& j) {
  KernelSvmClassifier clf;
  const auto type = j.at("type").get<std::string>();
  if (type == "rbf-svm") {
    clf.kind = KernelSvmClassifier::Kind::Rbf;
  } else if (type == "qsvm") {
    clf.kind = KernelSvmClassifier::Kind::Quantum;
  } else {
    throw InvalidInput("not a kernel SVM model: " + type);
  }
  clf.gamma = j.at("gamma").get<double>();
  clf.plan = plan_from_json(j.at("plan"));
  if (!j.at("embedding").is_null()) clf.spec = embedding_from_json(j.at("embedding"));
  if (clf.kind == KernelSvmClassifier::Kind::Quantum && !clf.spec) throw InvalidInput("QSVM model lacks an embedding");
  clf.model.bias = j.at("bias").get<double>();
  clf.model.C = j.at("C").get<double>();
  clf.model.converged = j.at("converged").get<bool>();
  clf.model.coefficients = vector_from_json(j.at("coefficients"));
  clf.support_ids = j.at("support_ids").get<std::vector<std::size_t>>();
  clf.model.support = clf.support_ids;
  clf.support_vectors = matrix_from_json(j.at("support_vectors"));
  if (static_cast<std::size_t>(clf.model.coefficients.size()) != clf.support_ids.size() ||
      static_cast<std::size_t>(clf.support_vectors.rows()) != clf.support_ids.size()) {
    throw InvalidInput("support vector bookkeeping mismatch");
  }
  return clf;
}

}  // namespace qforest::io
