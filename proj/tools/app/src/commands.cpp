#include "qforest_app/commands.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <numbers>
#include <numeric>
#include <sstream>

#include "qforest/baselines.hpp"
#include "qforest/error.hpp"
#include "qforest/forest.hpp"
#include "qforest/kernel.hpp"
#include "qforest/nystrom.hpp"
#include "qforest/parallel.hpp"
#include "qforest/serialize.hpp"

namespace qforest::app {

using nlohmann::json;

namespace {

std::string shortest(double v) {
  char buf[32];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

bool is_dlp(const EmbeddingSpec& spec) { return !spec.is_circuit(); }

Dataset generate(const GeneratorConfig& g, std::uint64_t seed) {
  const StreamKey key = StreamKey(g.seed.value_or(seed)).derive("generator");
  if (g.kind == "dlp") return gen_dlp_dataset(g.dlp, g.n, key);

  Dataset data;
  Stream rng(key);
  data.features.resize(static_cast<Eigen::Index>(g.n), static_cast<Eigen::Index>(g.dim));
  for (std::size_t c = 0; c < g.dim; ++c) data.meta.feature_names.push_back("x" + std::to_string(c));
  if (g.kind == "uniform") {
    for (Eigen::Index i = 0; i < data.features.rows(); ++i) {
      for (Eigen::Index c = 0; c < data.features.cols(); ++c) data.features(i, c) = std::numbers::pi * rng.uniform();
      data.labels.push_back(0);
    }
    data.meta.comments.push_back("generator uniform n=" + std::to_string(g.n) + " dim=" + std::to_string(g.dim));
    return data;
  }
  Eigen::MatrixXd centres(static_cast<Eigen::Index>(g.classes), static_cast<Eigen::Index>(g.dim));
  for (Eigen::Index k = 0; k < centres.rows(); ++k) {
    for (Eigen::Index c = 0; c < centres.cols(); ++c) centres(k, c) = rng.uniform();
  }
  for (std::size_t i = 0; i < g.n; ++i) {
    const std::size_t k = i % g.classes;
    for (Eigen::Index c = 0; c < centres.cols(); ++c) {
      data.features(static_cast<Eigen::Index>(i), c) = centres(static_cast<Eigen::Index>(k), c) + g.spread * rng.normal();
    }
    data.labels.push_back(static_cast<int>(k));
  }
  std::ostringstream desc;
  desc << "generator blobs n=" << g.n << " dim=" << g.dim << " classes=" << g.classes << " spread=" << g.spread;
  data.meta.comments.push_back(desc.str());
  return data;
}

void preprocess(Dataset& data, std::size_t pca_dim, bool normalize, std::vector<std::string>& warnings) {
  if (pca_dim > 0) {
    if (pca_dim > data.dim()) {
      throw ConfigError("preprocess.pca_dim", "exceeds the feature dimension " + std::to_string(data.dim()));
    }
    if (pca_dim < data.dim()) {
      data.features = pca_reduce(data.features, pca_dim);
      data.meta.pca_components = pca_dim;
      data.meta.feature_names.clear();
      for (std::size_t c = 0; c < pca_dim; ++c) data.meta.feature_names.push_back("pc" + std::to_string(c));
    }
  }
  if (normalize) {
    Normalisation norm = normalize_to_pi(data.features);
    for (std::size_t c : norm.dropped) warnings.push_back("dropped constant feature " + std::to_string(c));
    if (!norm.dropped.empty() && !data.meta.feature_names.empty()) {
      std::vector<std::string> names;
      for (std::size_t c : norm.kept) names.push_back(data.meta.feature_names[c]);
      data.meta.feature_names = std::move(names);
    }
    data.features = std::move(norm.features);
    data.meta.feature_min = std::move(norm.min);
    data.meta.feature_max = std::move(norm.max);
  }
}

void relabel(Dataset& data, const std::string& strategy, const EmbeddingSpec& spec, double noise,
             std::optional<double> gamma, StreamKey key) {
  if (strategy == "none") return;
  if (spec.input_dim() != 0 && spec.input_dim() != data.dim()) {
    throw ConfigError("relabel.embedding", spec.describe() + " needs " + std::to_string(spec.input_dim()) +
                                               " features, data has " + std::to_string(data.dim()));
  }
  if (strategy == "qk") {
    const double g = gamma.value_or(1.0 / static_cast<double>(data.dim()));
    data.labels = relabel_qk(data.features, spec, g, noise, key);
  } else {
    data.labels = relabel_qrf(data.features, spec, key);
  }
  data.meta.comments.push_back("relabelled with " + strategy + " using " + spec.describe());
}

double mean_of(const std::vector<double>& v) {
  return v.empty() ? 0.0 : std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double std_of(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double m = mean_of(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(v.size() - 1));
}

json summary(const std::vector<double>& v) { return {{"mean", mean_of(v)}, {"std", std_of(v)}}; }

json optional_number(const std::optional<double>& v) {
  return v && std::isfinite(*v) ? json(*v) : json(nullptr);
}

std::vector<int> labels_of(const std::vector<Prediction>& preds) {
  std::vector<int> out;
  for (const auto& p : preds) out.push_back(p.label);
  return out;
}

std::vector<int> crf_labels(const CartForest& f, const Eigen::MatrixXd& X) {
  std::vector<int> out;
  for (Eigen::Index i = 0; i < X.rows(); ++i) out.push_back(argmax_label(predict_crf(f, X.row(i).transpose())));
  return out;
}

ShotPlan plan_for(const ExperimentConfig& c, std::uint64_t seed) {
  return c.hyper.shots == 0 ? ShotPlan::exact() : ShotPlan::sampled(c.hyper.shots, StreamKey(seed).derive("shots"));
}

double training_spectral_error(const Eigen::MatrixXd& X, const EmbeddingSpec& spec, std::size_t l,
                               const ShotPlan& plan, StreamKey key) {
  const auto n = static_cast<std::size_t>(X.rows());
  l = std::min(l, n);
  std::vector<std::size_t> rows(n);
  std::iota(rows.begin(), rows.end(), 0);
  const auto landmarks = select_landmarks(n, l, key);
  KernelCache cache;
  const GramBlock block = gram_block(X, rows, landmarks, spec, plan, cache);
  const Eigen::MatrixXd full = exact_gram(X, spec);
  Eigen::MatrixXd reordered(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = 0; b < n; ++b) {
      reordered(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) =
          full(static_cast<Eigen::Index>(block.row_ids[a]), static_cast<Eigen::Index>(block.row_ids[b]));
    }
  }
  return spectral_error(reordered, complete(block));
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InvalidInput("cannot write " + path.string());
  out << text;
}

}  // namespace

PreparedData prepare_data(const ExperimentConfig& config, std::uint64_t seed) {
  PreparedData out;
  Dataset data = config.data.path ? load_csv(*config.data.path) : generate(*config.data.generator, seed);
  if (data.size() < 4) throw InvalidInput("dataset needs at least four rows");

  const bool raw_integers = (config.data.generator && config.data.generator->kind == "dlp") ||
                            (!config.hyper.embeddings.empty() && is_dlp(config.hyper.embeddings.front()));
  if (!raw_integers) preprocess(data, config.preprocess.pca_dim, config.preprocess.normalize, out.warnings);

  if (config.relabel.strategy != "none") {
    relabel(data, config.relabel.strategy, *config.relabel.embedding, config.relabel.noise, config.relabel.gamma,
            StreamKey(seed).derive("relabel"));
  }
  for (const auto& spec : config.hyper.embeddings) {
    if (spec.input_dim() != 0 && spec.input_dim() != data.dim()) {
      throw ConfigError("hyper.embedding", spec.describe() + " needs " + std::to_string(spec.input_dim()) +
                                               " features, data has " + std::to_string(data.dim()));
    }
  }
  out.num_classes = std::max<std::size_t>(2, data.num_classes());
  SplitSets sets = split(data, config.data.split, StreamKey(seed).derive("split"));
  if (!sets.stratified) out.warnings.push_back("a class has fewer than two members; split is not stratified");
  out.train = std::move(sets.train);
  out.test = std::move(sets.test);
  return out;
}

RunResult run_experiment(const ExperimentConfig& config, std::uint64_t seed, std::size_t threads, bool spectral) {
  PreparedData data = prepare_data(config, seed);
  RunResult r;
  r.seed = seed;
  r.warnings = data.warnings;
  r.n_train = data.train.size();
  r.n_test = data.test.size();
  const Eigen::MatrixXd& Xtr = data.train.features;
  const Eigen::MatrixXd& Xte = data.test.features;
  const auto& ytr = data.train.labels;
  const auto& yte = data.test.labels;
  const std::size_t n = data.train.size();
  const std::size_t partition = std::min(config.hyper.partition_size.value_or(n), n);
  svm::SolverOptions solver;
  solver.tol = config.hyper.tol;
  solver.max_passes = config.hyper.max_passes;
  const ShotPlan plan = plan_for(config, seed);

  switch (config.model) {
    case ModelKind::Qrf: {
      TrainConfig tc;
      tc.max_depth = config.hyper.depth;
      tc.min_split = config.hyper.min_split;
      tc.schedule = config.schedule();
      tc.C = config.hyper.C;
      tc.c_growth = config.hyper.c_growth;
      tc.max_retries = config.hyper.max_retries;
      tc.ig_threshold = config.hyper.ig_threshold;
      tc.plan = plan;
      tc.strategy = config.hyper.strategy;
      tc.num_classes = data.num_classes;
      tc.solver = solver;
      KernelCache cache;
      const Forest forest = train_forest(Xtr, ytr, config.hyper.trees, partition, tc, seed, cache, threads);
      r.sigma = estimation_ratio(cache, n);
      r.unique_estimations = cache.unique_estimations();
      r.kernel_requests = cache.total_requests();
      const auto train_dists = tree_distributions(forest, Xtr, threads);
      const auto test_dists = tree_distributions(forest, Xte, threads);
      r.train_accuracy = accuracy(labels_of(vote(train_dists)), ytr);
      r.test_accuracy = accuracy(labels_of(vote(test_dists)), yte);
      if (forest.trees.size() >= 2) {
        std::vector<std::vector<int>> per_tree;
        for (const auto& tree : test_dists) {
          std::vector<int> l;
          for (const auto& d : tree) l.push_back(argmax_label(d));
          per_tree.push_back(std::move(l));
        }
        r.tree_correlation = tree_correlation(per_tree).mean_off_diagonal;
      }
      for (std::size_t t = 0; t < forest.trees.size(); ++t) {
        const auto& nodes = forest.trees[t].nodes;
        for (std::size_t i = 0; i < nodes.size(); ++i) {
          if (!nodes[i].is_split) continue;
          const auto& d = nodes[i].diagnostics;
          r.nodes.push_back({{"tree", t},
                             {"node", i},
                             {"depth", nodes[i].depth},
                             {"information_gain", d.information_gain},
                             {"margin", optional_number(d.margin)},
                             {"model_complexity", d.model_complexity},
                             {"retries", d.retries},
                             {"final_C", d.final_C},
                             {"rank", d.rank},
                             {"converged", d.converged}});
        }
      }
      r.model = io::to_json(forest);
      break;
    }
    case ModelKind::Qsvm: {
      KernelCache cache;
      const auto clf = train_qsvm(Xtr, ytr, config.hyper.embeddings.front(), config.hyper.C, plan, cache, solver);
      r.sigma = estimation_ratio(cache, n);
      r.unique_estimations = cache.unique_estimations();
      r.kernel_requests = cache.total_requests();
      r.train_accuracy = accuracy(predict_labels(clf, Xtr), ytr);
      r.test_accuracy = accuracy(predict_labels(clf, Xte), yte);
      r.model = io::to_json(clf);
      break;
    }
    case ModelKind::Crf: {
      const auto forest = train_crf(Xtr, ytr, config.hyper.trees, partition, config.hyper.depth, config.hyper.min_split,
                                    data.num_classes, seed, threads);
      r.train_accuracy = accuracy(crf_labels(forest, Xtr), ytr);
      r.test_accuracy = accuracy(crf_labels(forest, Xte), yte);
      r.model = io::to_json(forest);
      break;
    }
    case ModelKind::RbfSvm: {
      const double gamma = config.hyper.gamma.value_or(1.0 / static_cast<double>(data.train.dim()));
      const auto clf = train_rbf_svm(Xtr, ytr, gamma, config.hyper.C, solver);
      r.train_accuracy = accuracy(predict_labels(clf, Xtr), ytr);
      r.test_accuracy = accuracy(predict_labels(clf, Xte), yte);
      r.model = io::to_json(clf);
      break;
    }
  }

  const bool quantum = config.model == ModelKind::Qrf || config.model == ModelKind::Qsvm;
  if (spectral && quantum) {
    r.spectral_error = training_spectral_error(Xtr, config.hyper.embeddings.front(), config.hyper.landmarks.front(),
                                               plan, StreamKey(seed).derive("spectral"));
  }
  return r;
}

std::vector<RunResult> run_all(const ExperimentConfig& config, std::size_t threads, bool spectral) {
  std::vector<RunResult> runs(config.seeds.size());
  parallel_for(config.seeds.size(), threads,
               [&](std::size_t i) { runs[i] = run_experiment(config, config.seeds[i], threads, spectral); });
  return runs;
}

json make_report(const ExperimentConfig& config, const std::vector<RunResult>& runs, double wall_time_s) {
  json jruns = json::array();
  std::vector<double> train;
  std::vector<double> test;
  std::vector<double> sigma;
  for (const auto& r : runs) {
    jruns.push_back({{"seed", r.seed},
                     {"train_accuracy", r.train_accuracy},
                     {"test_accuracy", r.test_accuracy},
                     {"sigma", optional_number(r.sigma)},
                     {"unique_kernel_estimations", r.unique_estimations},
                     {"kernel_requests", r.kernel_requests},
                     {"tree_correlation_mean", optional_number(r.tree_correlation)},
                     {"n_train", r.n_train},
                     {"n_test", r.n_test},
                     {"nodes", r.nodes}});
    train.push_back(r.train_accuracy);
    test.push_back(r.test_accuracy);
    if (r.sigma) sigma.push_back(*r.sigma);
  }
  json report = {{"model", to_string(config.model)},
                 {"config", to_json(config)},
                 {"runs", std::move(jruns)},
                 {"summary", {{"train_accuracy", summary(train)}, {"test_accuracy", summary(test)}}},
                 {"wall_time_s", wall_time_s}};
  report["summary"]["sigma"] = sigma.empty() ? json(nullptr) : summary(sigma);
  return report;
}

json make_model_file(const ExperimentConfig& config, const std::vector<RunResult>& runs) {
  json models = json::array();
  for (const auto& r : runs) models.push_back({{"seed", r.seed}, {"model", r.model}});
  return {{"model", to_string(config.model)}, {"config", to_json(config)}, {"runs", std::move(models)}};
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

json cmd_train(const ExperimentConfig& config, const std::filesystem::path& out_dir, std::size_t threads) {
  const auto start = std::chrono::steady_clock::now();
  const auto runs = run_all(config, threads);
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  std::filesystem::create_directories(out_dir);
  const json report = make_report(config, runs, wall);
  write_file(out_dir / "model.json", dump(make_model_file(config, runs)));
  write_file(out_dir / "report.json", dump(report));
  return report;
}

json cmd_eval(const std::filesystem::path& model_path, const std::filesystem::path& data_path,
              std::optional<std::uint64_t> seed) {
  std::ifstream in(model_path);
  if (!in) throw InvalidInput("cannot open " + model_path.string());
  const json file = json::parse(in);
  const Dataset data = load_csv(data_path);
  json results = json::array();
  for (const auto& run : file.at("runs")) {
    const auto run_seed = run.at("seed").get<std::uint64_t>();
    if (seed && *seed != run_seed) continue;
    const json& m = run.at("model");
    const auto type = m.at("type").get<std::string>();
    std::vector<int> predicted;
    if (type == "qrf") {
      predicted = labels_of(predict_all(io::forest_from_json(m), data.features));
    } else if (type == "crf") {
      predicted = crf_labels(io::cart_forest_from_json(m), data.features);
    } else {
      predicted = predict_labels(io::kernel_svm_from_json(m), data.features);
    }
    results.push_back({{"seed", run_seed}, {"accuracy", accuracy(predicted, data.labels)}, {"n", data.size()}});
  }
  if (results.empty()) throw InvalidInput("no stored model matches the requested seed");
  return {{"model", file.at("model")}, {"data", data_path.string()}, {"results", results}};
}

std::vector<double> parse_values(const std::string& csv) {
  std::vector<double> out;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw ConfigError("values", "not a number: '" + item + "'");
    }
  }
  if (out.empty()) throw ConfigError("values", "no sweep values given");
  return out;
}

std::string cmd_sweep(const ExperimentConfig& config, const std::string& param, const std::vector<double>& values,
                      std::size_t threads) {
  std::vector<double> sorted = values;
  std::sort(sorted.begin(), sorted.end());
  sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
  std::vector<ExperimentConfig> configs;
  for (double v : sorted) {
    ExperimentConfig c = config;
    apply_parameter(c, param, v);
    configs.push_back(std::move(c));
  }

  const std::size_t per = config.seeds.size();
  std::vector<RunResult> runs(sorted.size() * per);
  parallel_for(runs.size(), threads, [&](std::size_t k) {
    runs[k] = run_experiment(configs[k / per], config.seeds[k % per], 1, true);
  });

  std::ostringstream out;
  out << "param,value,stat,seed,train_accuracy,test_accuracy,sigma,unique_estimations,final_C_mean,final_C_max,"
         "information_gain_mean,margin_mean,model_complexity_mean,spectral_error\n";
  auto field = [](const std::optional<double>& v) {
    return v && std::isfinite(*v) ? shortest(*v) : std::string();
  };
  struct Row {
    double train, test;
    std::optional<double> sigma, unique, c_mean, c_max, ig, margin, sk, spectral;
  };
  auto row_of = [](const RunResult& r) {
    Row row{r.train_accuracy, r.test_accuracy, r.sigma, static_cast<double>(r.unique_estimations), {}, {}, {}, {}, {}, r.spectral_error};
    std::vector<double> cs, igs, margins, sks;
    for (const auto& n : r.nodes) {
      cs.push_back(n.at("final_C").get<double>());
      igs.push_back(n.at("information_gain").get<double>());
      if (!n.at("margin").is_null()) margins.push_back(n.at("margin").get<double>());
      sks.push_back(n.at("model_complexity").get<double>());
    }
    if (!cs.empty()) {
      row.c_mean = mean_of(cs);
      row.c_max = *std::max_element(cs.begin(), cs.end());
      row.ig = mean_of(igs);
      row.sk = mean_of(sks);
    }
    if (!margins.empty()) row.margin = mean_of(margins);
    return row;
  };
  auto write = [&](double value, const std::string& stat, const std::string& seed, const Row& r) {
    out << param << ',' << shortest(value) << ',' << stat << ',' << seed << ',' << field(r.train) << ',' << field(r.test) << ','
        << field(r.sigma) << ',' << field(r.unique) << ',' << field(r.c_mean) << ',' << field(r.c_max) << ','
        << field(r.ig) << ',' << field(r.margin) << ',' << field(r.sk) << ',' << field(r.spectral) << '\n';
  };

  for (std::size_t v = 0; v < sorted.size(); ++v) {
    std::vector<Row> rows;
    for (std::size_t s = 0; s < per; ++s) {
      rows.push_back(row_of(runs[v * per + s]));
      write(sorted[v], "run", std::to_string(config.seeds[s]), rows.back());
    }
    auto collect = [&](auto member, auto reduce) -> std::optional<double> {
      std::vector<double> xs;
      for (const auto& r : rows) {
        const std::optional<double> x = member(r);
        if (x) xs.push_back(*x);
      }
      if (xs.empty()) return std::nullopt;
      return reduce(xs);
    };
    for (int which = 0; which < 2; ++which) {
      auto reduce = [which](const std::vector<double>& xs) { return which == 0 ? mean_of(xs) : std_of(xs); };
      Row agg{*collect([](const Row& r) { return std::optional<double>(r.train); }, reduce),
              *collect([](const Row& r) { return std::optional<double>(r.test); }, reduce),
              collect([](const Row& r) { return r.sigma; }, reduce),
              collect([](const Row& r) { return r.unique; }, reduce),
              collect([](const Row& r) { return r.c_mean; }, reduce),
              collect([](const Row& r) { return r.c_max; }, reduce),
              collect([](const Row& r) { return r.ig; }, reduce),
              collect([](const Row& r) { return r.margin; }, reduce),
              collect([](const Row& r) { return r.sk; }, reduce),
              collect([](const Row& r) { return r.spectral; }, reduce)};
      write(sorted[v], which == 0 ? "mean" : "std", "", agg);
    }
  }
  return out.str();
}

Dataset cmd_relabel(const Dataset& input, const RelabelOptions& options, std::vector<std::string>& warnings) {
  if (options.strategy != "qk" && options.strategy != "qrf") throw InvalidInput("relabel strategy must be qk or qrf");
  Dataset data = input;
  std::size_t pca = options.pca_dim;
  if (pca == 0 && options.embedding.input_dim() != 0 && data.dim() > options.embedding.input_dim()) {
    pca = options.embedding.input_dim();
  }
  preprocess(data, pca, true, warnings);
  relabel(data, options.strategy, options.embedding, options.noise, options.gamma,
          StreamKey(options.seed).derive("relabel"));
  data.meta.comments.push_back("relabel seed=" + std::to_string(options.seed));
  return data;
}

Dataset cmd_gen_dlp(const DlpConcept& dlp, std::size_t n, std::uint64_t seed) {
  return gen_dlp_dataset(dlp, n, StreamKey(seed).derive("generator"));
}

}  // namespace qforest::app
