#include "qforest_app/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "qforest/error.hpp"
#include "qforest/serialize.hpp"

namespace qforest::app {

using nlohmann::json;

std::string to_string(ModelKind m) {
  switch (m) {
    case ModelKind::Qrf: return "qrf";
    case ModelKind::Qsvm: return "qsvm";
    case ModelKind::Crf: return "crf";
    case ModelKind::RbfSvm: return "rbf-svm";
  }
  return "?";
}

namespace {

ModelKind parse_model(const std::string& path, const std::string& s) {
  if (s == "qrf" || s == "QRF") return ModelKind::Qrf;
  if (s == "qsvm" || s == "QSVM") return ModelKind::Qsvm;
  if (s == "crf" || s == "CRF") return ModelKind::Crf;
  if (s == "rbf-svm" || s == "RBF-SVM") return ModelKind::RbfSvm;
  throw ConfigError(path, "unknown model '" + s + "' (expected qrf, qsvm, crf or rbf-svm)");
}

// Object reader that records which keys were consumed and rejects the rest.
class Reader {
 public:
  Reader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(path_.empty() ? "<root>" : path_, "expected an object");
  }

  std::string at(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  const json* find(const std::string& key) {
    seen_.insert(key);
    auto it = j_.find(key);
    if (it == j_.end() || it->is_null()) return nullptr;
    return &*it;
  }

  double number(const std::string& key, double fallback) {
    const json* v = find(key);
    if (!v) return fallback;
    if (!v->is_number()) throw ConfigError(at(key), "expected a number");
    return v->get<double>();
  }

  double positive(const std::string& key, double fallback) {
    const double v = number(key, fallback);
    if (!(v > 0.0)) throw ConfigError(at(key), "must be positive");
    return v;
  }

  std::uint64_t unsigned_int(const std::string& key, std::uint64_t fallback) {
    const json* v = find(key);
    if (!v) return fallback;
    return as_unsigned(*v, at(key));
  }

  std::string string(const std::string& key, const std::string& fallback) {
    const json* v = find(key);
    if (!v) return fallback;
    if (!v->is_string()) throw ConfigError(at(key), "expected a string");
    return v->get<std::string>();
  }

  bool boolean(const std::string& key, bool fallback) {
    const json* v = find(key);
    if (!v) return fallback;
    if (!v->is_boolean()) throw ConfigError(at(key), "expected true or false");
    return v->get<bool>();
  }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it) {
      if (!seen_.count(it.key())) throw ConfigError(at(it.key()), "unknown key");
    }
  }

  static std::uint64_t as_unsigned(const json& v, const std::string& path) {
    if (v.is_number_unsigned()) return v.get<std::uint64_t>();
    if (v.is_number_integer()) {
      if (v.get<std::int64_t>() < 0) throw ConfigError(path, "must be non-negative");
      return static_cast<std::uint64_t>(v.get<std::int64_t>());
    }
    if (v.is_number_float()) {
      const double d = v.get<double>();
      if (d >= 0 && std::floor(d) == d) return static_cast<std::uint64_t>(d);
    }
    throw ConfigError(path, "expected a non-negative integer");
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

EmbeddingSpec parse_embedding(const json& j, const std::string& path) {
  try {
    if (j.is_string()) return parse_embedding_string(j.get<std::string>());
    Reader r(j, path);
    const std::string kind = r.string("kind", "");
    EmbeddingSpec spec = EmbeddingSpec::iqp(1);
    if (kind == "iqp") {
      spec = EmbeddingSpec::iqp(static_cast<int>(r.unsigned_int("qubits", 0)));
    } else if (kind == "hea") {
      const json* layers = r.find("layers");
      spec = EmbeddingSpec::hardware_efficient(static_cast<int>(r.unsigned_int("qubits", 0)),
                                               layers ? static_cast<int>(Reader::as_unsigned(*layers, r.at("layers"))) : -1);
    } else if (kind == "dlp") {
      spec = EmbeddingSpec::dlp_interval(static_cast<std::int64_t>(r.unsigned_int("p", 59)),
                                         static_cast<std::int64_t>(r.unsigned_int("g", 2)),
                                         static_cast<int>(r.unsigned_int("q", 4)),
                                         static_cast<int>(r.unsigned_int("dims", 2)));
    } else {
      throw ConfigError(r.at("kind"), "unknown embedding kind '" + kind + "' (expected iqp, hea or dlp)");
    }
    r.finish();
    return spec;
  } catch (const InvalidInput& e) {
    throw ConfigError(path, e.what());
  }
}

template <typename T, typename F>
std::vector<T> one_or_many(const json& j, const std::string& path, F parse_one) {
  std::vector<T> out;
  if (j.is_array()) {
    if (j.empty()) throw ConfigError(path, "list must not be empty");
    for (std::size_t i = 0; i < j.size(); ++i) out.push_back(parse_one(j[i], path + "[" + std::to_string(i) + "]"));
  } else {
    out.push_back(parse_one(j, path));
  }
  return out;
}

GeneratorConfig parse_generator(const json& j, const std::string& path) {
  Reader r(j, path);
  GeneratorConfig g;
  g.kind = r.string("kind", "");
  if (g.kind != "uniform" && g.kind != "blobs" && g.kind != "dlp") {
    throw ConfigError(r.at("kind"), "unknown generator '" + g.kind + "' (expected uniform, blobs or dlp)");
  }
  g.n = r.unsigned_int("n", g.n);
  if (g.n < 4) throw ConfigError(r.at("n"), "need at least 4 points");
  g.dim = r.unsigned_int("dim", g.dim);
  if (g.dim < 1) throw ConfigError(r.at("dim"), "must be at least 1");
  g.classes = r.unsigned_int("classes", g.classes);
  if (g.classes < 1) throw ConfigError(r.at("classes"), "must be at least 1");
  g.spread = r.positive("spread", g.spread);
  if (const json* s = r.find("seed")) g.seed = Reader::as_unsigned(*s, r.at("seed"));
  g.dlp.p = static_cast<std::int64_t>(r.unsigned_int("p", 59));
  g.dlp.g = static_cast<std::int64_t>(r.unsigned_int("g", 2));
  g.dlp.q = static_cast<int>(r.unsigned_int("q", 4));
  g.dlp.s1 = static_cast<std::int64_t>(r.unsigned_int("s1", 1));
  g.dlp.s2 = static_cast<std::int64_t>(r.unsigned_int("s2", 1));
  r.finish();
  if (g.kind == "dlp") {
    try {
      g.dlp.validate();
    } catch (const InvalidInput& e) {
      throw ConfigError(path, e.what());
    }
  }
  return g;
}

}  // namespace

EmbeddingSpec parse_embedding_string(const std::string& s) {
  std::vector<std::int64_t> nums;
  std::string kind;
  std::stringstream ss(s);
  std::string part;
  while (std::getline(ss, part, ':')) {
    if (kind.empty()) {
      kind = part;
      continue;
    }
    try {
      std::size_t used = 0;
      nums.push_back(std::stoll(part, &used));
      if (used != part.size()) throw std::invalid_argument(part);
    } catch (const std::exception&) {
      throw InvalidInput("bad embedding parameter '" + part + "' in '" + s + "'");
    }
  }
  if (kind == "iqp" && nums.size() == 1) return EmbeddingSpec::iqp(static_cast<int>(nums[0]));
  if (kind == "hea" && nums.size() == 1) return EmbeddingSpec::hardware_efficient(static_cast<int>(nums[0]));
  if (kind == "hea" && nums.size() == 2) {
    return EmbeddingSpec::hardware_efficient(static_cast<int>(nums[0]), static_cast<int>(nums[1]));
  }
  if (kind == "dlp" && nums.size() == 4) {
    return EmbeddingSpec::dlp_interval(nums[0], nums[1], static_cast<int>(nums[2]), static_cast<int>(nums[3]));
  }
  throw InvalidInput("embedding must look like iqp:N, hea:N[:layers] or dlp:p:g:q:dims, got '" + s + "'");
}

std::vector<DepthParams> ExperimentConfig::schedule() const {
  const std::size_t len = std::max(hyper.landmarks.size(), hyper.embeddings.size());
  std::vector<DepthParams> out;
  for (std::size_t i = 0; i < len; ++i) {
    out.push_back({hyper.embeddings[std::min(i, hyper.embeddings.size() - 1)],
                   hyper.landmarks[std::min(i, hyper.landmarks.size() - 1)]});
  }
  return out;
}

ExperimentConfig parse_config(const json& j) {
  ExperimentConfig c;
  Reader root(j, "");
  c.model = parse_model("model", root.string("model", "qrf"));

  if (const json* d = root.find("data")) {
    Reader r(*d, "data");
    if (const json* p = r.find("path")) {
      if (!p->is_string()) throw ConfigError("data.path", "expected a string");
      c.data.path = p->get<std::string>();
    }
    if (const json* g = r.find("generator")) c.data.generator = parse_generator(*g, "data.generator");
    c.data.split = r.number("split", c.data.split);
    if (!(c.data.split > 0.0 && c.data.split < 1.0)) throw ConfigError("data.split", "must lie in (0, 1)");
    r.finish();
    if (c.data.path && c.data.generator) throw ConfigError("data", "give either path or generator, not both");
  }

  if (const json* p = root.find("preprocess")) {
    Reader r(*p, "preprocess");
    c.preprocess.pca_dim = r.unsigned_int("pca_dim", 0);
    c.preprocess.normalize = r.boolean("normalize", true);
    r.finish();
  }

  if (const json* h = root.find("hyper")) {
    Reader r(*h, "hyper");
    auto& hp = c.hyper;
    hp.trees = r.unsigned_int("T", hp.trees);
    if (hp.trees < 1) throw ConfigError("hyper.T", "must be at least 1");
    hp.depth = static_cast<int>(r.unsigned_int("d", static_cast<std::uint64_t>(hp.depth)));
    if (hp.depth < 1) throw ConfigError("hyper.d", "must be at least 1");
    hp.min_split = r.unsigned_int("m_s", hp.min_split);
    if (hp.min_split < 1) throw ConfigError("hyper.m_s", "must be at least 1");
    if (const json* np = r.find("N_p")) {
      hp.partition_size = Reader::as_unsigned(*np, "hyper.N_p");
      if (*hp.partition_size < 1) throw ConfigError("hyper.N_p", "must be at least 1");
    }
    if (const json* l = r.find("L")) {
      hp.landmarks = one_or_many<std::size_t>(*l, "hyper.L", [](const json& v, const std::string& path) {
        const auto n = Reader::as_unsigned(v, path);
        if (n < 1) throw ConfigError(path, "must be at least 1");
        return static_cast<std::size_t>(n);
      });
    }
    if (const json* e = r.find("embedding")) {
      hp.embeddings = one_or_many<EmbeddingSpec>(*e, "hyper.embedding", parse_embedding);
    }
    hp.C = r.positive("C", hp.C);
    hp.c_growth = r.number("c_growth", hp.c_growth);
    if (!(hp.c_growth > 1.0)) throw ConfigError("hyper.c_growth", "must exceed 1");
    hp.max_retries = static_cast<int>(r.unsigned_int("max_retries", static_cast<std::uint64_t>(hp.max_retries)));
    hp.ig_threshold = r.number("delta", hp.ig_threshold);
    hp.shots = r.unsigned_int("M", hp.shots);
    try {
      hp.strategy = parse_pseudo_strategy(r.string("strategy", "es"));
    } catch (const InvalidInput& e) {
      throw ConfigError("hyper.strategy", e.what());
    }
    if (const json* g = r.find("gamma")) {
      if (!g->is_number() || !(g->get<double>() > 0.0)) throw ConfigError("hyper.gamma", "expected a positive number");
      hp.gamma = g->get<double>();
    }
    hp.tol = r.positive("tol", hp.tol);
    hp.max_passes = static_cast<int>(r.unsigned_int("max_passes", static_cast<std::uint64_t>(hp.max_passes)));
    if (hp.max_passes < 1) throw ConfigError("hyper.max_passes", "must be at least 1");
    r.finish();
  }

  if (const json* rl = root.find("relabel")) {
    Reader r(*rl, "relabel");
    c.relabel.strategy = r.string("strategy", "none");
    if (c.relabel.strategy != "none" && c.relabel.strategy != "qk" && c.relabel.strategy != "qrf") {
      throw ConfigError("relabel.strategy", "expected none, qk or qrf");
    }
    if (const json* e = r.find("embedding")) c.relabel.embedding = parse_embedding(*e, "relabel.embedding");
    c.relabel.noise = r.number("noise", c.relabel.noise);
    if (c.relabel.noise < 0.0 || c.relabel.noise > 1.0) throw ConfigError("relabel.noise", "must lie in [0, 1]");
    if (const json* g = r.find("gamma")) {
      if (!g->is_number() || !(g->get<double>() > 0.0)) throw ConfigError("relabel.gamma", "expected a positive number");
      c.relabel.gamma = g->get<double>();
    }
    r.finish();
  }

  if (const json* s = root.find("seeds")) {
    if (!s->is_array() || s->empty()) throw ConfigError("seeds", "expected a non-empty list of integers");
    c.seeds.clear();
    for (std::size_t i = 0; i < s->size(); ++i) {
      c.seeds.push_back(Reader::as_unsigned((*s)[i], "seeds[" + std::to_string(i) + "]"));
    }
  }
  if (const json* o = root.find("outputs")) {
    if (!o->is_string()) throw ConfigError("outputs", "expected a string");
    c.outputs = o->get<std::string>();
  }
  root.finish();

  if (!c.data.path && !c.data.generator) throw ConfigError("data", "a dataset path or generator is required");
  const bool quantum = c.model == ModelKind::Qrf || c.model == ModelKind::Qsvm;
  if (c.hyper.embeddings.empty()) {
    if (quantum) throw ConfigError("hyper.embedding", "required for quantum models");
    if (c.relabel.strategy != "none" && !c.relabel.embedding) {
      throw ConfigError("relabel.embedding", "required when the model has no embedding");
    }
  }
  if (!c.relabel.embedding && !c.hyper.embeddings.empty()) c.relabel.embedding = c.hyper.embeddings.front();
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path.string(), "cannot open config file");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(path.string(), std::string("invalid JSON: ") + e.what());
  }
  return parse_config(j);
}

json to_json(const ExperimentConfig& c) {
  json data = json::object();
  if (c.data.path) data["path"] = c.data.path->string();
  if (c.data.generator) {
    const auto& g = *c.data.generator;
    json gj = {{"kind", g.kind}, {"n", g.n}, {"dim", g.dim}, {"classes", g.classes}, {"spread", g.spread}};
    if (g.seed) gj["seed"] = *g.seed;
    if (g.kind == "dlp") {
      gj["p"] = g.dlp.p;
      gj["g"] = g.dlp.g;
      gj["q"] = g.dlp.q;
      gj["s1"] = g.dlp.s1;
      gj["s2"] = g.dlp.s2;
    }
    data["generator"] = gj;
  }
  data["split"] = c.data.split;

  json embeddings = json::array();
  for (const auto& e : c.hyper.embeddings) embeddings.push_back(io::to_json(e));
  json hyper = {{"T", c.hyper.trees},       {"d", c.hyper.depth},
                {"m_s", c.hyper.min_split}, {"L", c.hyper.landmarks},
                {"embedding", embeddings},  {"C", c.hyper.C},
                {"c_growth", c.hyper.c_growth}, {"max_retries", c.hyper.max_retries},
                {"delta", c.hyper.ig_threshold}, {"M", c.hyper.shots},
                {"strategy", to_string(c.hyper.strategy)}, {"tol", c.hyper.tol},
                {"max_passes", c.hyper.max_passes}};
  hyper["N_p"] = c.hyper.partition_size ? json(*c.hyper.partition_size) : json(nullptr);
  hyper["gamma"] = c.hyper.gamma ? json(*c.hyper.gamma) : json(nullptr);

  json relabel = {{"strategy", c.relabel.strategy}, {"noise", c.relabel.noise}};
  relabel["embedding"] = c.relabel.embedding ? io::to_json(*c.relabel.embedding) : json(nullptr);
  relabel["gamma"] = c.relabel.gamma ? json(*c.relabel.gamma) : json(nullptr);

  return {{"model", to_string(c.model)},
          {"data", data},
          {"preprocess", {{"pca_dim", c.preprocess.pca_dim}, {"normalize", c.preprocess.normalize}}},
          {"relabel", relabel},
          {"hyper", hyper},
          {"seeds", c.seeds},
          {"outputs", c.outputs.string()}};
}

void apply_parameter(ExperimentConfig& c, const std::string& param, double value) {
  auto as_count = [&](double v) {
    if (!(v >= 1.0) || std::floor(v) != v) throw ConfigError(param, "sweep value must be a positive integer");
    return static_cast<std::size_t>(v);
  };
  if (param == "L") {
    c.hyper.landmarks = {as_count(value)};
  } else if (param == "M") {
    if (!(value >= 0.0) || std::floor(value) != value) throw ConfigError(param, "shot count must be a non-negative integer");
    c.hyper.shots = static_cast<std::uint64_t>(value);
  } else if (param == "C") {
    if (!(value > 0.0)) throw ConfigError(param, "C must be positive");
    c.hyper.C = value;
  } else if (param == "d") {
    c.hyper.depth = static_cast<int>(as_count(value));
  } else if (param == "T") {
    c.hyper.trees = as_count(value);
  } else if (param == "N_p") {
    c.hyper.partition_size = as_count(value);
  } else {
    throw ConfigError("param", "unknown sweep parameter '" + param + "' (expected L, M, C, d, T or N_p)");
  }
}

}  // namespace qforest::app
