#include "qforest/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numbers>
#include <numeric>
#include <sstream>

#include "qforest/error.hpp"
#include "qforest/kernel.hpp"
#include "qforest/linalg.hpp"

namespace qforest {

std::size_t Dataset::num_classes() const {
  if (labels.empty()) return 0;
  return static_cast<std::size_t>(*std::max_element(labels.begin(), labels.end())) + 1;
}

Dataset Dataset::subset(const std::vector<std::size_t>& ids) const {
  Dataset out;
  out.meta = meta;
  out.features.resize(static_cast<Eigen::Index>(ids.size()), features.cols());
  for (std::size_t r = 0; r < ids.size(); ++r) {
    if (ids[r] >= size()) throw InvalidInput("subset index out of range");
    out.features.row(static_cast<Eigen::Index>(r)) = features.row(static_cast<Eigen::Index>(ids[r]));
    out.labels.push_back(labels[ids[r]]);
  }
  return out;
}

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    out.push_back(trim(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

template <typename T>
bool parse_number(std::string_view s, T& out) {
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

}  // namespace

Dataset parse_csv(const std::string& text) {
  Dataset data;
  std::vector<std::vector<double>> rows;
  std::istringstream in(text);
  std::string raw;
  std::size_t line_no = 0;
  std::size_t columns = 0;
  bool have_header = false;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string_view line = trim(raw);
    if (line.empty()) continue;
    if (line.front() == '#') {
      line.remove_prefix(1);
      if (!line.empty() && line.front() == ' ') line.remove_prefix(1);
      data.meta.comments.emplace_back(line);
      continue;
    }
    const auto fields = split_fields(line);
    if (!have_header) {
      if (fields.size() < 2) throw ParseError(line_no, "header needs at least one feature and a label column");
      if (fields.back() != "label") throw ParseError(line_no, "last header column must be named 'label'");
      for (std::size_t c = 0; c + 1 < fields.size(); ++c) data.meta.feature_names.emplace_back(fields[c]);
      columns = fields.size();
      have_header = true;
      continue;
    }
    if (fields.size() != columns) {
      throw ParseError(line_no, "expected " + std::to_string(columns) + " columns, found " + std::to_string(fields.size()));
    }
    std::vector<double> row(columns - 1);
    for (std::size_t c = 0; c + 1 < columns; ++c) {
      if (fields[c].empty()) throw ParseError(line_no, "missing value in column " + std::to_string(c + 1));
      if (!parse_number(fields[c], row[c]) || !std::isfinite(row[c])) {
        throw ParseError(line_no, "not a finite number: '" + std::string(fields[c]) + "'");
      }
    }
    int label = 0;
    if (fields.back().empty()) throw ParseError(line_no, "missing label");
    if (!parse_number(fields.back(), label) || label < 0) {
      throw ParseError(line_no, "label must be a non-negative integer: '" + std::string(fields.back()) + "'");
    }
    rows.push_back(std::move(row));
    data.labels.push_back(label);
  }
  if (!have_header) throw ParseError(line_no, "missing header row");
  data.features.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(columns - 1));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (std::size_t c = 0; c + 1 < columns; ++c) {
      data.features(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
    }
  }
  return data;
}

Dataset load_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidInput("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_csv(buf.str());
}

std::string to_csv(const Dataset& data) {
  std::string out;
  for (const auto& c : data.meta.comments) out += "# " + c + "\n";
  const auto d = static_cast<std::size_t>(data.features.cols());
  for (std::size_t c = 0; c < d; ++c) {
    out += c < data.meta.feature_names.size() ? data.meta.feature_names[c] : "x" + std::to_string(c);
    out += ',';
  }
  out += "label\n";
  for (std::size_t r = 0; r < data.size(); ++r) {
    for (std::size_t c = 0; c < d; ++c) {
      out += format_double(data.features(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)));
      out += ',';
    }
    out += std::to_string(data.labels[r]);
    out += '\n';
  }
  return out;
}

void save_csv(const Dataset& data, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InvalidInput("cannot write " + path.string());
  out << to_csv(data);
}

PcaResult pca(const Eigen::MatrixXd& X, std::size_t target_dim) {
  const auto dim = static_cast<std::size_t>(X.cols());
  if (target_dim < 1 || target_dim > dim) throw InvalidInput("PCA target dimension must lie in [1, D]");
  if (X.rows() < 2) throw InvalidInput("PCA needs at least two rows");
  PcaResult r;
  r.mean = X.colwise().mean().transpose();
  const Eigen::MatrixXd centred = X.rowwise() - r.mean.transpose();
  const Eigen::MatrixXd cov = centred.transpose() * centred / static_cast<double>(X.rows() - 1);
  const linalg::Eigh e = linalg::eigh(0.5 * (cov + cov.transpose()));
  r.variances = e.values;
  r.components = e.vectors.leftCols(static_cast<Eigen::Index>(target_dim));
  for (Eigen::Index c = 0; c < r.components.cols(); ++c) {
    Eigen::Index arg = 0;
    r.components.col(c).cwiseAbs().maxCoeff(&arg);
    if (r.components(arg, c) < 0.0) r.components.col(c) *= -1.0;
  }
  r.projected = centred * r.components;
  return r;
}

Eigen::MatrixXd pca_reduce(const Eigen::MatrixXd& X, std::size_t target_dim) { return pca(X, target_dim).projected; }

Normalisation normalize_to_pi(const Eigen::MatrixXd& X) {
  if (X.rows() == 0) throw InvalidInput("cannot normalise an empty matrix");
  Normalisation out;
  for (Eigen::Index c = 0; c < X.cols(); ++c) {
    const double lo = X.col(c).minCoeff();
    const double hi = X.col(c).maxCoeff();
    if (hi > lo) {
      out.kept.push_back(static_cast<std::size_t>(c));
      out.min.push_back(lo);
      out.max.push_back(hi);
    } else {
      out.dropped.push_back(static_cast<std::size_t>(c));
    }
  }
  if (out.kept.empty()) throw DegenerateError("every feature is constant");
  out.features.resize(X.rows(), static_cast<Eigen::Index>(out.kept.size()));
  for (std::size_t k = 0; k < out.kept.size(); ++k) {
    const double span = out.max[k] - out.min[k];
    for (Eigen::Index r = 0; r < X.rows(); ++r) {
      const double v = std::numbers::pi * (X(r, static_cast<Eigen::Index>(out.kept[k])) - out.min[k]) / span;
      out.features(r, static_cast<Eigen::Index>(k)) = std::clamp(v, 0.0, std::numbers::pi);
    }
  }
  return out;
}

QkRelabel relabel_qk_from_grams(const Eigen::MatrixXd& KQ, const Eigen::MatrixXd& KC, double noise, StreamKey key) {
  if (KQ.rows() != KC.rows() || KQ.rows() != KQ.cols() || KC.rows() != KC.cols()) {
    throw InvalidInput("kernel matrices must be square and of equal size");
  }
  if (noise < 0.0 || noise > 1.0) throw InvalidInput("noise must lie in [0, 1]");
  const Eigen::Index n = KQ.rows();
  if (n == 0) throw InvalidInput("empty kernel matrices");
  linalg::require_symmetric(KQ);
  linalg::require_symmetric(KC);

  const double ridge = 1e-8 * KC.trace() / static_cast<double>(n);
  const Eigen::MatrixXd kc = KC + ridge * Eigen::MatrixXd::Identity(n, n);
  const linalg::Eigh ec = linalg::eigh(kc);
  const double lmin = ec.values(n - 1);
  if (!(lmin > 1e-14 * std::max(1.0, ec.values(0)))) throw DegenerateError("classical Gram is singular after ridge");
  const Eigen::MatrixXd kc_inv = ec.vectors * ec.values.cwiseInverse().asDiagonal() * ec.vectors.transpose();

  const Eigen::MatrixXd root = linalg::sqrt_psd(KQ);
  Eigen::MatrixXd m = root * kc_inv * root;
  m = 0.5 * (m + m.transpose());
  const linalg::Eigh e = linalg::eigh(m);

  Eigen::VectorXd top = e.vectors.col(0);
  Eigen::Index arg = 0;
  top.cwiseAbs().maxCoeff(&arg);
  if (top(arg) < 0.0) top = -top;

  QkRelabel out;
  out.top_eigenvalue = e.values(0);
  out.phi = root * top;
  Stream rng(key);
  for (Eigen::Index i = 0; i < n; ++i) {
    int sign = out.phi(i) >= 0.0 ? 1 : -1;
    if (rng.uniform() >= 1.0 - noise) sign = rng.uniform() < 0.5 ? 1 : -1;
    out.labels.push_back(sign > 0 ? 1 : 0);
  }
  return out;
}

std::vector<int> relabel_qk(const Eigen::MatrixXd& X, const EmbeddingSpec& spec, double rbf_gamma, double noise,
                            StreamKey key) {
  return relabel_qk_from_grams(exact_gram(X, spec), rbf_gram(X, rbf_gamma), noise, key).labels;
}

double quantile_sorted(const std::vector<double>& sorted, double q) {
  if (sorted.empty()) throw InvalidInput("quantile of an empty sample");
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

std::vector<int> labels_from_projection(const std::vector<double>& projection) {
  std::vector<double> sorted = projection;
  std::sort(sorted.begin(), sorted.end());
  const double q1 = quantile_sorted(sorted, 0.25);
  const double q2 = quantile_sorted(sorted, 0.5);
  const double q3 = quantile_sorted(sorted, 0.75);
  std::vector<int> labels;
  labels.reserve(projection.size());
  for (double p : projection) labels.push_back((p < q1 || (q2 <= p && p < q3)) ? 0 : 1);
  return labels;
}

std::vector<int> relabel_qrf(const Eigen::MatrixXd& X, const EmbeddingSpec& spec, StreamKey key) {
  const auto n = static_cast<std::size_t>(X.rows());
  if (n < 4) throw InvalidInput("relabelling needs at least four points");
  constexpr int kAttempts = 5;
  for (int a = 0; a < kAttempts; ++a) {
    Stream rng(key.derive(static_cast<std::uint64_t>(a)));
    const std::size_t first = rng.below(n);
    std::size_t second = rng.below(n - 1);
    if (second >= first) ++second;
    Eigen::MatrixXd pivots(2, X.cols());
    pivots.row(0) = X.row(static_cast<Eigen::Index>(first));
    pivots.row(1) = X.row(static_cast<Eigen::Index>(second));
    const Eigen::MatrixXd k = exact_cross_gram(X, pivots, spec);
    std::vector<double> projection(n);
    for (std::size_t i = 0; i < n; ++i) {
      projection[i] = k(static_cast<Eigen::Index>(i), 1) - k(static_cast<Eigen::Index>(i), 0);
    }
    const auto [lo, hi] = std::minmax_element(projection.begin(), projection.end());
    if (*hi - *lo > 1e-12) return labels_from_projection(projection);
  }
  throw DegenerateError("projection is constant for every pivot pair");
}

void DlpConcept::validate() const {
  if (p < 5 || p > 1000) throw InvalidInput("DLP concept needs a prime 5 <= p <= 1000");
  if (!is_prime(p)) throw InvalidInput("DLP modulus is not prime");
  if (!is_generator(p, g)) throw InvalidInput("g does not generate Z_p^*");
  if (q < 0 || (std::int64_t{1} << q) > p - 1) throw InvalidInput("DLP interval exponent must satisfy 1 <= 2^q <= p-1");
  if (s1 < 1 || s1 > p - 1 || s2 < 1 || s2 > p - 1) throw InvalidInput("interval anchors must lie in Z_p^*");
}

bool in_log_interval(std::int64_t log_value, std::int64_t s, std::int64_t p) {
  const std::int64_t m = p - 1;
  const std::int64_t offset = ((log_value - s) % m + m) % m;
  return offset <= (p - 3) / 2;
}

int dlp_concept_label(std::int64_t x0, std::int64_t x1, const DlpConcept& dlp, const DiscreteLogTable& table) {
  const bool a = in_log_interval(table.log(x0), dlp.s1, dlp.p);
  const bool b = in_log_interval(table.log(x1), dlp.s2, dlp.p);
  return a != b ? 1 : -1;
}

Dataset gen_dlp_dataset(const DlpConcept& dlp, std::size_t n, StreamKey key) {
  dlp.validate();
  if (n < 4) throw InvalidInput("DLP dataset needs at least four points");
  const DiscreteLogTable table(dlp.p, dlp.g);
  Stream rng(key);
  Dataset data;
  data.features.resize(static_cast<Eigen::Index>(n), 2);
  data.meta.feature_names = {"x0", "x1"};
  for (std::size_t i = 0; i < n; ++i) {
    const auto x0 = static_cast<std::int64_t>(1 + rng.below(static_cast<std::uint64_t>(dlp.p - 1)));
    const auto x1 = static_cast<std::int64_t>(1 + rng.below(static_cast<std::uint64_t>(dlp.p - 1)));
    data.features(static_cast<Eigen::Index>(i), 0) = static_cast<double>(x0);
    data.features(static_cast<Eigen::Index>(i), 1) = static_cast<double>(x1);
    data.labels.push_back(dlp_concept_label(x0, x1, dlp, table) > 0 ? 1 : 0);
  }
  std::ostringstream desc;
  desc << "discrete-log concept p=" << dlp.p << " g=" << dlp.g << " q=" << dlp.q << " s1=" << dlp.s1
       << " s2=" << dlp.s2;
  data.meta.comments.push_back(desc.str());
  return data;
}

SplitSets split(const Dataset& data, double ratio, StreamKey key) {
  if (!(ratio > 0.0 && ratio < 1.0)) throw InvalidInput("split ratio must lie in (0, 1)");
  const std::size_t n = data.size();
  const auto total_train = static_cast<std::size_t>(std::llround(ratio * static_cast<double>(n)));
  Stream rng(key);

  const std::size_t classes = data.num_classes();
  std::vector<std::vector<std::size_t>> by_class(classes);
  for (std::size_t i = 0; i < n; ++i) by_class[static_cast<std::size_t>(data.labels[i])].push_back(i);
  bool stratified = true;
  for (const auto& members : by_class) {
    if (!members.empty() && members.size() < 2) stratified = false;
  }

  std::vector<std::size_t> train_ids;
  std::vector<std::size_t> test_ids;
  if (stratified) {
    std::vector<std::size_t> take(classes);
    std::vector<std::pair<double, std::size_t>> remainders;
    std::size_t assigned = 0;
    for (std::size_t c = 0; c < classes; ++c) {
      const double exact = ratio * static_cast<double>(by_class[c].size());
      take[c] = static_cast<std::size_t>(std::floor(exact));
      assigned += take[c];
      remainders.emplace_back(exact - std::floor(exact), c);
    }
    std::stable_sort(remainders.begin(), remainders.end(),
                     [](const auto& a, const auto& b) { return a.first > b.first; });
    for (std::size_t k = 0; assigned < total_train && k < remainders.size(); ++k, ++assigned) {
      ++take[remainders[k].second];
    }
    for (std::size_t c = 0; c < classes; ++c) {
      auto members = by_class[c];
      rng.shuffle(members);
      train_ids.insert(train_ids.end(), members.begin(), members.begin() + static_cast<std::ptrdiff_t>(take[c]));
      test_ids.insert(test_ids.end(), members.begin() + static_cast<std::ptrdiff_t>(take[c]), members.end());
    }
  } else {
    std::vector<std::size_t> all(n);
    std::iota(all.begin(), all.end(), 0);
    rng.shuffle(all);
    train_ids.assign(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(total_train));
    test_ids.assign(all.begin() + static_cast<std::ptrdiff_t>(total_train), all.end());
  }
  rng.shuffle(train_ids);
  rng.shuffle(test_ids);
  return {data.subset(train_ids), data.subset(test_ids), stratified};
}

}  // namespace qforest
