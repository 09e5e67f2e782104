#include "qforest/kernel.hpp"

#include <cmath>
#include <mutex>
#include <stdexcept>

#include "qforest/error.hpp"
#include "qforest/linalg.hpp"

namespace qforest {

namespace {

std::vector<std::int64_t> as_field_elements(std::span<const double> x) {
  std::vector<std::int64_t> out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = std::round(x[i]);
    if (std::abs(r - x[i]) > 1e-9) throw InvalidInput("DLP kernel inputs must be integers");
    out[i] = static_cast<std::int64_t>(r);
  }
  return out;
}

double dlp_exact(std::span<const double> x1, std::span<const double> x2, const DlpIntervalEmbedding& e) {
  if (x1.size() != static_cast<std::size_t>(e.dims) || x2.size() != static_cast<std::size_t>(e.dims)) {
    throw InvalidInput("DLP kernel input dimension mismatch");
  }
  const auto a = as_field_elements(x1);
  const auto b = as_field_elements(x2);
  return dlp_kernel(a, b, *e.table, e.q);
}

// Kernel evaluation with each instance's state prepared at most once.
class StateSource {
 public:
  StateSource(const Eigen::MatrixXd& X, const EmbeddingSpec& spec) : X_(X), spec_(spec) {}

  double exact(std::size_t i, std::size_t j) {
    if (!spec_.is_circuit()) {
      const Eigen::VectorXd a = X_.row(static_cast<Eigen::Index>(i));
      const Eigen::VectorXd b = X_.row(static_cast<Eigen::Index>(j));
      return dlp_exact(as_span(a), as_span(b), std::get<DlpIntervalEmbedding>(spec_.variant()));
    }
    return fidelity(state(i), state(j));
  }

 private:
  const StateVector& state(std::size_t i) {
    auto it = states_.find(i);
    if (it == states_.end()) {
      const Eigen::VectorXd x = X_.row(static_cast<Eigen::Index>(i));
      it = states_.emplace(i, embed(x, spec_)).first;
    }
    return it->second;
  }

  const Eigen::MatrixXd& X_;
  const EmbeddingSpec& spec_;
  std::unordered_map<std::size_t, StateVector> states_;
};

}  // namespace

double rbf_kernel(std::span<const double> x1, std::span<const double> x2, double gamma) {
  if (x1.size() != x2.size()) throw InvalidInput("RBF kernel dimension mismatch");
  if (!(gamma > 0.0)) throw InvalidInput("RBF gamma must be positive");
  double d2 = 0.0;
  for (std::size_t i = 0; i < x1.size(); ++i) d2 += (x1[i] - x2[i]) * (x1[i] - x2[i]);
  return std::exp(-gamma * d2);
}

std::int64_t interval_overlap(std::int64_t a, std::int64_t b, std::int64_t len, std::int64_t m) {
  const std::int64_t d = (((b - a) % m) + m) % m;
  return std::min(len, std::max<std::int64_t>(0, len - d) + std::max<std::int64_t>(0, len - (m - d)));
}

double dlp_kernel(std::span<const std::int64_t> x1, std::span<const std::int64_t> x2, const DiscreteLogTable& table,
                  int q) {
  if (x1.size() != x2.size() || x1.empty()) throw InvalidInput("DLP kernel dimension mismatch");
  const std::int64_t len = std::int64_t{1} << q;
  if (q < 0 || len > table.order()) throw InvalidInput("need 1 <= 2^q <= p - 1");
  double value = 1.0;
  for (std::size_t k = 0; k < x1.size(); ++k) {
    const std::int64_t overlap = interval_overlap(table.log(x1[k]), table.log(x2[k]), len, table.order());
    const double ratio = static_cast<double>(overlap) / static_cast<double>(len);
    value *= ratio * ratio;
  }
  return value;
}

double dlp_kernel(std::span<const std::int64_t> x1, std::span<const std::int64_t> x2, std::int64_t p, std::int64_t g,
                  int q) {
  return dlp_kernel(x1, x2, DiscreteLogTable(p, g), q);
}

double exact_kernel(std::span<const double> x1, std::span<const double> x2, const EmbeddingSpec& spec) {
  if (const auto* dlp = std::get_if<DlpIntervalEmbedding>(&spec.variant())) return dlp_exact(x1, x2, *dlp);
  return fidelity(embed(x1, spec), embed(x2, spec));
}

double quantum_kernel(std::span<const double> x1, std::span<const double> x2, const EmbeddingSpec& spec,
                      const ShotPlan& plan) {
  return sample_fidelity(exact_kernel(x1, x2, spec), plan);
}

KernelId kernel_id(const EmbeddingSpec& spec, const ShotPlan& plan) { return {spec.id(), plan.descriptor()}; }

ShotPlan pair_plan(const ShotPlan& plan, const EmbeddingSpec& spec, std::size_t i, std::size_t j) {
  const auto lo = static_cast<std::uint64_t>(std::min(i, j));
  const auto hi = static_cast<std::uint64_t>(std::max(i, j));
  return plan.with_key(plan.key.derive(spec.id(), lo, hi));
}

ShotPlan adhoc_plan(const ShotPlan& plan, const EmbeddingSpec& spec, std::span<const double> x,
                    std::size_t landmark_id) {
  return plan.with_key(
      plan.key.derive("adhoc").derive(spec.id(), static_cast<std::uint64_t>(landmark_id), hash_doubles(x)));
}

std::size_t KernelCache::KeyHash::operator()(const Key& k) const noexcept {
  std::uint64_t h = mix64(k.kernel.embedding ^ mix64(k.kernel.plan));
  h = mix64(h ^ static_cast<std::uint64_t>(k.lo));
  h = mix64(h ^ static_cast<std::uint64_t>(k.hi));
  return static_cast<std::size_t>(h);
}

std::optional<double> KernelCache::find(const KernelId& kernel, std::size_t i, std::size_t j) const {
  const Key key{kernel, std::min(i, j), std::max(i, j)};
  std::shared_lock lock(mutex_);
  const auto it = values_.find(key);
  if (it == values_.end()) return std::nullopt;
  return it->second;
}

double KernelCache::insert(const KernelId& kernel, std::size_t i, std::size_t j, double value) {
  const Key key{kernel, std::min(i, j), std::max(i, j)};
  std::unique_lock lock(mutex_);
  const auto [it, inserted] = values_.emplace(key, value);
  if (inserted) {
    unique_.fetch_add(1);
  } else if (it->second != value) {
    throw std::logic_error("kernel cache: conflicting values written for the same pair");
  }
  return it->second;
}

std::size_t KernelCache::size() const {
  std::shared_lock lock(mutex_);
  return values_.size();
}

std::vector<KernelCache::Key> KernelCache::keys() const {
  std::shared_lock lock(mutex_);
  std::vector<Key> out;
  out.reserve(values_.size());
  for (const auto& [key, value] : values_) out.push_back(key);
  return out;
}

GramBlock gram_block(const Eigen::MatrixXd& X, std::span<const std::size_t> rows,
                     std::span<const std::size_t> landmarks, const EmbeddingSpec& spec, const ShotPlan& plan,
                     KernelCache& cache) {
  const auto n_data = static_cast<std::size_t>(X.rows());
  std::vector<bool> is_landmark(n_data, false);
  for (std::size_t id : landmarks) {
    if (id >= n_data) throw InvalidInput("landmark index out of range");
    if (is_landmark[id]) throw InvalidInput("duplicate landmark index");
    is_landmark[id] = true;
  }
  if (landmarks.empty()) throw InvalidInput("at least one landmark is required");

  GramBlock block;
  block.landmark_count = landmarks.size();
  block.row_ids.assign(landmarks.begin(), landmarks.end());
  for (std::size_t id : rows) {
    if (id >= n_data) throw InvalidInput("row index out of range");
    if (!is_landmark[id]) block.row_ids.push_back(id);
  }

  const KernelId kid = kernel_id(spec, plan);
  StateSource source(X, spec);
  const auto n = static_cast<Eigen::Index>(block.row_ids.size());
  const auto l = static_cast<Eigen::Index>(landmarks.size());
  block.entries.resize(n, l);
  for (Eigen::Index r = 0; r < n; ++r) {
    const std::size_t i = block.row_ids[static_cast<std::size_t>(r)];
    for (Eigen::Index c = 0; c < l; ++c) {
      const std::size_t j = landmarks[static_cast<std::size_t>(c)];
      if (i == j) {
        block.entries(r, c) = 1.0;
        continue;
      }
      cache.count_request();
      if (auto hit = cache.find(kid, i, j)) {
        block.entries(r, c) = *hit;
        continue;
      }
      const double value = sample_fidelity(source.exact(i, j), pair_plan(plan, spec, i, j));
      block.entries(r, c) = cache.insert(kid, i, j, value);
    }
  }
  return block;
}

Eigen::MatrixXd exact_gram(const Eigen::MatrixXd& X, const EmbeddingSpec& spec) {
  StateSource source(X, spec);
  const Eigen::Index n = X.rows();
  Eigen::MatrixXd K(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    K(i, i) = 1.0;
    for (Eigen::Index j = i + 1; j < n; ++j) {
      K(i, j) = K(j, i) = source.exact(static_cast<std::size_t>(i), static_cast<std::size_t>(j));
    }
  }
  return K;
}

Eigen::MatrixXd exact_cross_gram(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B, const EmbeddingSpec& spec) {
  Eigen::MatrixXd stacked(A.rows() + B.rows(), A.cols());
  if (A.cols() != B.cols()) throw InvalidInput("cross Gram dimension mismatch");
  stacked << A, B;
  StateSource source(stacked, spec);
  Eigen::MatrixXd K(A.rows(), B.rows());
  for (Eigen::Index i = 0; i < A.rows(); ++i) {
    for (Eigen::Index j = 0; j < B.rows(); ++j) {
      K(i, j) = source.exact(static_cast<std::size_t>(i), static_cast<std::size_t>(A.rows() + j));
    }
  }
  return K;
}

Eigen::MatrixXd rbf_gram(const Eigen::MatrixXd& X, double gamma) {
  const Eigen::Index n = X.rows();
  Eigen::MatrixXd K(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    K(i, i) = 1.0;
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const Eigen::VectorXd a = X.row(i);
      const Eigen::VectorXd b = X.row(j);
      K(i, j) = K(j, i) = rbf_kernel(a, b, gamma);
    }
  }
  return K;
}

double kernel_target_alignment(const Eigen::MatrixXd& K, std::span<const double> y) {
  linalg::require_symmetric(K);
  if (static_cast<std::size_t>(K.rows()) != y.size()) throw InvalidInput("label count does not match kernel size");
  const double frobenius = K.norm();
  if (frobenius == 0.0) throw UndefinedValue("kernel target alignment of a zero matrix");
  const Eigen::Map<const Eigen::VectorXd> labels(y.data(), static_cast<Eigen::Index>(y.size()));
  return labels.dot(K * labels) / (static_cast<double>(y.size()) * frobenius);
}

double model_complexity(const Eigen::MatrixXd& K, std::span<const double> y, double rel_cutoff) {
  if (K.rows() != K.cols()) throw InvalidInput("model complexity needs a square matrix");
  if (static_cast<std::size_t>(K.rows()) != y.size()) throw InvalidInput("label count does not match kernel size");
  const Eigen::Map<const Eigen::VectorXd> labels(y.data(), static_cast<Eigen::Index>(y.size()));
  return std::abs(labels.dot(linalg::pinv(K, rel_cutoff) * labels));
}

}  // namespace qforest
