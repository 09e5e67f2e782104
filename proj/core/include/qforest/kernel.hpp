#pragma once

#include <Eigen/Core>
#include <atomic>
#include <cstdint>
#include <optional>
#include <shared_mutex>
#include <span>
#include <unordered_map>
#include <vector>

#include "qforest/qsim.hpp"

namespace qforest {

double rbf_kernel(std::span<const double> x1, std::span<const double> x2, double gamma);

/// Number of points shared by the circular intervals [a, a+len-1] and
/// [b, b+len-1] on Z_m.
std::int64_t interval_overlap(std::int64_t a, std::int64_t b, std::int64_t len, std::int64_t m);

/// Product over coordinates of (overlap / 2^q)^2, where each coordinate
/// contributes the interval [log_g x, log_g x + 2^q - 1] mod (p - 1).
double dlp_kernel(std::span<const std::int64_t> x1, std::span<const std::int64_t> x2, const DiscreteLogTable& table,
                  int q);
double dlp_kernel(std::span<const std::int64_t> x1, std::span<const std::int64_t> x2, std::int64_t p, std::int64_t g,
                  int q);

/// Noise-free kernel value for any embedding.
double exact_kernel(std::span<const double> x1, std::span<const double> x2, const EmbeddingSpec& spec);

/// Exact fidelity, or a shot-sampled estimate drawn from plan.key. Callers
/// that need per-pair streams derive the key themselves (see pair_plan).
double quantum_kernel(std::span<const double> x1, std::span<const double> x2, const EmbeddingSpec& spec,
                      const ShotPlan& plan);

inline std::span<const double> as_span(const Eigen::VectorXd& v) {
  return {v.data(), static_cast<std::size_t>(v.size())};
}

inline StateVector embed(const Eigen::VectorXd& x, const EmbeddingSpec& spec) { return embed(as_span(x), spec); }
inline double rbf_kernel(const Eigen::VectorXd& x1, const Eigen::VectorXd& x2, double gamma) {
  return rbf_kernel(as_span(x1), as_span(x2), gamma);
}
inline double exact_kernel(const Eigen::VectorXd& x1, const Eigen::VectorXd& x2, const EmbeddingSpec& spec) {
  return exact_kernel(as_span(x1), as_span(x2), spec);
}
inline double quantum_kernel(const Eigen::VectorXd& x1, const Eigen::VectorXd& x2, const EmbeddingSpec& spec,
                             const ShotPlan& plan) {
  return quantum_kernel(as_span(x1), as_span(x2), spec, plan);
}

struct KernelId {
  std::uint64_t embedding = 0;
  std::uint64_t plan = 0;
  friend bool operator==(const KernelId&, const KernelId&) = default;
};

KernelId kernel_id(const EmbeddingSpec& spec, const ShotPlan& plan);

/// Shot plan whose stream belongs to the unordered instance pair (i, j).
ShotPlan pair_plan(const ShotPlan& plan, const EmbeddingSpec& spec, std::size_t i, std::size_t j);

/// Shot plan for an instance without an id against a stored landmark.
ShotPlan adhoc_plan(const ShotPlan& plan, const EmbeddingSpec& spec, std::span<const double> x,
                    std::size_t landmark_id);

/// Estimates keyed by (kernel, unordered instance pair). Values are
/// write-once: a second writer must supply the identical value. Safe for
/// concurrent readers and writers.
class KernelCache {
 public:
  struct Key {
    KernelId kernel;
    std::size_t lo;
    std::size_t hi;
    friend bool operator==(const Key&, const Key&) = default;
  };

  KernelCache() = default;
  KernelCache(const KernelCache&) = delete;
  KernelCache& operator=(const KernelCache&) = delete;

  std::optional<double> find(const KernelId& kernel, std::size_t i, std::size_t j) const;
  /// Stores the value unless present and returns the stored value. Throws
  /// std::logic_error if a different value was stored for the key.
  double insert(const KernelId& kernel, std::size_t i, std::size_t j, double value);

  void count_request() { total_requests_.fetch_add(1, std::memory_order_relaxed); }

  std::size_t unique_estimations() const { return unique_.load(); }
  std::size_t total_requests() const { return total_requests_.load(); }
  std::size_t size() const;
  std::vector<Key> keys() const;

 private:
  struct KeyHash {
    std::size_t operator()(const Key& k) const noexcept;
  };

  mutable std::shared_mutex mutex_;
  std::unordered_map<Key, double, KeyHash> values_;
  std::atomic<std::size_t> unique_{0};
  std::atomic<std::size_t> total_requests_{0};
};

/// Measured kernel columns against L landmarks. Rows are reordered so the
/// landmarks come first; row r holds instance row_ids[r].
struct GramBlock {
  Eigen::MatrixXd entries;
  std::vector<std::size_t> row_ids;
  std::size_t landmark_count = 0;

  Eigen::MatrixXd w() const { return entries.topRows(static_cast<Eigen::Index>(landmark_count)); }
};

/// Fills the N x L block for instance ids `rows` (row indices of X) against
/// `landmarks`, cache first. Diagonal pairs are 1 without estimation.
GramBlock gram_block(const Eigen::MatrixXd& X, std::span<const std::size_t> rows,
                     std::span<const std::size_t> landmarks, const EmbeddingSpec& spec, const ShotPlan& plan,
                     KernelCache& cache);

/// Noise-free full Gram matrix of the rows of X (no cache, no accounting).
Eigen::MatrixXd exact_gram(const Eigen::MatrixXd& X, const EmbeddingSpec& spec);

/// Noise-free kernel values between the rows of A and the rows of B.
Eigen::MatrixXd exact_cross_gram(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B, const EmbeddingSpec& spec);

Eigen::MatrixXd rbf_gram(const Eigen::MatrixXd& X, double gamma);

/// y^T K y / (N ||K||_F) for labels in {-1, +1}.
double kernel_target_alignment(const Eigen::MatrixXd& K, std::span<const double> y);

/// |y^T K^+ y| with the pseudo-inverse from a symmetric eigendecomposition.
double model_complexity(const Eigen::MatrixXd& K, std::span<const double> y, double rel_cutoff = 1e-10);

}  // namespace qforest
