#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <string>
#include <vector>

#include "qforest/kernel.hpp"
#include "qforest/qsim.hpp"
#include "qforest/rng.hpp"

namespace qforest {

/// L distinct indices drawn uniformly from [0, n_rows).
std::vector<std::size_t> select_landmarks(std::size_t n_rows, std::size_t count, StreamKey key);

struct InverseSqrt {
  Eigen::MatrixXd transform;  // U_r diag(lambda_r^{-1/2}) U_r^T
  std::size_t rank = 0;
};

/// Rank-truncated W^{-1/2}: keeps eigenvalues above rel_cutoff * lambda_max.
/// Throws DegenerateError when nothing survives.
InverseSqrt inv_sqrt(const Eigen::MatrixXd& W, double rel_cutoff = 1e-10);

/// Feature map x -> W_r^{-1/2} [k(x, z_1), ..., k(x, z_L)].
struct NystromMap {
  std::vector<std::size_t> landmark_ids;
  Eigen::MatrixXd landmark_vectors;  // L x D raw features
  Eigen::MatrixXd transform;         // L x L, symmetric
  std::size_t rank = 0;
  EmbeddingSpec spec;
  ShotPlan plan;

  std::size_t landmark_count() const { return landmark_ids.size(); }
};

NystromMap make_nystrom_map(const GramBlock& block, const Eigen::MatrixXd& X, const EmbeddingSpec& spec,
                            const ShotPlan& plan, double rel_cutoff = 1e-10);

Eigen::VectorXd map_point(const Eigen::VectorXd& kvec, const NystromMap& map);

/// Maps every row of an N x L kernel block; returns N x L features.
Eigen::MatrixXd map_rows(const Eigen::MatrixXd& kernel_rows, const NystromMap& map);

/// Kernel values of an unindexed point against the map's landmarks, using
/// the map's embedding and shot plan.
Eigen::VectorXd landmark_kernels(const Eigen::VectorXd& x, const NystromMap& map);

/// G W^+ G^T in the block's row order.
Eigen::MatrixXd complete(const GramBlock& block, double rel_cutoff = 1e-10);

/// ||A - B||_2.
double spectral_error(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B);

/// Nystrom-only error bound for unit-diagonal kernels holding with
/// probability >= 1 - delta: (N / sqrt(L)) (1 + sqrt(8 ln(1/delta))).
double nystrom_error_bound(std::size_t n, std::size_t l, double delta = 0.1);

struct ErrorHarnessRow {
  std::uint64_t shots = 0;  // 0 = exact estimation
  std::size_t landmarks = 0;
  std::size_t points = 0;
  double mean_error = 0.0;
  double std_error = 0.0;
  double bound = 0.0;
  std::vector<double> errors;  // per seed, in seed order
};

/// For each shot count (0 = exact) and seed: draw N points uniformly from
/// the embedding's input domain, pick L landmarks, complete the kernel from
/// the estimated N x L block and measure ||K - K_completed||_2.
std::vector<ErrorHarnessRow> error_harness(std::size_t n, std::size_t l, const std::vector<std::uint64_t>& shots,
                                           const EmbeddingSpec& spec, const std::vector<std::uint64_t>& seeds,
                                           double delta = 0.1, std::size_t threads = 1);

/// Columns: M, L, N, mean_err, std_err, bound (M = 0 is exact estimation).
std::string error_harness_csv(const std::vector<ErrorHarnessRow>& rows);

/// Uniform random inputs for an embedding: [0, pi]^D for circuits, Z_p^*
/// elements for DLP interval specs.
Eigen::MatrixXd random_inputs(std::size_t n, const EmbeddingSpec& spec, StreamKey key, std::size_t hea_dim = 0);

}  // namespace qforest
