#include "qforest/nystrom.hpp"

#include <cmath>
#include <numbers>
#include <numeric>
#include <sstream>

#include "qforest/error.hpp"
#include "qforest/linalg.hpp"
#include "qforest/parallel.hpp"

namespace qforest {

std::vector<std::size_t> select_landmarks(std::size_t n_rows, std::size_t count, StreamKey key) {
  if (count < 1) throw InvalidInput("need at least one landmark");
  if (count > n_rows) throw InvalidInput("more landmarks requested than rows available");
  std::vector<std::size_t> pool(n_rows);
  std::iota(pool.begin(), pool.end(), std::size_t{0});
  Stream stream(key);
  // Partial Fisher-Yates: the first `count` slots are a uniform sample.
  for (std::size_t i = 0; i < count; ++i) {
    const std::size_t j = i + stream.below(n_rows - i);
    std::swap(pool[i], pool[j]);
  }
  pool.resize(count);
  return pool;
}

InverseSqrt inv_sqrt(const Eigen::MatrixXd& W, double rel_cutoff) {
  const linalg::Eigh e = linalg::eigh(W);
  const double largest = e.values.size() ? e.values(0) : 0.0;
  if (!(largest > 0.0)) throw DegenerateError("landmark block has no positive eigenvalue");

  InverseSqrt out;
  Eigen::VectorXd scale = Eigen::VectorXd::Zero(e.values.size());
  for (Eigen::Index i = 0; i < scale.size(); ++i) {
    // Negative eigenvalues from shot noise fall below the cutoff and are dropped.
    if (e.values(i) > rel_cutoff * largest) {
      scale(i) = 1.0 / std::sqrt(e.values(i));
      ++out.rank;
    }
  }
  out.transform = e.vectors * scale.asDiagonal() * e.vectors.transpose();
  out.transform = 0.5 * (out.transform + out.transform.transpose());
  return out;
}

NystromMap make_nystrom_map(const GramBlock& block, const Eigen::MatrixXd& X, const EmbeddingSpec& spec,
                            const ShotPlan& plan, double rel_cutoff) {
  InverseSqrt root = inv_sqrt(block.w(), rel_cutoff);
  NystromMap map{.landmark_ids = {block.row_ids.begin(), block.row_ids.begin() + static_cast<std::ptrdiff_t>(block.landmark_count)},
                 .landmark_vectors = Eigen::MatrixXd(static_cast<Eigen::Index>(block.landmark_count), X.cols()),
                 .transform = std::move(root.transform),
                 .rank = root.rank,
                 .spec = spec,
                 .plan = plan};
  for (std::size_t j = 0; j < block.landmark_count; ++j) {
    map.landmark_vectors.row(static_cast<Eigen::Index>(j)) = X.row(static_cast<Eigen::Index>(map.landmark_ids[j]));
  }
  return map;
}

Eigen::VectorXd map_point(const Eigen::VectorXd& kvec, const NystromMap& map) {
  if (kvec.size() != map.transform.rows()) throw InvalidInput("kernel vector length does not match landmark count");
  return map.transform * kvec;
}

Eigen::MatrixXd map_rows(const Eigen::MatrixXd& kernel_rows, const NystromMap& map) {
  if (kernel_rows.cols() != map.transform.rows()) throw InvalidInput("kernel block width does not match landmark count");
  // Row i becomes transform * k_i; the transform is symmetric.
  return kernel_rows * map.transform;
}

Eigen::VectorXd landmark_kernels(const Eigen::VectorXd& x, const NystromMap& map) {
  const auto l = static_cast<Eigen::Index>(map.landmark_count());
  Eigen::VectorXd k(l);
  const bool circuit = map.spec.is_circuit();
  std::optional<StateVector> state;
  if (circuit) state = embed(x, map.spec);
  for (Eigen::Index j = 0; j < l; ++j) {
    const Eigen::VectorXd z = map.landmark_vectors.row(j);
    const double exact = circuit ? fidelity(*state, embed(z, map.spec)) : exact_kernel(x, z, map.spec);
    k(j) = sample_fidelity(exact, adhoc_plan(map.plan, map.spec, as_span(x), map.landmark_ids[static_cast<std::size_t>(j)]));
  }
  return k;
}

Eigen::MatrixXd complete(const GramBlock& block, double rel_cutoff) {
  const Eigen::MatrixXd w = block.w();
  const Eigen::MatrixXd w_pinv = linalg::pinv(0.5 * (w + w.transpose()), rel_cutoff);
  if (w_pinv.isZero(0.0)) throw DegenerateError("landmark block is degenerate");
  Eigen::MatrixXd k = block.entries * w_pinv * block.entries.transpose();
  return 0.5 * (k + k.transpose());
}

double spectral_error(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B) {
  if (A.rows() != B.rows() || A.cols() != B.cols()) throw InvalidInput("spectral error of differently shaped matrices");
  return linalg::spectral_norm(A - B, 200, 1e-8);
}

double nystrom_error_bound(std::size_t n, std::size_t l, double delta) {
  if (l == 0) throw InvalidInput("bound needs at least one landmark");
  if (!(delta > 0.0 && delta < 1.0)) throw InvalidInput("delta must lie in (0, 1)");
  return static_cast<double>(n) / std::sqrt(static_cast<double>(l)) * (1.0 + std::sqrt(8.0 * std::log(1.0 / delta)));
}

Eigen::MatrixXd random_inputs(std::size_t n, const EmbeddingSpec& spec, StreamKey key, std::size_t hea_dim) {
  Stream stream(key);
  if (const auto* dlp = std::get_if<DlpIntervalEmbedding>(&spec.variant())) {
    Eigen::MatrixXd X(static_cast<Eigen::Index>(n), dlp->dims);
    for (Eigen::Index i = 0; i < X.rows(); ++i)
      for (Eigen::Index j = 0; j < X.cols(); ++j)
        X(i, j) = static_cast<double>(1 + stream.below(static_cast<std::uint64_t>(dlp->p - 1)));
    return X;
  }
  std::size_t dim = spec.input_dim();
  if (dim == 0) dim = hea_dim > 0 ? hea_dim : static_cast<std::size_t>(std::get<HardwareEfficientEmbedding>(spec.variant()).n_qubits);
  Eigen::MatrixXd X(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(dim));
  for (Eigen::Index i = 0; i < X.rows(); ++i)
    for (Eigen::Index j = 0; j < X.cols(); ++j) X(i, j) = std::numbers::pi * stream.uniform();
  return X;
}

std::vector<ErrorHarnessRow> error_harness(std::size_t n, std::size_t l, const std::vector<std::uint64_t>& shots,
                                           const EmbeddingSpec& spec, const std::vector<std::uint64_t>& seeds,
                                           double delta, std::size_t threads) {
  if (l < 1 || l > n) throw InvalidInput("need 1 <= L <= N");
  // errors[s][m] for seed s and shot setting m.
  std::vector<std::vector<double>> errors(seeds.size(), std::vector<double>(shots.size()));

  parallel_for(seeds.size(), threads, [&](std::size_t s) {
    const StreamKey key(seeds[s]);
    const Eigen::MatrixXd X = random_inputs(n, spec, key.derive("inputs"));
    const auto landmarks = select_landmarks(n, l, key.derive("landmarks"));
    std::vector<std::size_t> rows(n);
    std::iota(rows.begin(), rows.end(), std::size_t{0});
    const Eigen::MatrixXd K = exact_gram(X, spec);

    for (std::size_t m = 0; m < shots.size(); ++m) {
      const ShotPlan plan = shots[m] == 0 ? ShotPlan::exact() : ShotPlan::sampled(shots[m], key.derive("shots"));
      KernelCache cache;
      const GramBlock block = gram_block(X, rows, landmarks, spec, plan, cache);
      const Eigen::MatrixXd completed = complete(block);
      Eigen::MatrixXd reference(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
      for (std::size_t a = 0; a < n; ++a)
        for (std::size_t b = 0; b < n; ++b)
          reference(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) =
              K(static_cast<Eigen::Index>(block.row_ids[a]), static_cast<Eigen::Index>(block.row_ids[b]));
      errors[s][m] = spectral_error(reference, completed);
    }
  });

  std::vector<ErrorHarnessRow> out;
  const double bound = nystrom_error_bound(n, l, delta);
  for (std::size_t m = 0; m < shots.size(); ++m) {
    ErrorHarnessRow row;
    row.shots = shots[m];
    row.landmarks = l;
    row.points = n;
    row.bound = bound;
    for (std::size_t s = 0; s < seeds.size(); ++s) row.errors.push_back(errors[s][m]);
    const double count = static_cast<double>(row.errors.size());
    if (count > 0) {
      row.mean_error = std::accumulate(row.errors.begin(), row.errors.end(), 0.0) / count;
      double ss = 0.0;
      for (double e : row.errors) ss += (e - row.mean_error) * (e - row.mean_error);
      row.std_error = count > 1 ? std::sqrt(ss / (count - 1)) : 0.0;
    }
    out.push_back(std::move(row));
  }
  return out;
}

std::string error_harness_csv(const std::vector<ErrorHarnessRow>& rows) {
  std::ostringstream os;
  os.precision(17);
  os << "M,L,N,mean_err,std_err,bound\n";
  for (const auto& r : rows) {
    os << r.shots << ',' << r.landmarks << ',' << r.points << ',' << r.mean_error << ',' << r.std_error << ','
       << r.bound << '\n';
  }
  return os.str();
}

}  // namespace qforest
