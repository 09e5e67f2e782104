#include <gtest/gtest.h>

#include <Eigen/Dense>
#include <algorithm>
#include <numeric>
#include <set>

#include "qforest/error.hpp"
#include "qforest/kernel.hpp"
#include "qforest/nystrom.hpp"
#include "qforest/rng.hpp"

using namespace qforest;

namespace {

std::vector<std::size_t> all_rows(std::size_t n) {
  std::vector<std::size_t> v(n);
  std::iota(v.begin(), v.end(), std::size_t{0});
  return v;
}

// Rows of K permuted into the block's row order.
Eigen::MatrixXd reorder(const Eigen::MatrixXd& K, const std::vector<std::size_t>& ids) {
  const auto n = static_cast<Eigen::Index>(ids.size());
  Eigen::MatrixXd out(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) out(i, j) = K(static_cast<Eigen::Index>(ids[i]), static_cast<Eigen::Index>(ids[j]));
  }
  return out;
}

GramBlock block_from(const Eigen::MatrixXd& K, std::size_t l) {
  GramBlock b;
  b.entries = K.leftCols(static_cast<Eigen::Index>(l));
  b.row_ids = all_rows(static_cast<std::size_t>(K.rows()));
  b.landmark_count = l;
  return b;
}

Eigen::MatrixXd random_psd(int n, std::uint64_t seed) {
  Stream rng{StreamKey(seed)};
  Eigen::MatrixXd f(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) f(i, j) = rng.normal();
  }
  return f * f.transpose();
}

}  // namespace

TEST(SelectLandmarks, ExhaustiveSingleAndDeterministic) {
  auto perm = select_landmarks(9, 9, StreamKey(1));
  std::sort(perm.begin(), perm.end());
  EXPECT_EQ(perm, all_rows(9));
  const auto one = select_landmarks(9, 1, StreamKey(2));
  ASSERT_EQ(one.size(), 1u);
  EXPECT_LT(one[0], 9u);
  EXPECT_EQ(select_landmarks(50, 10, StreamKey(3)), select_landmarks(50, 10, StreamKey(3)));
  const auto s = select_landmarks(50, 10, StreamKey(3));
  EXPECT_EQ(std::set<std::size_t>(s.begin(), s.end()).size(), 10u);
  EXPECT_THROW(select_landmarks(3, 4, StreamKey(1)), InvalidInput);
}

TEST(InvSqrt, IdentityAndDiagonal) {
  const auto id = inv_sqrt(Eigen::MatrixXd::Identity(3, 3));
  EXPECT_EQ(id.rank, 3u);
  EXPECT_LT((id.transform - Eigen::MatrixXd::Identity(3, 3)).norm(), 1e-12);
  Eigen::MatrixXd w = Eigen::MatrixXd::Zero(2, 2);
  w.diagonal() << 4, 1;
  const auto d = inv_sqrt(w);
  EXPECT_EQ(d.rank, 2u);
  EXPECT_NEAR(d.transform(0, 0), 0.5, 1e-12);
  EXPECT_NEAR(d.transform(1, 1), 1.0, 1e-12);
  EXPECT_NEAR(d.transform(0, 1), 0.0, 1e-12);
}

TEST(InvSqrt, MatchesEigenOracleAndWhitens) {
  const auto W = random_psd(5, 40);
  const auto r = inv_sqrt(W);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(W);
  const Eigen::MatrixXd ref = es.operatorInverseSqrt();
  EXPECT_LT((r.transform - ref).cwiseAbs().maxCoeff(), 1e-8);
  EXPECT_LT((r.transform * W * r.transform - Eigen::MatrixXd::Identity(5, 5)).cwiseAbs().maxCoeff(), 1e-6);
  EXPECT_LT((r.transform - r.transform.transpose()).cwiseAbs().maxCoeff(), 1e-8);
}

TEST(InvSqrt, TruncatesRankAndRejectsZero) {
  Eigen::VectorXd v(3);
  v << 1, 2, 2;
  const auto r = inv_sqrt(v * v.transpose());
  EXPECT_EQ(r.rank, 1u);
  EXPECT_THROW(inv_sqrt(Eigen::MatrixXd::Zero(3, 3)), DegenerateError);
}

TEST(NystromMap, LandmarksReproduceWAndMappedGramEqualsCompletion) {
  Stream rng{StreamKey(41)};
  Eigen::MatrixXd X(8, 2);
  for (Eigen::Index i = 0; i < 8; ++i) X.row(i) << rng.uniform() * 3, rng.uniform() * 3;
  const auto spec = EmbeddingSpec::iqp(2);
  KernelCache cache;
  const auto rows = all_rows(8);
  const std::vector<std::size_t> lm{6, 0, 3};
  const auto block = gram_block(X, rows, lm, spec, ShotPlan::exact(), cache);
  const auto map = make_nystrom_map(block, X, spec, ShotPlan::exact());
  ASSERT_EQ(map.rank, 3u);
  EXPECT_EQ(map.landmark_ids, lm);

  const Eigen::MatrixXd F = map_rows(block.entries, map);
  const Eigen::MatrixXd mapped_gram = F * F.transpose();
  EXPECT_LT((mapped_gram - complete(block)).cwiseAbs().maxCoeff(), 1e-8);
  EXPECT_LT((mapped_gram.topLeftCorner(3, 3) - block.w()).cwiseAbs().maxCoeff(), 1e-8);
  EXPECT_LT((complete(block).topLeftCorner(3, 3) - block.w()).cwiseAbs().maxCoeff(), 1e-8);

  // Per-point map agrees with the row map, and fresh kernel evaluation
  // reproduces the measured columns.
  for (Eigen::Index r = 0; r < 8; ++r) {
    const Eigen::VectorXd k = block.entries.row(r).transpose();
    EXPECT_LT((map_point(k, map) - F.row(r).transpose()).cwiseAbs().maxCoeff(), 1e-12);
    const Eigen::VectorXd x = X.row(static_cast<Eigen::Index>(block.row_ids[r])).transpose();
    EXPECT_LT((landmark_kernels(x, map) - k).cwiseAbs().maxCoeff(), 1e-12);
  }
  EXPECT_EQ(map_point(Eigen::VectorXd::Zero(3), map), Eigen::VectorXd::Zero(3));
  EXPECT_THROW(map_point(Eigen::VectorXd::Zero(2), map), InvalidInput);
}

TEST(Complete, FullLandmarkExactness) {
  Stream rng{StreamKey(42)};
  Eigen::MatrixXd X(30, 4);
  for (Eigen::Index i = 0; i < 30; ++i) {
    for (Eigen::Index j = 0; j < 4; ++j) X(i, j) = rng.uniform() * 3.14159;
  }
  const auto spec = EmbeddingSpec::iqp(4);
  KernelCache cache;
  const auto rows = all_rows(30);
  const auto block = gram_block(X, rows, select_landmarks(30, 30, StreamKey(1)), spec, ShotPlan::exact(), cache);
  const Eigen::MatrixXd K = reorder(exact_gram(X, spec), block.row_ids);
  EXPECT_LE((complete(block) - K).norm(), 1e-8);
}

TEST(Complete, RankOneAndRankTwoAreExact) {
  const Eigen::MatrixXd ones = Eigen::MatrixXd::Ones(5, 5);
  EXPECT_LT((complete(block_from(ones, 1)) - ones).norm(), 1e-10);

  Stream rng{StreamKey(43)};
  Eigen::MatrixXd f(6, 2);
  for (Eigen::Index i = 0; i < 6; ++i) f.row(i) << rng.normal(), rng.normal();
  const Eigen::MatrixXd K = f * f.transpose();
  const Eigen::MatrixXd Khat = complete(block_from(K, 2));
  EXPECT_LT((Khat - K).cwiseAbs().maxCoeff(), 1e-7);
  EXPECT_GE(Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(Khat).eigenvalues().minCoeff(), -1e-9);
}

TEST(Complete, DegenerateLandmarkBlockThrows) {
  EXPECT_THROW(complete(block_from(Eigen::MatrixXd::Zero(3, 3), 2)), DegenerateError);
}

TEST(SpectralError, ClosedFormsAndOracle) {
  const Eigen::MatrixXd A = random_psd(8, 44);
  EXPECT_EQ(spectral_error(A, A), 0.0);
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(2, 2);
  d.diagonal() << 3, 1;
  EXPECT_NEAR(spectral_error(d, Eigen::MatrixXd::Zero(2, 2)), 3.0, 1e-8);
  const Eigen::MatrixXd B = random_psd(8, 45);
  const double ref = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(A - B).eigenvalues().cwiseAbs().maxCoeff();
  EXPECT_NEAR(spectral_error(A, B), ref, 1e-6 * ref);
  EXPECT_THROW(spectral_error(A, Eigen::MatrixXd::Zero(3, 3)), InvalidInput);
}

TEST(ErrorHarness, ExactFullLandmarksIsZero) {
  const auto rows = error_harness(12, 12, {0}, EmbeddingSpec::iqp(2), {0, 1, 2});
  ASSERT_EQ(rows.size(), 1u);
  EXPECT_LT(rows[0].mean_error, 1e-8);
}

TEST(ErrorHarness, ExactErrorWithinBoundAndShotTrend) {
  std::vector<std::uint64_t> seeds(20);
  std::iota(seeds.begin(), seeds.end(), std::uint64_t{0});
  const auto rows = error_harness(40, 10, {0, 256, 4096}, EmbeddingSpec::iqp(2), seeds);
  ASSERT_EQ(rows.size(), 3u);
  for (double e : rows[0].errors) EXPECT_LE(e, rows[0].bound);
  EXPECT_LT(rows[2].mean_error, rows[1].mean_error);
  EXPECT_NEAR(rows[0].bound, nystrom_error_bound(40, 10, 0.1), 1e-12);
  const auto csv = error_harness_csv(rows);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "M,L,N,mean_err,std_err,bound");
}

TEST(ErrorHarness, ThreadCountDoesNotChangeResults) {
  const auto a = error_harness(20, 5, {0, 128}, EmbeddingSpec::iqp(2), {3, 4, 5}, 0.1, 1);
  const auto b = error_harness(20, 5, {0, 128}, EmbeddingSpec::iqp(2), {3, 4, 5}, 0.1, 3);
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(a[i].errors, b[i].errors);
}
