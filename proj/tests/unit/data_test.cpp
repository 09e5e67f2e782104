#include <gtest/gtest.h>

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <filesystem>
#include <numbers>
#include <numeric>
#include <set>

#include "oracles.hpp"
#include "qforest/data.hpp"
#include "qforest/error.hpp"
#include "qforest/kernel.hpp"
#include "qforest/rng.hpp"

using namespace qforest;

namespace {

constexpr double kPi = std::numbers::pi;

Eigen::MatrixXd random_normal(std::size_t n, int d, std::uint64_t seed) {
  Stream rng{StreamKey(seed)};
  Eigen::MatrixXd X(static_cast<Eigen::Index>(n), d);
  for (Eigen::Index i = 0; i < X.rows(); ++i) {
    for (Eigen::Index j = 0; j < d; ++j) X(i, j) = rng.normal() * static_cast<double>(j + 1);
  }
  return X;
}

Eigen::MatrixXd pairwise_distances(const Eigen::MatrixXd& X) {
  Eigen::MatrixXd D(X.rows(), X.rows());
  for (Eigen::Index i = 0; i < X.rows(); ++i) {
    for (Eigen::Index j = 0; j < X.rows(); ++j) D(i, j) = (X.row(i) - X.row(j)).norm();
  }
  return D;
}

}  // namespace

TEST(Csv, ParsesHandWrittenFile) {
  const auto d = parse_csv("# made by hand\na,b,label\n1.5,-2,0\n0,3e2,1\n7,0.25,2\n");
  ASSERT_EQ(d.size(), 3u);
  EXPECT_EQ(d.meta.feature_names, (std::vector<std::string>{"a", "b"}));
  EXPECT_EQ(d.features(0, 0), 1.5);
  EXPECT_EQ(d.features(1, 1), 300.0);
  EXPECT_EQ(d.features(2, 1), 0.25);
  EXPECT_EQ(d.labels, (std::vector<int>{0, 1, 2}));
  EXPECT_EQ(d.num_classes(), 3u);
  ASSERT_EQ(d.meta.comments.size(), 1u);
  EXPECT_EQ(d.meta.comments[0], "made by hand");
}

TEST(Csv, ErrorsNameTheLine) {
  try {
    parse_csv("a,b,label\n1,2,0\n1,,1\n");
    FAIL() << "expected a parse error";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 3u);
  }
  EXPECT_THROW(parse_csv("a,b,label\n1,nan,0\n"), ParseError);
  EXPECT_THROW(parse_csv("a,b,label\n1,2\n"), ParseError);
  EXPECT_THROW(parse_csv("a,b,cls\n1,2,0\n"), ParseError);
  EXPECT_THROW(parse_csv("a,b,label\n1,2,-1\n"), ParseError);
  EXPECT_THROW(parse_csv(""), ParseError);
}

TEST(Csv, RoundTripIsExact) {
  Dataset d;
  d.features = random_normal(20, 3, 1) * 1e3;
  d.features(0, 0) = 0.1;
  d.features(1, 1) = 1.0 / 3.0;
  d.labels.resize(20);
  for (std::size_t i = 0; i < 20; ++i) d.labels[i] = static_cast<int>(i % 3);
  d.meta.feature_names = {"f0", "f1", "f2"};
  d.meta.comments = {"provenance line"};
  const auto path = std::filesystem::temp_directory_path() / "qforest_csv_roundtrip.csv";
  save_csv(d, path);
  const auto back = load_csv(path);
  std::filesystem::remove(path);
  EXPECT_EQ(back.features, d.features);
  EXPECT_EQ(back.labels, d.labels);
  EXPECT_EQ(back.meta.feature_names, d.meta.feature_names);
  EXPECT_EQ(back.meta.comments, d.meta.comments);
  EXPECT_EQ(to_csv(back), to_csv(d));
}

TEST(Pca, CollinearPointsKeepDistances) {
  Eigen::MatrixXd X(5, 2);
  for (int i = 0; i < 5; ++i) X.row(i) << 1.0 + 2.0 * i * i, -3.0 + i * i;
  const auto Y = pca_reduce(X, 1);
  EXPECT_LT((pairwise_distances(Y) - pairwise_distances(X)).cwiseAbs().maxCoeff(), 1e-9);
}

TEST(Pca, FullDimensionIsIsometryWithZeroMean) {
  const auto X = random_normal(30, 4, 2);
  const auto Y = pca_reduce(X, 4);
  EXPECT_LT((pairwise_distances(Y) - pairwise_distances(X)).cwiseAbs().maxCoeff(), 1e-9);
  EXPECT_LT(Y.colwise().mean().cwiseAbs().maxCoeff(), 1e-9);
}

TEST(Pca, ExplainedVarianceMatchesEigenOracle) {
  const auto X = random_normal(40, 5, 3);
  const auto r = pca(X, 2);
  const Eigen::MatrixXd centred = X.rowwise() - X.colwise().mean();
  const Eigen::MatrixXd cov = centred.transpose() * centred / static_cast<double>(X.rows() - 1);
  const Eigen::VectorXd ev = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(cov).eigenvalues().reverse();
  const Eigen::MatrixXd Yc = r.projected.rowwise() - r.projected.colwise().mean();
  const double explained = (Yc.transpose() * Yc).trace() / static_cast<double>(X.rows() - 1);
  EXPECT_NEAR(explained, ev(0) + ev(1), 1e-9);
  for (Eigen::Index c = 0; c < 2; ++c) {
    Eigen::Index arg = 0;
    r.components.col(c).cwiseAbs().maxCoeff(&arg);
    EXPECT_GT(r.components(arg, c), 0.0);
  }
  EXPECT_THROW(pca_reduce(X, 6), InvalidInput);
  EXPECT_THROW(pca_reduce(X, 0), InvalidInput);
}

TEST(Normalize, EndpointsMidpointAndConstantColumns) {
  Eigen::MatrixXd X(3, 2);
  X << 2, 5, 3, 5, 4, 5;
  const auto n = normalize_to_pi(X);
  ASSERT_EQ(n.features.cols(), 1);
  EXPECT_EQ(n.dropped, (std::vector<std::size_t>{1}));
  EXPECT_EQ(n.features(0, 0), 0.0);
  EXPECT_NEAR(n.features(1, 0), kPi / 2, 1e-15);
  EXPECT_EQ(n.features(2, 0), kPi);
  EXPECT_THROW(normalize_to_pi(Eigen::MatrixXd::Ones(3, 2)), DegenerateError);
}

TEST(Normalize, RandomMatrixInRangeWithExtremes) {
  const auto n = normalize_to_pi(random_normal(50, 3, 4));
  EXPECT_GE(n.features.minCoeff(), 0.0);
  EXPECT_LE(n.features.maxCoeff(), kPi);
  for (Eigen::Index c = 0; c < 3; ++c) {
    EXPECT_EQ(n.features.col(c).minCoeff(), 0.0);
    EXPECT_NEAR(n.features.col(c).maxCoeff(), kPi, 1e-15);
  }
}

TEST(RelabelQk, IdenticalKernelsGiveUnitPencil) {
  const auto X = normalize_to_pi(random_normal(20, 2, 5)).features;
  const auto K = exact_gram(X, EmbeddingSpec::iqp(2));
  const auto r = relabel_qk_from_grams(K, K, 0.0, StreamKey(1));
  EXPECT_NEAR(r.top_eigenvalue, 1.0, 1e-6);
  std::vector<double> y(20);
  for (std::size_t i = 0; i < 20; ++i) y[i] = r.labels[i] == 1 ? 1.0 : -1.0;
  EXPECT_NEAR(kernel_target_alignment(K, y) / kernel_target_alignment(K, y), 1.0, 1e-12);
  for (std::size_t i = 0; i < 20; ++i) EXPECT_EQ(r.labels[i], r.phi(static_cast<Eigen::Index>(i)) >= 0 ? 1 : 0);
}

TEST(RelabelQk, TopEigenvalueDominatesRandomRayleighQuotients) {
  const auto X = normalize_to_pi(random_normal(25, 3, 6)).features;
  const auto KQ = exact_gram(X, EmbeddingSpec::iqp(3));
  const auto KC = rbf_gram(X, 1.0 / 3.0);
  const auto r = relabel_qk_from_grams(KQ, KC, 0.0, StreamKey(2));
  Stream rng{StreamKey(7)};
  for (int t = 0; t < 100; ++t) {
    Eigen::VectorXd v(25);
    for (Eigen::Index i = 0; i < 25; ++i) v(i) = rng.uniform() < 0.5 ? -1.0 : 1.0;
    const double rq = v.dot(KQ * v) / v.dot(KC * v);
    EXPECT_GE(r.top_eigenvalue, rq * (1 - 1e-6));
  }
}

TEST(RelabelQk, BothClassesPresent) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto X = normalize_to_pi(random_normal(30, 2, 100 + seed)).features;
    const auto y = relabel_qk(X, EmbeddingSpec::iqp(2), 0.5, 0.1, StreamKey(seed));
    const auto ones = std::count(y.begin(), y.end(), 1);
    EXPECT_GT(ones, 0);
    EXPECT_LT(ones, 30);
  }
}

TEST(RelabelQrf, QuartilePatternOnMonotoneProjection) {
  std::vector<double> p(12);
  std::iota(p.begin(), p.end(), 0.0);
  EXPECT_EQ(labels_from_projection(p), (std::vector<int>{0, 0, 0, 1, 1, 1, 0, 0, 0, 1, 1, 1}));
  std::vector<double> sorted{1, 2, 3, 4};
  EXPECT_DOUBLE_EQ(quantile_sorted(sorted, 0.25), 1.75);
  EXPECT_DOUBLE_EQ(quantile_sorted(sorted, 0.5), 2.5);
}

TEST(RelabelQrf, BalancedAndDeterministic) {
  for (std::size_t n : {40u, 41u, 42u, 43u}) {
    Stream rng{StreamKey(n)};
    Eigen::MatrixXd X(static_cast<Eigen::Index>(n), 2);
    for (Eigen::Index i = 0; i < X.rows(); ++i) X.row(i) << rng.uniform() * kPi, rng.uniform() * kPi;
    const auto y = relabel_qrf(X, EmbeddingSpec::iqp(2), StreamKey(9));
    const auto ones = static_cast<long>(std::count(y.begin(), y.end(), 1));
    const auto zeros = static_cast<long>(n) - ones;
    EXPECT_LE(std::abs(ones - zeros), 3);
    if (n % 4 == 0) EXPECT_EQ(ones, zeros);
    EXPECT_EQ(y, relabel_qrf(X, EmbeddingSpec::iqp(2), StreamKey(9)));
  }
  EXPECT_THROW(relabel_qrf(Eigen::MatrixXd::Ones(6, 2), EmbeddingSpec::iqp(2), StreamKey(1)), DegenerateError);
}

TEST(DlpConcept, DefinitionCases) {
  const DlpConcept c{23, 5, 2, 3, 10};
  const DiscreteLogTable t(23, 5);
  // Intervals [3, 13] and [10, 20] in log space (half width (23-3)/2 = 10).
  EXPECT_EQ(dlp_concept_label(t.pow(4), t.pow(12), c, t), -1);  // both inside
  EXPECT_EQ(dlp_concept_label(t.pow(4), t.pow(2), c, t), 1);    // only the first
  EXPECT_EQ(dlp_concept_label(t.pow(0), t.pow(15), c, t), 1);   // only the second
  EXPECT_EQ(dlp_concept_label(t.pow(14), t.pow(21), c, t), -1); // neither
  EXPECT_TRUE(in_log_interval(13, 3, 23));
  EXPECT_FALSE(in_log_interval(14, 3, 23));
  EXPECT_TRUE(in_log_interval(2, 20, 23));  // wraps: [20, 21, 0, ..., 8]
}

TEST(DlpConcept, FullEnumerationMatchesLogTableOracle) {
  for (auto [p, g] : {std::pair<std::int64_t, std::int64_t>{23, 5}, {29, 2}, {31, 3}}) {
    const DlpConcept c{p, g, 2, 4, 17};
    const DiscreteLogTable t(p, g);
    for (std::int64_t a = 1; a < p; ++a) {
      for (std::int64_t b = 1; b < p; ++b) {
        const auto la = oracle::brute_log(a, p, g);
        const auto lb = oracle::brute_log(b, p, g);
        const auto m = p - 1;
        const bool ia = ((la - 4) % m + m) % m <= (p - 3) / 2;
        const bool ib = ((lb - 17) % m + m) % m <= (p - 3) / 2;
        ASSERT_EQ(dlp_concept_label(a, b, c, t), ia != ib ? 1 : -1);
      }
    }
  }
}

TEST(DlpConcept, GeneratorAndValidation) {
  const DlpConcept c{23, 5, 2, 3, 10};
  const auto d = gen_dlp_dataset(c, 50, StreamKey(1));
  ASSERT_EQ(d.size(), 50u);
  const DiscreteLogTable t(23, 5);
  for (std::size_t i = 0; i < 50; ++i) {
    const auto x0 = static_cast<std::int64_t>(d.features(static_cast<Eigen::Index>(i), 0));
    const auto x1 = static_cast<std::int64_t>(d.features(static_cast<Eigen::Index>(i), 1));
    EXPECT_EQ(d.labels[i], dlp_concept_label(x0, x1, c, t) > 0 ? 1 : 0);
  }
  EXPECT_EQ(to_csv(d), to_csv(gen_dlp_dataset(c, 50, StreamKey(1))));
  EXPECT_THROW(gen_dlp_dataset(DlpConcept{21, 2, 2, 1, 1}, 10, StreamKey(1)), InvalidInput);
  EXPECT_THROW(gen_dlp_dataset(DlpConcept{23, 2, 2, 1, 1}, 10, StreamKey(1)), InvalidInput);
}

TEST(Split, SizesPartitionAndDeterminism) {
  Dataset d;
  d.features = random_normal(300, 2, 8);
  d.labels.resize(300);
  for (std::size_t i = 0; i < 300; ++i) d.labels[i] = i < 100 ? 0 : 1;
  const auto s = split(d, 0.6, StreamKey(3));
  EXPECT_EQ(s.train.size(), 180u);
  EXPECT_EQ(s.test.size(), 120u);
  EXPECT_TRUE(s.stratified);
  EXPECT_EQ(std::count(s.train.labels.begin(), s.train.labels.end(), 0), 60);
  std::multiset<double> before;
  std::multiset<double> after;
  for (Eigen::Index i = 0; i < 300; ++i) before.insert(d.features(i, 0));
  for (Eigen::Index i = 0; i < 180; ++i) after.insert(s.train.features(i, 0));
  for (Eigen::Index i = 0; i < 120; ++i) after.insert(s.test.features(i, 0));
  EXPECT_EQ(before, after);
  const auto again = split(d, 0.6, StreamKey(3));
  EXPECT_EQ(again.train.features, s.train.features);
  EXPECT_THROW(split(d, 1.0, StreamKey(3)), InvalidInput);
}

TEST(Split, FallsBackWhenAClassIsTiny) {
  Dataset d;
  d.features = random_normal(10, 2, 9);
  d.labels = {0, 0, 0, 0, 0, 0, 0, 0, 0, 1};
  const auto s = split(d, 0.5, StreamKey(1));
  EXPECT_FALSE(s.stratified);
  EXPECT_EQ(s.train.size() + s.test.size(), 10u);
}
