#include <gtest/gtest.h>

#include <Eigen/Dense>
#include <cmath>

#include "qforest/error.hpp"
#include "qforest/linalg.hpp"
#include "qforest/rng.hpp"

namespace la = qforest::linalg;

namespace {

Eigen::MatrixXd random_symmetric(int n, qforest::Stream& rng) {
  Eigen::MatrixXd a(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) a(i, j) = rng.normal();
  }
  return 0.5 * (a + a.transpose());
}

Eigen::MatrixXd random_orthogonal(int n, qforest::Stream& rng) {
  Eigen::MatrixXd a(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) a(i, j) = rng.normal();
  }
  return Eigen::HouseholderQR<Eigen::MatrixXd>(a).householderQ();
}

}  // namespace

TEST(Eigh, DiagonalInput) {
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(2, 2);
  a(0, 0) = 1;
  a(1, 1) = 3;
  const auto e = la::eigh(a);
  EXPECT_NEAR(e.values(0), 3, 1e-12);
  EXPECT_NEAR(e.values(1), 1, 1e-12);
  EXPECT_NEAR(std::abs(e.vectors(1, 0)), 1, 1e-12);
  EXPECT_NEAR(std::abs(e.vectors(0, 1)), 1, 1e-12);
}

TEST(Eigh, RecoversSpectrumOfConjugatedDiagonal) {
  qforest::Stream rng(qforest::StreamKey(1));
  const Eigen::MatrixXd q = random_orthogonal(6, rng);
  Eigen::VectorXd d(6);
  d << 5, 3.5, 2, 0.25, -1, -4;
  const auto e = la::eigh(q * d.asDiagonal() * q.transpose());
  for (int i = 0; i < 6; ++i) EXPECT_NEAR(e.values(i), d(i), 1e-9);
}

TEST(Eigh, ReconstructionAndOrthonormalityOnRandomMatrices) {
  qforest::Stream rng(qforest::StreamKey(2));
  for (int t = 0; t < 50; ++t) {
    const Eigen::MatrixXd a = random_symmetric(8, rng);
    const auto e = la::eigh(a);
    const Eigen::MatrixXd rec = e.vectors * e.values.asDiagonal() * e.vectors.transpose();
    EXPECT_LT((rec - a).cwiseAbs().maxCoeff(), 1e-8);
    EXPECT_LT((e.vectors.transpose() * e.vectors - Eigen::MatrixXd::Identity(8, 8)).cwiseAbs().maxCoeff(), 1e-8);
    for (int i = 0; i + 1 < 8; ++i) EXPECT_GE(e.values(i), e.values(i + 1));
    // Independent oracle.
    const Eigen::VectorXd ref = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(a).eigenvalues().reverse();
    EXPECT_LT((ref - e.values).cwiseAbs().maxCoeff(), 1e-9);
  }
}

TEST(Eigh, RejectsNonSymmetric) {
  Eigen::MatrixXd a(2, 2);
  a << 1, 2, 0, 1;
  EXPECT_THROW(la::eigh(a), qforest::InvalidInput);
  EXPECT_THROW(la::eigh(Eigen::MatrixXd(2, 3)), qforest::InvalidInput);
}

TEST(Pinv, IdentityAndSingularDiagonal) {
  EXPECT_LT((la::pinv(Eigen::MatrixXd::Identity(3, 3)) - Eigen::MatrixXd::Identity(3, 3)).norm(), 1e-12);
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(2, 2);
  d(0, 0) = 2;
  const Eigen::MatrixXd p = la::pinv(d);
  EXPECT_NEAR(p(0, 0), 0.5, 1e-12);
  EXPECT_NEAR(p(1, 1), 0.0, 1e-12);
}

TEST(Pinv, PenroseConditionsOnRankTwoPsd) {
  qforest::Stream rng(qforest::StreamKey(3));
  for (int t = 0; t < 10; ++t) {
    Eigen::MatrixXd f(5, 2);
    for (int i = 0; i < 5; ++i) {
      f(i, 0) = rng.normal();
      f(i, 1) = rng.normal();
    }
    const Eigen::MatrixXd a = f * f.transpose();
    const Eigen::MatrixXd p = la::pinv(a);
    EXPECT_LT((a * p * a - a).cwiseAbs().maxCoeff(), 1e-6);
    EXPECT_LT((p * a * p - p).cwiseAbs().maxCoeff(), 1e-6);
    EXPECT_LT(((a * p).transpose() - a * p).cwiseAbs().maxCoeff(), 1e-6);
    EXPECT_LT(((p * a).transpose() - p * a).cwiseAbs().maxCoeff(), 1e-6);
  }
}

TEST(SqrtPsd, SquaresBack) {
  qforest::Stream rng(qforest::StreamKey(4));
  Eigen::MatrixXd f(4, 4);
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) f(i, j) = rng.normal();
  }
  const Eigen::MatrixXd a = f * f.transpose();
  const Eigen::MatrixXd r = la::sqrt_psd(a);
  EXPECT_LT((r * r - a).cwiseAbs().maxCoeff(), 1e-8);
}

TEST(SpectralNorm, MatchesSingularValueOracle) {
  qforest::Stream rng(qforest::StreamKey(5));
  for (int t = 0; t < 10; ++t) {
    const Eigen::MatrixXd a = random_symmetric(7, rng);
    const double ref = Eigen::JacobiSVD<Eigen::MatrixXd>(a).singularValues()(0);
    EXPECT_NEAR(la::spectral_norm(a, 2000, 1e-14), ref, 1e-6 * ref);
  }
  EXPECT_EQ(la::spectral_norm(Eigen::MatrixXd::Zero(3, 3)), 0.0);
}

TEST(MinEigenvalue, Diagonal) {
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(3, 3);
  a.diagonal() << 2, -1, 0.5;
  EXPECT_NEAR(la::min_eigenvalue(a), -1, 1e-12);
}
