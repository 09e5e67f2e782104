#include <gtest/gtest.h>

#include <Eigen/Dense>
#include <cmath>
#include <vector>

#include "oracles.hpp"
#include "qforest/error.hpp"
#include "qforest/kernel.hpp"
#include "qforest/rng.hpp"
#include "qforest/svm.hpp"

using namespace qforest;
using namespace qforest::svm;

namespace {

struct Problem {
  Eigen::MatrixXd X;
  std::vector<double> y;
};

// Two Gaussian clouds around (-1.5,-1.5) and (1.5,1.5), linearly separable.
Problem separable(std::size_t n, std::uint64_t seed) {
  Stream rng{StreamKey(seed)};
  Problem p{Eigen::MatrixXd(static_cast<Eigen::Index>(n), 2), std::vector<double>(n)};
  for (std::size_t i = 0; i < n; ++i) {
    const double label = i % 2 == 0 ? 1.0 : -1.0;
    const auto r = static_cast<Eigen::Index>(i);
    p.X(r, 0) = 1.5 * label + 0.4 * rng.normal();
    p.X(r, 1) = 1.5 * label + 0.4 * rng.normal();
    p.y[i] = label;
  }
  return p;
}

Problem overlapping(std::size_t n, std::uint64_t seed) {
  Stream rng{StreamKey(seed)};
  Problem p{Eigen::MatrixXd(static_cast<Eigen::Index>(n), 2), std::vector<double>(n)};
  for (std::size_t i = 0; i < n; ++i) {
    const double label = i % 2 == 0 ? 1.0 : -1.0;
    const auto r = static_cast<Eigen::Index>(i);
    p.X(r, 0) = 0.5 * label + rng.normal();
    p.X(r, 1) = rng.normal();
    p.y[i] = label;
  }
  return p;
}

Eigen::VectorXd as_vector(const std::vector<double>& v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

}  // namespace

TEST(LinearSvm, TwoPointAnalyticSolution) {
  Eigen::MatrixXd X(2, 1);
  X << -1, 1;
  const std::vector<double> y{-1, 1};
  const auto m = train_linear(X, y, 1e6);
  EXPECT_TRUE(m.converged);
  EXPECT_NEAR(m.weights(0), 1.0, 1e-6);
  EXPECT_NEAR(m.bias, 0.0, 1e-6);
  EXPECT_NEAR(margin(m), 2.0, 1e-6);
}

TEST(LinearSvm, DualMatchesProjectedGradientReference) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto p = separable(20, seed);
    const Eigen::MatrixXd K = p.X * p.X.transpose();
    const Eigen::VectorXd yv = as_vector(p.y);
    const auto sol = solve_dual(K, p.y, 1.0);
    ASSERT_TRUE(sol.converged);
    const Eigen::VectorXd ref = oracle::pg_svm_dual(K, yv, 1.0);
    EXPECT_NEAR(dual_objective(K, p.y, sol.alphas), oracle::dual_value(K, yv, ref), 1e-4);
    EXPECT_LE(kkt_violation(K, p.y, sol.alphas, sol.bias, 1.0), 1e-6);
  }
}

TEST(LinearSvm, FeasibilityAndWeightReconstruction) {
  const auto p = overlapping(40, 3);
  const double C = 0.7;
  const auto m = train_linear(p.X, p.y, C);
  EXPECT_TRUE(m.converged);
  EXPECT_NEAR(m.alphas.dot(as_vector(p.y)), 0.0, 1e-6);
  EXPECT_GE(m.alphas.minCoeff(), 0.0);
  EXPECT_LE(m.alphas.maxCoeff(), C);
  const Eigen::VectorXd w = p.X.transpose() * m.alphas.cwiseProduct(as_vector(p.y));
  EXPECT_LT((w - m.weights).cwiseAbs().maxCoeff(), 1e-6);
}

TEST(LinearSvm, ComplementarySlacknessAndFreeSupportVectors) {
  const auto p = overlapping(40, 4);
  const double C = 1.0;
  const auto m = train_linear(p.X, p.y, C);
  for (Eigen::Index i = 0; i < p.X.rows(); ++i) {
    const double yf = p.y[static_cast<std::size_t>(i)] * decision(m, p.X.row(i).transpose());
    const double xi = std::max(0.0, 1.0 - yf);
    EXPECT_NEAR(m.alphas(i) * (1.0 - xi - yf), 0.0, 1e-4);
    if (m.alphas(i) > 1e-6 && m.alphas(i) < C - 1e-6) EXPECT_NEAR(yf, 1.0, 1e-4);
  }
}

TEST(LinearSvm, DuplicatedDataGivesSameDecisionFunction) {
  const auto p = overlapping(20, 5);
  Eigen::MatrixXd X2(40, 2);
  X2 << p.X, p.X;
  std::vector<double> y2 = p.y;
  y2.insert(y2.end(), p.y.begin(), p.y.end());
  // Duplicating every point doubles each slack term; halving C keeps the primal identical.
  const auto a = train_linear(p.X, p.y, 1.0);
  const auto b = train_linear(X2, y2, 0.5);
  for (double u : {-2.0, 0.0, 1.5}) {
    for (double v : {-1.0, 0.5, 2.0}) {
      Eigen::Vector2d z(u, v);
      EXPECT_NEAR(decision(a, z), decision(b, z), 1e-5);
    }
  }
}

TEST(LinearSvm, PermutationInvariance) {
  const auto p = overlapping(30, 6);
  std::vector<std::size_t> perm(30);
  for (std::size_t i = 0; i < 30; ++i) perm[i] = (i * 7) % 30;
  Eigen::MatrixXd Xp(30, 2);
  std::vector<double> yp(30);
  for (std::size_t i = 0; i < 30; ++i) {
    Xp.row(static_cast<Eigen::Index>(i)) = p.X.row(static_cast<Eigen::Index>(perm[i]));
    yp[i] = p.y[perm[i]];
  }
  const auto a = train_linear(p.X, p.y, 1.0);
  const auto b = train_linear(Xp, yp, 1.0);
  for (double u = -3; u <= 3; u += 1.0) {
    for (double v = -3; v <= 3; v += 1.0) {
      Eigen::Vector2d z(u, v);
      EXPECT_NEAR(decision(a, z), decision(b, z), 1e-5);
    }
  }
}

TEST(LinearSvm, ObjectiveNonDecreasingAcrossPasses) {
  const auto p = overlapping(60, 7);
  SolverOptions opts;
  opts.record_objective = true;
  const Eigen::MatrixXd K = p.X * p.X.transpose();
  const auto sol = solve_dual(K, p.y, 2.0, opts);
  ASSERT_GE(sol.objective_trace.size(), 1u);
  for (std::size_t i = 1; i < sol.objective_trace.size(); ++i) {
    EXPECT_GE(sol.objective_trace[i], sol.objective_trace[i - 1] - 1e-12);
  }
}

TEST(LinearSvm, DecisionAndMarginClosedForms) {
  LinearModel m;
  m.weights = Eigen::Vector2d(3, 4);
  m.bias = -5;
  EXPECT_NEAR(margin(m), 0.4, 1e-15);
  EXPECT_NEAR(decision(m, Eigen::Vector2d(1, 0.5)), 0.0, 1e-9);
  EXPECT_NEAR(decision(m, Eigen::Vector2d(-2, 7)), 3 * -2 + 4 * 7 - 5, 1e-12);
  EXPECT_THROW(decision(m, Eigen::Vector3d(1, 1, 1)), InvalidInput);
  m.weights.setZero();
  EXPECT_THROW(margin(m), DegenerateError);
}

TEST(LinearSvm, MarginScalesWithFeatures) {
  const auto p = separable(20, 8);
  const auto a = train_linear(p.X, p.y, 1e6);
  const auto b = train_linear(2.0 * p.X, p.y, 1e6);
  EXPECT_NEAR(margin(b), 2.0 * margin(a), 1e-5 * margin(b));
}

TEST(LinearSvm, Validation) {
  Eigen::MatrixXd X(2, 1);
  X << 0, 1;
  EXPECT_THROW(train_linear(X, std::vector<double>{1, 1}, 1.0), InvalidInput);
  EXPECT_THROW(train_linear(X, std::vector<double>{1, -1}, 0.0), InvalidInput);
  EXPECT_THROW(train_linear(X, std::vector<double>{1, 0}, 1.0), InvalidInput);
  EXPECT_THROW(train_linear(X, std::vector<double>{1}, 1.0), InvalidInput);
}

TEST(KernelSvm, MatchesLinearOnExplicitFeatures) {
  const auto p = overlapping(30, 9);
  const auto lin = train_linear(p.X, p.y, 1.0);
  const auto ker = train_kernel(p.X * p.X.transpose(), p.y, 1.0);
  for (double u = -2; u <= 2; u += 0.5) {
    const Eigen::Vector2d z(u, -u / 2);
    const Eigen::VectorXd kvec = p.X * z;
    EXPECT_NEAR(decision(ker, kvec), decision(lin, z), 1e-6);
  }
}

TEST(KernelSvm, IdentityKernelSymmetricSolution) {
  const std::vector<double> y{1, -1, 1, -1, 1, -1};
  const auto m = train_kernel(Eigen::MatrixXd::Identity(6, 6), y, 1.0);
  EXPECT_EQ(m.support.size(), 6u);
  for (Eigen::Index i = 1; i < 6; ++i) EXPECT_NEAR(m.alphas(i), m.alphas(0), 1e-6);
}

TEST(KernelSvm, RbfSolvesOneDimensionalXor) {
  Eigen::MatrixXd X(4, 1);
  X << 0, 1, 2, 3;
  const std::vector<double> y{1, -1, 1, -1};
  const auto K = rbf_gram(X, 10.0);
  const auto m = train_kernel(K, y, 100.0);
  for (Eigen::Index i = 0; i < 4; ++i) {
    const Eigen::VectorXd kvec = K.col(i);
    EXPECT_GT(y[static_cast<std::size_t>(i)] * decision(m, kvec), 0.0);
  }
}
