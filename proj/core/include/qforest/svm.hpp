#pragma once

#include <Eigen/Core>
#include <cstddef>
#include <span>
#include <vector>

namespace qforest::svm {

struct SolverOptions {
  double tol = 1e-6;     // stop when the maximal KKT violation gap falls below tol
  int max_passes = 200;  // one pass = N pair updates
  bool record_objective = false;
};

/// Solution of the box-constrained C-SVM dual
///   max sum(a) - 1/2 a^T Q a,  Q_ij = y_i y_j K_ij,  0 <= a <= C,  y^T a = 0.
struct DualSolution {
  Eigen::VectorXd alphas;
  double bias = 0.0;
  bool converged = false;
  std::size_t iterations = 0;
  double objective = 0.0;
  double kkt_gap = 0.0;
  std::vector<double> objective_trace;  // after every pass, if requested
};

/// SMO with second-order working-set selection.
DualSolution solve_dual(const Eigen::MatrixXd& K, std::span<const double> y, double C, const SolverOptions& options = {});

double dual_objective(const Eigen::MatrixXd& K, std::span<const double> y, const Eigen::VectorXd& alphas);

/// Largest violation of the KKT conditions of the soft-margin problem for
/// decision values f_i = sum_j a_j y_j K_ij + b.
double kkt_violation(const Eigen::MatrixXd& K, std::span<const double> y, const Eigen::VectorXd& alphas, double bias,
                     double C);

struct LinearModel {
  Eigen::VectorXd weights;
  double bias = 0.0;
  Eigen::VectorXd alphas;
  double C = 1.0;
  bool converged = false;
  std::size_t iterations = 0;
};

/// Soft-margin linear SVM on explicit features (one row per point), labels in {-1, +1}.
LinearModel train_linear(const Eigen::MatrixXd& features, std::span<const double> y, double C,
                         const SolverOptions& options = {});

double decision(const LinearModel& model, const Eigen::VectorXd& z);

/// Geometric margin width 2 / ||w||. Throws DegenerateError for w = 0.
double margin(const LinearModel& model);

struct KernelModel {
  std::vector<std::size_t> support;  // training indices with a_i > 0
  Eigen::VectorXd coefficients;      // a_i y_i for each support index
  Eigen::VectorXd alphas;            // all training points
  double bias = 0.0;
  double C = 1.0;
  bool converged = false;
  std::size_t iterations = 0;
};

KernelModel train_kernel(const Eigen::MatrixXd& K, std::span<const double> y, double C,
                         const SolverOptions& options = {});

/// kvec holds k(x, x_i) for every training point i.
double decision(const KernelModel& model, const Eigen::VectorXd& kvec);

}  // namespace qforest::svm
