#include "qforest/svm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "qforest/error.hpp"

namespace qforest::svm {

namespace {

constexpr double kTau = 1e-12;

void validate(const Eigen::MatrixXd& K, std::span<const double> y, double C) {
  if (K.rows() != K.cols()) throw InvalidInput("kernel matrix must be square");
  if (static_cast<std::size_t>(K.rows()) != y.size()) throw InvalidInput("label count does not match data");
  if (!(C > 0.0)) throw InvalidInput("C must be positive");
  bool pos = false;
  bool neg = false;
  for (double v : y) {
    if (v == 1.0) {
      pos = true;
    } else if (v == -1.0) {
      neg = true;
    } else {
      throw InvalidInput("labels must be -1 or +1");
    }
  }
  if (!pos || !neg) throw InvalidInput("SVM training needs both classes");
}

}  // namespace

double dual_objective(const Eigen::MatrixXd& K, std::span<const double> y, const Eigen::VectorXd& alphas) {
  const Eigen::Map<const Eigen::VectorXd> labels(y.data(), static_cast<Eigen::Index>(y.size()));
  const Eigen::VectorXd ay = alphas.cwiseProduct(labels);
  return alphas.sum() - 0.5 * ay.dot(K * ay);
}

DualSolution solve_dual(const Eigen::MatrixXd& K, std::span<const double> y, double C, const SolverOptions& options) {
  validate(K, y, C);
  const Eigen::Index n = K.rows();
  const Eigen::Map<const Eigen::VectorXd> labels(y.data(), n);
  const Eigen::MatrixXd Q = labels.asDiagonal() * K * labels.asDiagonal();

  Eigen::VectorXd alpha = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd grad = Eigen::VectorXd::Constant(n, -1.0);  // Q alpha - 1

  auto in_up = [&](Eigen::Index t) { return (labels(t) > 0) ? alpha(t) < C : alpha(t) > 0; };
  auto in_low = [&](Eigen::Index t) { return (labels(t) > 0) ? alpha(t) > 0 : alpha(t) < C; };
  auto objective = [&] { return -(0.5 * alpha.dot(grad - Eigen::VectorXd::Constant(n, -1.0)) - alpha.sum()); };

  DualSolution out;
  const std::size_t max_iterations = static_cast<std::size_t>(std::max(1, options.max_passes)) * static_cast<std::size_t>(n);
  double gap = std::numeric_limits<double>::infinity();

  while (true) {
    // Working set: i maximises -y_t grad_t over I_up; j minimises the
    // second-order decrease estimate over I_low.
    double g_max = -std::numeric_limits<double>::infinity();
    Eigen::Index i = -1;
    for (Eigen::Index t = 0; t < n; ++t) {
      if (in_up(t) && -labels(t) * grad(t) >= g_max) {
        if (-labels(t) * grad(t) > g_max || i < 0) {
          g_max = -labels(t) * grad(t);
          i = t;
        }
      }
    }
    double g_min = std::numeric_limits<double>::infinity();
    Eigen::Index j = -1;
    double best = std::numeric_limits<double>::infinity();
    for (Eigen::Index t = 0; t < n; ++t) {
      if (!in_low(t)) continue;
      const double v = -labels(t) * grad(t);
      g_min = std::min(g_min, v);
      if (i < 0) continue;
      const double b = g_max - v;
      if (b > 0) {
        double a = Q(i, i) + Q(t, t) - 2.0 * labels(i) * labels(t) * Q(i, t);
        if (a <= 0) a = kTau;
        const double score = -(b * b) / a;
        if (score < best) {
          best = score;
          j = t;
        }
      }
    }
    gap = g_max - g_min;
    if (i < 0 || j < 0 || gap < options.tol) {
      out.converged = true;
      break;
    }
    if (out.iterations >= max_iterations) break;
    ++out.iterations;

    const double old_ai = alpha(i);
    const double old_aj = alpha(j);
    if (labels(i) != labels(j)) {
      double quad = Q(i, i) + Q(j, j) + 2.0 * Q(i, j);
      if (quad <= 0) quad = kTau;
      const double delta = (-grad(i) - grad(j)) / quad;
      const double diff = alpha(i) - alpha(j);
      alpha(i) += delta;
      alpha(j) += delta;
      if (diff > 0) {
        if (alpha(j) < 0) {
          alpha(j) = 0;
          alpha(i) = diff;
        }
      } else if (alpha(i) < 0) {
        alpha(i) = 0;
        alpha(j) = -diff;
      }
      if (diff > 0) {
        if (alpha(i) > C) {
          alpha(i) = C;
          alpha(j) = C - diff;
        }
      } else if (alpha(j) > C) {
        alpha(j) = C;
        alpha(i) = C + diff;
      }
    } else {
      double quad = Q(i, i) + Q(j, j) - 2.0 * Q(i, j);
      if (quad <= 0) quad = kTau;
      const double delta = (grad(i) - grad(j)) / quad;
      const double sum = alpha(i) + alpha(j);
      alpha(i) -= delta;
      alpha(j) += delta;
      if (sum > C) {
        if (alpha(i) > C) {
          alpha(i) = C;
          alpha(j) = sum - C;
        }
      } else if (alpha(j) < 0) {
        alpha(j) = 0;
        alpha(i) = sum;
      }
      if (sum > C) {
        if (alpha(j) > C) {
          alpha(j) = C;
          alpha(i) = sum - C;
        }
      } else if (alpha(i) < 0) {
        alpha(i) = 0;
        alpha(j) = sum;
      }
    }

    const double di = alpha(i) - old_ai;
    const double dj = alpha(j) - old_aj;
    grad += Q.col(i) * di + Q.col(j) * dj;

    if (options.record_objective && out.iterations % static_cast<std::size_t>(n) == 0) {
      out.objective_trace.push_back(objective());
    }
  }

  // Bias from free vectors; otherwise the midpoint of the feasible interval.
  double upper = std::numeric_limits<double>::infinity();
  double lower = -std::numeric_limits<double>::infinity();
  double free_sum = 0.0;
  int free_count = 0;
  for (Eigen::Index t = 0; t < n; ++t) {
    const double yg = labels(t) * grad(t);
    const bool at_upper = alpha(t) >= C;
    const bool at_lower = alpha(t) <= 0;
    if (at_upper) {
      if (labels(t) < 0) upper = std::min(upper, yg); else lower = std::max(lower, yg);
    } else if (at_lower) {
      if (labels(t) > 0) upper = std::min(upper, yg); else lower = std::max(lower, yg);
    } else {
      ++free_count;
      free_sum += yg;
    }
  }
  const double rho = free_count > 0 ? free_sum / free_count : 0.5 * (upper + lower);

  out.alphas = alpha;
  out.bias = -rho;
  out.kkt_gap = gap;
  out.objective = dual_objective(K, y, alpha);
  if (options.record_objective) out.objective_trace.push_back(out.objective);
  return out;
}

double kkt_violation(const Eigen::MatrixXd& K, std::span<const double> y, const Eigen::VectorXd& alphas, double bias,
                     double C) {
  const Eigen::Map<const Eigen::VectorXd> labels(y.data(), static_cast<Eigen::Index>(y.size()));
  const Eigen::VectorXd f = K * alphas.cwiseProduct(labels) + Eigen::VectorXd::Constant(K.rows(), bias);
  double worst = 0.0;
  for (Eigen::Index i = 0; i < K.rows(); ++i) {
    const double margin = labels(i) * f(i);
    double v = 0.0;
    if (alphas(i) <= 0.0) {
      v = std::max(0.0, 1.0 - margin);
    } else if (alphas(i) >= C) {
      v = std::max(0.0, margin - 1.0);
    } else {
      v = std::abs(margin - 1.0);
    }
    worst = std::max(worst, v);
  }
  return worst;
}

LinearModel train_linear(const Eigen::MatrixXd& features, std::span<const double> y, double C,
                         const SolverOptions& options) {
  if (static_cast<std::size_t>(features.rows()) != y.size()) throw InvalidInput("label count does not match data");
  const Eigen::MatrixXd K = features * features.transpose();
  const DualSolution sol = solve_dual(K, y, C, options);
  const Eigen::Map<const Eigen::VectorXd> labels(y.data(), static_cast<Eigen::Index>(y.size()));
  LinearModel model;
  model.weights = features.transpose() * sol.alphas.cwiseProduct(labels);
  model.bias = sol.bias;
  model.alphas = sol.alphas;
  model.C = C;
  model.converged = sol.converged;
  model.iterations = sol.iterations;
  return model;
}

double decision(const LinearModel& model, const Eigen::VectorXd& z) {
  if (z.size() != model.weights.size()) throw InvalidInput("feature dimension mismatch");
  return model.weights.dot(z) + model.bias;
}

double margin(const LinearModel& model) {
  const double norm = model.weights.norm();
  if (norm == 0.0) throw DegenerateError("zero weight vector has no margin");
  return 2.0 / norm;
}

KernelModel train_kernel(const Eigen::MatrixXd& K, std::span<const double> y, double C, const SolverOptions& options) {
  const DualSolution sol = solve_dual(K, y, C, options);
  KernelModel model;
  model.alphas = sol.alphas;
  model.bias = sol.bias;
  model.C = C;
  model.converged = sol.converged;
  model.iterations = sol.iterations;
  std::vector<double> coefficients;
  for (Eigen::Index i = 0; i < sol.alphas.size(); ++i) {
    if (sol.alphas(i) > 0.0) {
      model.support.push_back(static_cast<std::size_t>(i));
      coefficients.push_back(sol.alphas(i) * y[static_cast<std::size_t>(i)]);
    }
  }
  model.coefficients = Eigen::Map<Eigen::VectorXd>(coefficients.data(), static_cast<Eigen::Index>(coefficients.size()));
  return model;
}

double decision(const KernelModel& model, const Eigen::VectorXd& kvec) {
  double f = model.bias;
  for (std::size_t s = 0; s < model.support.size(); ++s) {
    const auto idx = static_cast<Eigen::Index>(model.support[s]);
    if (idx >= kvec.size()) throw InvalidInput("kernel vector shorter than the training set");
    f += model.coefficients(static_cast<Eigen::Index>(s)) * kvec(idx);
  }
  return f;
}

}  // namespace qforest::svm
