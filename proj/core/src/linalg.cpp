#include "qforest/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "qforest/error.hpp"

namespace qforest::linalg {

bool is_symmetric(const Matrix& a, double tol) {
  if (a.rows() != a.cols()) return false;
  const double scale = std::max(1.0, a.cwiseAbs().maxCoeff());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = i + 1; j < a.cols(); ++j) {
      if (std::abs(a(i, j) - a(j, i)) > tol * scale) return false;
    }
  }
  return true;
}

void require_symmetric(const Matrix& a, double tol) {
  if (a.rows() != a.cols()) throw InvalidInput("matrix is not square");
  if (!is_symmetric(a, tol)) throw InvalidInput("matrix is not symmetric");
}

Eigh eigh(const Matrix& input) {
  require_symmetric(input);
  const Eigen::Index n = input.rows();
  Matrix a = 0.5 * (input + input.transpose());
  Matrix v = Matrix::Identity(n, n);

  const double total = a.norm();
  const double threshold = 1e-12 * total;
  constexpr int kMaxSweeps = 100;

  auto off_diagonal = [&] {
    double sum = 0.0;
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = i + 1; j < n; ++j) sum += 2.0 * a(i, j) * a(i, j);
    return std::sqrt(sum);
  };

  for (int sweep = 0; sweep < kMaxSweeps && total > 0.0; ++sweep) {
    if (off_diagonal() < threshold) break;
    for (Eigen::Index p = 0; p < n - 1; ++p) {
      for (Eigen::Index q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) continue;
        const double app = a(p, p);
        const double aqq = a(q, q);
        // Rotation angle chosen to annihilate a(p, q).
        const double theta = (aqq - app) / (2.0 * apq);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;

        for (Eigen::Index k = 0; k < n; ++k) {
          const double akp = a(k, p);
          const double akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (Eigen::Index k = 0; k < n; ++k) {
          const double apk = a(p, k);
          const double aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
        a(p, q) = 0.0;
        a(q, p) = 0.0;
        for (Eigen::Index k = 0; k < n; ++k) {
          const double vkp = v(k, p);
          const double vkq = v(k, q);
          v(k, p) = c * vkp - s * vkq;
          v(k, q) = s * vkp + c * vkq;
        }
      }
    }
  }

  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](Eigen::Index x, Eigen::Index y) { return a(x, x) > a(y, y); });

  Eigh out{Vector(n), Matrix(n, n)};
  for (Eigen::Index k = 0; k < n; ++k) {
    const Eigen::Index src = order[static_cast<std::size_t>(k)];
    out.values(k) = a(src, src);
    out.vectors.col(k) = v.col(src);
  }
  return out;
}

Matrix pinv(const Matrix& a, double rel_cutoff) {
  const Eigh e = eigh(a);
  const double largest = e.values.cwiseAbs().maxCoeff();
  Vector inv = Vector::Zero(e.values.size());
  if (largest > 0.0) {
    for (Eigen::Index i = 0; i < inv.size(); ++i) {
      if (std::abs(e.values(i)) > rel_cutoff * largest) inv(i) = 1.0 / e.values(i);
    }
  }
  return e.vectors * inv.asDiagonal() * e.vectors.transpose();
}

Matrix sqrt_psd(const Matrix& a, double clamp_tol) {
  const Eigh e = eigh(a);
  const double largest = std::max(0.0, e.values.maxCoeff());
  Vector root = Vector::Zero(e.values.size());
  for (Eigen::Index i = 0; i < root.size(); ++i) {
    if (e.values(i) > clamp_tol * largest) root(i) = std::sqrt(e.values(i));
  }
  return e.vectors * root.asDiagonal() * e.vectors.transpose();
}

double spectral_norm(const Matrix& a, int max_iterations, double rel_tol) {
  if (a.size() == 0) return 0.0;
  // Fixed, non-degenerate start vector so the result is reproducible.
  Vector x(a.cols());
  for (Eigen::Index i = 0; i < x.size(); ++i) x(i) = 1.0 + 0.1 * std::sin(1.0 + static_cast<double>(i));
  x.normalize();

  double estimate = 0.0;
  for (int it = 0; it < max_iterations; ++it) {
    const Vector ax = a * x;
    const double norm_ax = ax.norm();
    if (norm_ax == 0.0) return 0.0;
    Vector next = a.transpose() * ax;
    const double norm_next = next.norm();
    if (norm_next == 0.0) return norm_ax;
    x = next / norm_next;
    const double updated = (a * x).norm();
    const bool converged = std::abs(updated - estimate) <= rel_tol * updated;
    estimate = updated;
    if (converged) break;
  }
  return estimate;
}

double min_eigenvalue(const Matrix& a) {
  const Eigh e = eigh(a);
  return e.values.size() == 0 ? 0.0 : e.values(e.values.size() - 1);
}

}  // namespace qforest::linalg
