#pragma once

// Independent reference implementations used only by tests. None of them
// shares code with the library routine it checks.

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <vector>

namespace oracle {

using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using cd = std::complex<double>;

inline CMatrix kron(const CMatrix& a, const CMatrix& b) {
  CMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  }
  return out;
}

// Single-qubit operator on qubit q of n; qubit j is bit j of the basis index,
// so the Kronecker product runs from qubit n-1 down to qubit 0.
inline CMatrix on_qubit(const CMatrix& op, int q, int n) {
  CMatrix out = CMatrix::Identity(1, 1);
  for (int j = n - 1; j >= 0; --j) out = kron(out, j == q ? op : CMatrix::Identity(2, 2));
  return out;
}

inline CMatrix hadamard() {
  CMatrix h(2, 2);
  const double s = 1.0 / std::sqrt(2.0);
  h << s, s, s, -s;
  return h;
}

inline CMatrix pauli_z() {
  CMatrix z = CMatrix::Zero(2, 2);
  z(0, 0) = 1;
  z(1, 1) = -1;
  return z;
}

inline CMatrix pauli_x() {
  CMatrix x = CMatrix::Zero(2, 2);
  x(0, 1) = 1;
  x(1, 0) = 1;
  return x;
}

inline CMatrix ry(double t) {
  CMatrix m(2, 2);
  m << std::cos(t / 2), -std::sin(t / 2), std::sin(t / 2), std::cos(t / 2);
  return m;
}

inline CMatrix rz(double t) {
  CMatrix m = CMatrix::Zero(2, 2);
  m(0, 0) = std::exp(cd(0, -t / 2));
  m(1, 1) = std::exp(cd(0, t / 2));
  return m;
}

// |0><0|_c (x) I + |1><1|_c (x) X_t.
inline CMatrix cnot(int c, int t, int n) {
  CMatrix p0 = CMatrix::Zero(2, 2);
  p0(0, 0) = 1;
  CMatrix p1 = CMatrix::Zero(2, 2);
  p1(1, 1) = 1;
  CMatrix a = CMatrix::Identity(1, 1);
  CMatrix b = CMatrix::Identity(1, 1);
  for (int j = n - 1; j >= 0; --j) {
    a = kron(a, j == c ? p0 : CMatrix::Identity(2, 2));
    b = kron(b, j == c ? p1 : (j == t ? pauli_x() : CMatrix::Identity(2, 2)));
  }
  return a + b;
}

inline CVector zero_state(int n) {
  CVector v = CVector::Zero(Eigen::Index{1} << n);
  v(0) = 1;
  return v;
}

// U_Z = exp(iA) with A = sum_j x_j Z_j + sum_{j<k} x_j x_k Z_j Z_k, built from
// full Pauli matrices; A is diagonal so the exponential is entrywise.
inline CMatrix iqp_phase(const std::vector<double>& x) {
  const int n = static_cast<int>(x.size());
  const Eigen::Index dim = Eigen::Index{1} << n;
  CMatrix a = CMatrix::Zero(dim, dim);
  for (int j = 0; j < n; ++j) {
    const CMatrix zj = on_qubit(pauli_z(), j, n);
    a += x[j] * zj;
    for (int k = j + 1; k < n; ++k) a += x[j] * x[k] * zj * on_qubit(pauli_z(), k, n);
  }
  CMatrix u = CMatrix::Zero(dim, dim);
  for (Eigen::Index i = 0; i < dim; ++i) u(i, i) = std::exp(cd(0, 1) * a(i, i));
  return u;
}

inline CVector iqp_state(const std::vector<double>& x) {
  const int n = static_cast<int>(x.size());
  CMatrix h = CMatrix::Identity(Eigen::Index{1} << n, Eigen::Index{1} << n);
  for (int j = 0; j < n; ++j) h = on_qubit(hadamard(), j, n) * h;
  const CMatrix uz = iqp_phase(x);
  return uz * h * uz * h * zero_state(n);
}

inline CMatrix entangler(int n) {
  CMatrix e = CMatrix::Identity(Eigen::Index{1} << n, Eigen::Index{1} << n);
  for (int j = 0; j + 1 < n; j += 2) e = cnot(j, j + 1, n) * e;
  for (int j = 1; j + 1 < n; j += 2) e = cnot(j, j + 1, n) * e;
  return e;
}

inline CVector hea_state(const std::vector<double>& x, int n, int layers) {
  const int d = static_cast<int>(x.size());
  CVector psi = zero_state(n);
  const CMatrix e = entangler(n);
  for (int l = 0; l < layers; ++l) {
    for (int j = 0; j < n; ++j) psi = on_qubit(ry(x[(2 * n * l + j) % d]), j, n) * psi;
    psi = e * psi;
    for (int j = 0; j < n; ++j) psi = on_qubit(rz(x[(2 * n * l + n + j) % d]), j, n) * psi;
    psi = e * psi;
  }
  return psi;
}

// Interval state sum_j |x g^j mod p> / sqrt(2^q) as a dense vector over Z_p.
inline Eigen::VectorXd dlp_state(std::int64_t x, std::int64_t p, std::int64_t g, int q) {
  Eigen::VectorXd v = Eigen::VectorXd::Zero(p);
  std::int64_t cur = x % p;
  for (std::int64_t j = 0; j < (std::int64_t{1} << q); ++j) {
    v(cur) += 1.0;
    cur = cur * g % p;
  }
  return v / std::sqrt(static_cast<double>(std::int64_t{1} << q));
}

inline double dlp_kernel(const std::vector<std::int64_t>& a, const std::vector<std::int64_t>& b, std::int64_t p,
                         std::int64_t g, int q) {
  double k = 1.0;
  for (std::size_t d = 0; d < a.size(); ++d) {
    const double o = dlp_state(a[d], p, g, q).dot(dlp_state(b[d], p, g, q));
    k *= o * o;
  }
  return k;
}

inline std::int64_t brute_log(std::int64_t x, std::int64_t p, std::int64_t g) {
  std::int64_t cur = 1;
  for (std::int64_t e = 0; e < p - 1; ++e) {
    if (cur == x) return e;
    cur = cur * g % p;
  }
  return -1;
}

// Accelerated projected gradient on the SVM dual
//   min 1/2 a^T Q a - sum(a)  s.t. 0 <= a <= C, y^T a = 0.
// The projection solves for the multiplier of the equality by bisection.
inline Eigen::VectorXd project_box_hyperplane(const Eigen::VectorXd& v, const Eigen::VectorXd& y, double C) {
  auto clipped = [&](double mu) {
    Eigen::VectorXd a = v - mu * y;
    for (Eigen::Index i = 0; i < a.size(); ++i) a(i) = std::clamp(a(i), 0.0, C);
    return a;
  };
  double lo = -1e6;
  double hi = 1e6;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (y.dot(clipped(mid)) > 0) lo = mid; else hi = mid;
  }
  return clipped(0.5 * (lo + hi));
}

inline Eigen::VectorXd pg_svm_dual(const Eigen::MatrixXd& K, const Eigen::VectorXd& y, double C, int iters = 20000) {
  const Eigen::MatrixXd Q = y.asDiagonal() * K * y.asDiagonal();
  const double lmax = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(Q).eigenvalues().maxCoeff();
  const double step = 1.0 / std::max(lmax, 1e-12);
  Eigen::VectorXd a = Eigen::VectorXd::Zero(K.rows());
  Eigen::VectorXd z = a;
  double t = 1.0;
  for (int it = 0; it < iters; ++it) {
    const Eigen::VectorXd grad = Q * z - Eigen::VectorXd::Ones(K.rows());
    const Eigen::VectorXd next = project_box_hyperplane(z - step * grad, y, C);
    const double tn = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
    z = next + ((t - 1.0) / tn) * (next - a);
    a = next;
    t = tn;
  }
  return a;
}

inline double dual_value(const Eigen::MatrixXd& K, const Eigen::VectorXd& y, const Eigen::VectorXd& a) {
  const Eigen::VectorXd ay = a.cwiseProduct(y);
  return a.sum() - 0.5 * ay.dot(K * ay);
}

// Ranks by counting: rank = #smaller + (#equal + 1) / 2.
inline std::vector<double> count_ranks(const std::vector<double>& v) {
  std::vector<double> r(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    double less = 0;
    double equal = 0;
    for (double w : v) {
      if (w < v[i]) less += 1;
      if (w == v[i]) equal += 1;
    }
    r[i] = less + (equal + 1.0) / 2.0;
  }
  return r;
}

inline double pearson(const std::vector<double>& a, const std::vector<double>& b) {
  const double n = static_cast<double>(a.size());
  double ma = 0, mb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ma += a[i] / n;
    mb += b[i] / n;
  }
  double sab = 0, saa = 0, sbb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  return sab / std::sqrt(saa * sbb);
}

inline double entropy_bits(const std::vector<int>& labels) {
  std::vector<double> counts;
  for (int y : labels) {
    if (static_cast<std::size_t>(y) >= counts.size()) counts.resize(static_cast<std::size_t>(y) + 1, 0.0);
    counts[static_cast<std::size_t>(y)] += 1.0;
  }
  double h = 0;
  for (double c : counts) {
    if (c > 0) h -= c / labels.size() * std::log2(c / labels.size());
  }
  return h;
}

}  // namespace oracle
