#pragma once

#include <Eigen/Core>

namespace qforest::linalg {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

inline constexpr double kSymmetryTolerance = 1e-8;
inline constexpr double kDefaultRelativeCutoff = 1e-10;

/// Spectrum of a symmetric matrix: eigenvalues in descending order and the
/// matching orthonormal eigenvectors as columns.
struct Eigh {
  Vector values;
  Matrix vectors;
};

bool is_symmetric(const Matrix& a, double tol = kSymmetryTolerance);

/// Throws InvalidInput unless `a` is square and symmetric within `tol`
/// (relative to the largest absolute entry when that exceeds 1).
void require_symmetric(const Matrix& a, double tol = kSymmetryTolerance);

/// Cyclic Jacobi eigendecomposition. Sweeps until the off-diagonal Frobenius
/// mass drops below 1e-12 * ||A||_F.
Eigh eigh(const Matrix& a);

/// Moore-Penrose pseudo-inverse of a symmetric matrix; eigenvalues with
/// |lambda| <= rel_cutoff * max|lambda| are treated as zero.
Matrix pinv(const Matrix& a, double rel_cutoff = kDefaultRelativeCutoff);

/// Square root of a PSD matrix; eigenvalues below `clamp_tol` (relative to
/// the largest) are clamped to zero.
Matrix sqrt_psd(const Matrix& a, double clamp_tol = 1e-10);

/// Largest singular value of `a` by power iteration on a^T a.
double spectral_norm(const Matrix& a, int max_iterations = 200, double rel_tol = 1e-8);

/// Smallest eigenvalue of a symmetric matrix.
double min_eigenvalue(const Matrix& a);

}  // namespace qforest::linalg
