#pragma once

#include <Eigen/Dense>

namespace dkfsel {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Relative tolerance shared by every inverse -> pseudo-inverse switch.
inline constexpr double kDefaultSingularTol = 1e-10;

/// True iff sigma_min < tol * sigma_max (a zero matrix is always singular).
bool is_effectively_singular(const Matrix& a, double tol = kDefaultSingularTol);

struct InverseResult {
  Matrix inverse;
  bool pseudo = false;  ///< pseudo-inverse was substituted
};

/// Inverse of a square matrix, falling back to the Moore-Penrose
/// pseudo-inverse when `is_effectively_singular(a, tol)`.
InverseResult inverse_or_pinv(const Matrix& a, double tol = kDefaultSingularTol);

Matrix pseudo_inverse(const Matrix& a, double tol = kDefaultSingularTol);

inline Matrix symmetrize(const Matrix& a) { return 0.5 * (a + a.transpose()); }

double min_eigenvalue(const Matrix& symmetric);
double max_eigenvalue(const Matrix& symmetric);

/// Symmetric PSD square root via eigen-decomposition (negative eigenvalues
/// are clipped to zero).
Matrix psd_sqrt(const Matrix& symmetric);

bool is_symmetric(const Matrix& a, double tol);

/// a - b is PSD up to `tol` on the smallest eigenvalue.
bool psd_geq(const Matrix& a, const Matrix& b, double tol);

bool all_finite(const Matrix& a);

}  // namespace dkfsel
