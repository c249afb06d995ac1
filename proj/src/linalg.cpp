#include "dkfsel/linalg.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <cmath>

#include "dkfsel/errors.hpp"

namespace dkfsel {

bool is_effectively_singular(const Matrix& a, double tol) {
  if (a.rows() != a.cols()) {
    throw DimensionError("is_effectively_singular: matrix is not square");
  }
  if (a.size() == 0) return true;
  const Eigen::JacobiSVD<Matrix> svd(a);
  const auto& s = svd.singularValues();
  const double smax = s(0);
  const double smin = s(s.size() - 1);
  if (!(smax > 0.0)) return true;
  return smin < tol * smax;
}

Matrix pseudo_inverse(const Matrix& a, double tol) {
  const Eigen::JacobiSVD<Matrix> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& s = svd.singularValues();
  const double cutoff = s.size() > 0 ? tol * s(0) : 0.0;
  Vector inv_s(s.size());
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    inv_s(i) = (s(i) > cutoff && s(i) > 0.0) ? 1.0 / s(i) : 0.0;
  }
  return svd.matrixV() * inv_s.asDiagonal() * svd.matrixU().transpose();
}

InverseResult inverse_or_pinv(const Matrix& a, double tol) {
  if (is_effectively_singular(a, tol)) {
    return {pseudo_inverse(a, tol), true};
  }
  return {a.partialPivLu().inverse(), false};
}

double min_eigenvalue(const Matrix& symmetric) {
  const Eigen::SelfAdjointEigenSolver<Matrix> es(symmetrize(symmetric),
                                                 Eigen::EigenvaluesOnly);
  return es.eigenvalues()(0);
}

double max_eigenvalue(const Matrix& symmetric) {
  const Eigen::SelfAdjointEigenSolver<Matrix> es(symmetrize(symmetric),
                                                 Eigen::EigenvaluesOnly);
  return es.eigenvalues()(es.eigenvalues().size() - 1);
}

Matrix psd_sqrt(const Matrix& symmetric) {
  const Eigen::SelfAdjointEigenSolver<Matrix> es(symmetrize(symmetric));
  const Vector root = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return es.eigenvectors() * root.asDiagonal() * es.eigenvectors().transpose();
}

bool is_symmetric(const Matrix& a, double tol) {
  return a.rows() == a.cols() && (a - a.transpose()).cwiseAbs().maxCoeff() <= tol;
}

bool psd_geq(const Matrix& a, const Matrix& b, double tol) {
  return min_eigenvalue(a - b) >= -tol;
}

bool all_finite(const Matrix& a) { return a.allFinite(); }

}  // namespace dkfsel
