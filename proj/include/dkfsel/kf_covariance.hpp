#pragma once

#include <vector>

#include "dkfsel/linalg.hpp"
#include "dkfsel/model.hpp"

namespace dkfsel {

struct CovarianceKfResult {
  Trajectory x_post;               ///< x(k|k), k = 0..N
  std::vector<Matrix> cov_post;    ///< Sigma(k|k)
  std::vector<Matrix> cov_prior;   ///< Sigma(k|k-1)
  std::vector<Matrix> gain;        ///< L(k) = Sigma(k|k) H^T R^{-1}
};

/// Textbook covariance-form Kalman filter on a stacked measurement model.
/// `measurements` is p x (n_steps + 1); z(k) is column k. Starts from the
/// prior x(0|-1), Sigma(0|-1). Throws NumericError when the innovation
/// covariance is singular.
CovarianceKfResult kf_covariance_form(const LtvSystem& sys, const Matrix& h_stacked,
                                      const Matrix& r_blockdiag, const Matrix& measurements,
                                      long n_steps, const Vector& x_prior0,
                                      const Matrix& cov_prior0);

}  // namespace dkfsel
