#include "dkfsel/kf_covariance.hpp"

#include <string>

#include "dkfsel/errors.hpp"

namespace dkfsel {

CovarianceKfResult kf_covariance_form(const LtvSystem& sys, const Matrix& h_stacked,
                                      const Matrix& r_blockdiag, const Matrix& measurements,
                                      long n_steps, const Vector& x_prior0,
                                      const Matrix& cov_prior0) {
  const auto m = static_cast<Eigen::Index>(sys.state_dim);
  const auto p = h_stacked.rows();
  if (h_stacked.cols() != m || r_blockdiag.rows() != p || r_blockdiag.cols() != p ||
      measurements.rows() != p || measurements.cols() < n_steps + 1 || x_prior0.size() != m ||
      cov_prior0.rows() != m || cov_prior0.cols() != m) {
    throw DimensionError("kf_covariance_form: inconsistent dimensions");
  }
  sys.require_horizon(n_steps);

  CovarianceKfResult out;
  out.x_post.states.resize(m, n_steps + 1);
  Vector x = x_prior0;
  Matrix cov = cov_prior0;
  const Matrix eye = Matrix::Identity(m, m);
  for (long k = 0; k <= n_steps; ++k) {
    out.cov_prior.push_back(cov);
    const Matrix s = h_stacked * cov * h_stacked.transpose() + r_blockdiag;
    const Eigen::FullPivLU<Matrix> lu(s);
    if (!lu.isInvertible()) {
      throw NumericError("innovation covariance singular at step " + std::to_string(k));
    }
    const Matrix k_gain = cov * h_stacked.transpose() * lu.inverse();
    x = x + k_gain * (measurements.col(k) - h_stacked * x);
    // Joseph form keeps the covariance symmetric PSD.
    const Matrix ikh = eye - k_gain * h_stacked;
    cov = symmetrize(ikh * cov * ikh.transpose() + k_gain * r_blockdiag * k_gain.transpose());
    out.x_post[k] = x;
    out.cov_post.push_back(cov);
    if (!is_effectively_singular(r_blockdiag)) {
      out.gain.push_back(cov * h_stacked.transpose() *
                         r_blockdiag.ldlt().solve(Matrix::Identity(p, p)));
    } else {
      out.gain.push_back(k_gain);
    }
    if (k < n_steps) {
      const Matrix a = transition_matrix(sys, k);
      x = a * x;
      cov = symmetrize(a * cov * a.transpose() + sys.process_noise_cov);
    }
  }
  return out;
}

}  // namespace dkfsel
