#include "dkfsel/stability.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "dkfsel/dkf.hpp"
#include "dkfsel/errors.hpp"

namespace dkfsel {

namespace {

constexpr double kOrderTol = 1e-9;

void require_finite(const Matrix& a, const char* what) {
  if (!a.allFinite()) throw NumericError(std::string(what) + " is not finite");
}

}  // namespace

void StabilityParams::validate() const {
  if (k_bar < 1) throw ValidationError("k_bar must be >= 1");
  if (!(alpha > 0.0)) throw ValidationError("alpha must be > 0");
  if (!(beta_hat > 0.0 && beta_hat <= 1.0)) throw ValidationError("beta_hat must lie in (0, 1]");
}

Matrix psi_expanded(const Matrix& info, const Matrix& a_k, const Matrix& q, double tol) {
  const Matrix a_inv = inverse_or_pinv(a_k, tol).inverse;
  const Matrix q_inv = q.llt().solve(Matrix::Identity(q.rows(), q.cols()));
  const Matrix inner = info + a_k.transpose() * q_inv * a_k;
  const Matrix inner_inv = inverse_or_pinv(inner, tol).inverse;
  const Matrix base = a_inv.transpose() * info * a_inv;
  Matrix out = symmetrize(base - a_inv.transpose() * info * inner_inv * info * a_inv);
  require_finite(out, "psi");
  return out;
}

Matrix psi(const Matrix& info, const Matrix& a_k, const Matrix& q, double tol) {
  if (info.rows() != a_k.rows() || q.rows() != a_k.rows()) {
    throw DimensionError("psi: inconsistent dimensions");
  }
  if (is_effectively_singular(info, tol)) return psi_expanded(info, a_k, q, tol);
  const Matrix cov = a_k * info.ldlt().solve(a_k.transpose()) + q;
  Matrix out = symmetrize(cov.ldlt().solve(Matrix::Identity(q.rows(), q.cols())));
  require_finite(out, "psi");
  return out;
}

bool psi_monotone_check(const Matrix& i1, const Matrix& i2, const Matrix& a_k, const Matrix& q) {
  if (!psd_geq(i2, i1, kOrderTol)) {
    throw OrderingError("psi_monotone_check: i1 <= i2 does not hold");
  }
  return min_eigenvalue(psi(i2, a_k, q) - psi(i1, a_k, q)) >= -kOrderTol;
}

double gamma_hat(const Matrix& a_k, const Matrix& q, const Matrix& info, double alpha) {
  if (!(alpha > 0.0)) throw ValidationError("gamma_hat: alpha must be > 0");
  const Matrix a_inv = inverse_or_pinv(a_k).inverse;
  const Matrix s = psd_sqrt(info + alpha * Matrix::Identity(info.rows(), info.cols()));
  const double g = max_eigenvalue(s * a_inv * q * a_inv.transpose() * s);
  if (!std::isfinite(g)) throw NumericError("gamma_hat is not finite");
  return std::max(g, 0.0);
}

double beta_hat(const LtvSystem& sys, long horizon, const Matrix& i_bound, double alpha) {
  if (horizon < 1) throw ValidationError("beta_hat: horizon must be >= 1");
  double gamma_max = 0.0;
  for (long k = 0; k < horizon; ++k) {
    gamma_max = std::max(gamma_max,
                         gamma_hat(transition_matrix(sys, k), sys.process_noise_cov, i_bound, alpha));
  }
  return 1.0 / (1.0 + gamma_max);
}

ITildeResult i_tilde(long k, int k_bar, double beta, const LtvSystem& sys, const Matrix& l_node) {
  if (k_bar < 1) throw ValidationError("i_tilde: k_bar must be >= 1");
  if (k < k_bar) throw ValidationError("i_tilde: k must be >= k_bar");
  ITildeResult out{l_node, false};
  Matrix p_inv = Matrix::Identity(l_node.rows(), l_node.cols());
  double weight = 1.0;
  for (int tau = 2; tau <= k_bar; ++tau) {
    auto a_inv = inverse_or_pinv(transition_matrix(sys, k - (tau - 1)));
    out.pseudo = out.pseudo || a_inv.pseudo;
    p_inv = a_inv.inverse * p_inv;
    weight *= beta;
    out.value += weight * p_inv.transpose() * l_node * p_inv;
  }
  out.value = symmetrize(out.value);
  return out;
}

bool check_bound(const Matrix& info_delayed, const Matrix& i_tilde_k) {
  if (info_delayed.rows() != i_tilde_k.rows() || info_delayed.cols() != i_tilde_k.cols()) {
    throw DimensionError("check_bound: dimension mismatch");
  }
  return info_delayed.trace() > i_tilde_k.trace();
}

ITildeKernel::ITildeKernel(const LtvSystem& sys, long n_steps, int k_bar, double beta)
    : first_(k_bar) {
  if (k_bar < 1) throw ValidationError("k_bar must be >= 1");
  const auto m = static_cast<Eigen::Index>(sys.state_dim);
  std::vector<Matrix> a_inv;
  for (long k = 0; k < n_steps; ++k) {
    auto inv = inverse_or_pinv(transition_matrix(sys, k));
    pseudo_ = pseudo_ || inv.pseudo;
    a_inv.push_back(std::move(inv.inverse));
  }
  for (long k = k_bar; k <= n_steps; ++k) {
    Matrix p_inv = Matrix::Identity(m, m);
    Matrix w = Matrix::Identity(m, m);
    double weight = 1.0;
    for (int tau = 2; tau <= k_bar; ++tau) {
      p_inv = a_inv[static_cast<std::size_t>(k - (tau - 1))] * p_inv;
      weight *= beta;
      w += weight * p_inv * p_inv.transpose();
    }
    w_.push_back(std::move(w));
  }
}

double ITildeKernel::trace(long k, const Matrix& l_node) const {
  if (k < first_ || k - first_ >= static_cast<long>(w_.size())) {
    throw ValidationError("ITildeKernel: step " + std::to_string(k) + " out of range");
  }
  // trace(P^{-T} l P^{-1}) = trace(l P^{-1} P^{-T}); both operands symmetric.
  return l_node.cwiseProduct(w_[static_cast<std::size_t>(k - first_)]).sum();
}

Matrix node_information_gain(const SensorNode& node) {
  const Matrix ht_rinv = node.r.ldlt().solve(node.h).transpose();
  return symmetrize(ht_rinv * node.h);
}

Matrix pilot_information_bound(const LtvSystem& sys, const SensorNetwork& net,
                               std::span<const int> ids, long n_steps) {
  const int m = sys.state_dim;
  Matrix l_sum = Matrix::Zero(m, m);
  for (int id : ids) l_sum += node_information_gain(net.by_id(id));
  sys.require_horizon(n_steps);

  Matrix prior = Matrix::Zero(m, m);
  Matrix best = prior;
  double best_trace = -std::numeric_limits<double>::infinity();
  const Vector zero_iv = Vector::Zero(m);
  for (long k = 0; k <= n_steps; ++k) {
    const Matrix post = prior + l_sum;
    if (post.trace() > best_trace) {
      best_trace = post.trace();
      best = post;
    }
    if (k < n_steps) {
      const auto op = TimeUpdateOperator::make(transition_matrix(sys, k), sys.process_noise_cov);
      prior = propagate_information(post, zero_iv, op, k).info;
    }
  }
  return symmetrize(best);
}

StabilityParams make_stability_params(const LtvSystem& sys, const SensorNetwork& net,
                                      long n_steps, int k_bar, double alpha,
                                      std::optional<double> beta_override) {
  StabilityParams p;
  p.k_bar = k_bar;
  p.alpha = alpha;
  const auto ids = net.ids();
  p.i_bound = pilot_information_bound(sys, net, ids, n_steps);
  p.beta_hat = beta_override ? *beta_override : beta_hat(sys, n_steps, p.i_bound, alpha);
  p.validate();
  return p;
}

}  // namespace dkfsel
