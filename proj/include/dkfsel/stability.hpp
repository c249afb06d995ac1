#pragma once

#include <optional>
#include <span>
#include <vector>

#include "dkfsel/linalg.hpp"
#include "dkfsel/model.hpp"
#include "dkfsel/sensing.hpp"

namespace dkfsel {

inline constexpr int kDefaultKBar = 20;
inline constexpr double kDefaultAlpha = 1e-6;

struct StabilityParams {
  int k_bar = kDefaultKBar;
  double alpha = kDefaultAlpha;
  double beta_hat = 1.0;
  Matrix i_bound;  ///< uniform bound on the fused information matrix

  void validate() const;
};

/// One-step information time update psi_k(I).
///
/// Invertible I uses the closed form (A I^{-1} A^T + Q)^{-1}. Singular I uses
/// the expanded form
///   A^{-T} I A^{-1} - A^{-T} I (I + A^T Q^{-1} A)^{-1} I A^{-1},
/// valid for any PSD I. Both are algebraically independent of the gain-form
/// recursion in `propagate_information`.
Matrix psi(const Matrix& info, const Matrix& a_k, const Matrix& q,
           double tol = kDefaultSingularTol);

/// The expanded (singular-safe) form of psi, exposed for cross-checks.
Matrix psi_expanded(const Matrix& info, const Matrix& a_k, const Matrix& q,
                    double tol = kDefaultSingularTol);

/// True iff psi(i2) - psi(i1) has min eigenvalue >= -1e-9. Throws
/// OrderingError unless i1 <= i2 (same tolerance).
bool psi_monotone_check(const Matrix& i1, const Matrix& i2, const Matrix& a_k, const Matrix& q);

/// Smallest gamma with A^{-1} Q A^{-T} <= gamma (info + alpha I)^{-1}:
/// lambda_max(S A^{-1} Q A^{-T} S), S = (info + alpha I)^{1/2}.
double gamma_hat(const Matrix& a_k, const Matrix& q, const Matrix& info, double alpha);

/// min over k in [0, horizon) of 1 / (1 + gamma_hat(A(k), Q, i_bound, alpha)).
double beta_hat(const LtvSystem& sys, long horizon, const Matrix& i_bound, double alpha);

struct ITildeResult {
  Matrix value;
  bool pseudo = false;  ///< some A(k - j) needed a pseudo-inverse
};

/// Lower bound on a node's information matrix at step k:
///   sum_{tau=1}^{k_bar} beta^{tau-1} P_tau^{-T} l P_tau^{-1},
///   P_1 = I, P_{tau+1} = P_tau A(k - tau).
/// Requires k >= k_bar.
ITildeResult i_tilde(long k, int k_bar, double beta, const LtvSystem& sys, const Matrix& l_node);

/// trace(info_delayed) > trace(i_tilde_k).
bool check_bound(const Matrix& info_delayed, const Matrix& i_tilde_k);

/// Precomputes W(k) = sum_tau beta^{tau-1} P_tau^{-1} P_tau^{-T} for
/// k = k_bar..n_steps so that trace(i_tilde(k, l)) = trace(l W(k)) costs
/// O(m^2) per node instead of O(k_bar m^3).
class ITildeKernel {
 public:
  ITildeKernel(const LtvSystem& sys, long n_steps, int k_bar, double beta);

  double trace(long k, const Matrix& l_node) const;
  bool pseudo() const { return pseudo_; }

 private:
  long first_ = 0;
  std::vector<Matrix> w_;
  bool pseudo_ = false;
};

/// Information bound from a delay-free pilot of the fused estimator over
/// `ids`: I(k|k) = psi(I(k-1|k-1)) + sum_j l_j from I(0|-1) = 0; returns the
/// largest-trace I(k|k) seen on 0..n_steps, symmetrized.
Matrix pilot_information_bound(const LtvSystem& sys, const SensorNetwork& net,
                               std::span<const int> ids, long n_steps);

/// k_bar/alpha as given; i_bound from the pilot over the whole network;
/// beta_hat from i_bound unless overridden.
StabilityParams make_stability_params(const LtvSystem& sys, const SensorNetwork& net,
                                      long n_steps, int k_bar = kDefaultKBar,
                                      double alpha = kDefaultAlpha,
                                      std::optional<double> beta_override = std::nullopt);

/// H^T R^{-1} H.
Matrix node_information_gain(const SensorNode& node);

}  // namespace dkfsel
