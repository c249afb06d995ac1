#pragma once

#include <cstddef>
#include <filesystem>
#include <functional>
#include <variant>
#include <vector>

#include "dkfsel/linalg.hpp"
#include "dkfsel/rng.hpp"

namespace dkfsel {

/// The two-state benchmark family: a11 = 0.5, a12 = a21 = 0.25 and
/// a22 = 2^{-t_k} with t_k = min(k * Ts, t_max).
struct BuiltinTransition {
  double t_max = 2.0;
};

/// Explicit per-step matrices, A(k) = matrices[k].
struct TableTransition {
  std::vector<Matrix> matrices;
};

using TransitionRule = std::variant<BuiltinTransition, TableTransition>;

/// Stochastic discrete-time LTV plant x(k+1) = A(k) x(k) + w(k), w ~ N(0, Q).
struct LtvSystem {
  int state_dim = 2;
  TransitionRule transition = BuiltinTransition{};
  Matrix process_noise_cov;
  Vector initial_state;
  double sample_time = 0.01;

  /// Throws ValidationError when an invariant does not hold.
  void validate() const;

  /// Throws HorizonError if a table-driven transition has fewer than n_steps
  /// matrices.
  void require_horizon(long n_steps) const;
};

/// The benchmark plant: builtin family, Q = q_scale * I2, x0 = [1, 1].
LtvSystem benchmark_system(double q_scale = 0.1, double sample_time = 0.01);

/// A(k). Throws HorizonError when a table does not cover k.
Matrix transition_matrix(const LtvSystem& sys, long k);

/// States x(0..N) stored column-wise (m x (N+1)).
struct Trajectory {
  Matrix states;

  long size() const { return states.cols(); }
  int dim() const { return static_cast<int>(states.rows()); }
  auto operator[](long k) const { return states.col(k); }
  auto operator[](long k) { return states.col(k); }
};

/// Draws one process-noise sample per call; the factor of Q is computed once.
class GaussianSampler {
 public:
  explicit GaussianSampler(const Matrix& covariance);
  Vector operator()(Rng& rng) const;
  const Matrix& factor() const { return factor_; }

 private:
  Matrix factor_;
};

/// Process-noise source used by `simulate`. Replaceable in tests to stub
/// w(k) (e.g. w = 0).
using NoiseSource = std::function<Vector(long step, Rng& rng)>;

Trajectory simulate(const LtvSystem& sys, long n_steps, Rng& rng);
Trajectory simulate(const LtvSystem& sys, long n_steps, Rng& rng,
                    const NoiseSource& noise);

/// Matrix-table file: one row-major matrix per whitespace-separated block,
/// blocks separated by blank lines.
std::vector<Matrix> load_matrix_table(const std::filesystem::path& path);
std::vector<Matrix> parse_matrix_table(const std::string& text);

}  // namespace dkfsel
