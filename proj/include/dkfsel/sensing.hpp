#pragma once

#include <filesystem>
#include <utility>
#include <vector>

#include "dkfsel/linalg.hpp"
#include "dkfsel/rng.hpp"

namespace dkfsel {

/// Lower clamp applied to sampled measurement variances so R stays invertible.
inline constexpr double kMinVariance = 1e-6;

/// Transmission delay between a filter node and the estimator, in seconds.
/// `jitter_std > 0` adds one Gaussian draw per node per run.
struct DelaySpec {
  double base = 0.0;
  double jitter_std = 0.0;
};

struct SensorNode {
  int id = 1;
  Matrix h;  ///< p x m
  Matrix r;  ///< p x p, SPD
  DelaySpec delay;

  /// Scalar summary of R used by the greedy thresholds (largest diagonal
  /// entry; equals the variance when p = 1).
  double variance() const;
  void validate(int state_dim) const;
};

struct SensorNetwork {
  std::vector<SensorNode> nodes;

  std::size_t size() const { return nodes.size(); }
  bool empty() const { return nodes.empty(); }
  /// Ids must be 1..n in order.
  void validate(int state_dim) const;
  const SensorNode& by_id(int id) const;
  std::vector<int> ids() const;
};

struct Range {
  double lo = 0.0;
  double hi = 0.0;
};

/// z = H x + v, v ~ N(0, R).
Vector measure(const SensorNode& node, const Eigen::Ref<const Vector>& x, Rng& rng);

/// Random network: H_i a random standard-basis row of R^m, R_i ~ U[variance]
/// (clamped at kMinVariance), base delay ~ U[delay], no jitter.
SensorNetwork sample_network(int n, int state_dim, Range variance, Range delay, Rng& rng);

/// Effective delay in seconds: base plus one jitter draw, clamped at 0.
double effective_delay(const SensorNode& node, Rng& rng);

/// Delay converted to filter steps, rounded to nearest with ties away from 0.
long delay_to_steps(double delay_s, double ts);

/// effective_delay followed by delay_to_steps.
long delay_steps(const SensorNode& node, double ts, Rng& rng);

/// Network file: one node per line, `id h_row_index variance delay_s
/// jitter_std`, h_row_index 1-based. Blank lines and '#' comments skipped.
SensorNetwork load_network(const std::filesystem::path& path, int state_dim);
void save_network(const SensorNetwork& net, const std::filesystem::path& path);

}  // namespace dkfsel
