#pragma once

#include "dkfsel/model.hpp"

namespace dkfsel {

struct SettlingResult {
  long index = 0;
  bool floor_applied = false;  ///< some final value was ~0, absolute band used
  bool fallback = false;       ///< never settled; index = N/2
};

/// First step after which every component stays within band * |final| of
/// its final value (mean of the last 5% of samples). When |final| is below
/// band * max|x| the absolute band band * max|x| is used instead. A
/// trajectory that only settles inside the final-value window is treated as
/// never settling and gets the N/2 fallback.
SettlingResult settling_index(const Trajectory& traj, double band);

struct MseResult {
  double normalized = 0.0;  ///< raw / count
  double raw = 0.0;         ///< 1/2 sum_k ||x_hat(k) - x(k)||^2
  long count = 0;
};

/// Squared-error metric over steps k >= from.
MseResult mse(const Trajectory& x_hat, const Trajectory& x, long from);

/// max_{k,i} |x_hat_i(k) - x_i(k)| / max_{k,i} |x_i(k)|.
double max_deviation(const Trajectory& x_hat, const Trajectory& x);

}  // namespace dkfsel
