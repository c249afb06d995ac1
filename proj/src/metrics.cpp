#include "dkfsel/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "dkfsel/errors.hpp"

namespace dkfsel {

SettlingResult settling_index(const Trajectory& traj, double band) {
  const long n = traj.size();
  if (n == 0) throw ValidationError("settling_index: empty trajectory");
  if (!(band > 0.0 && band < 1.0)) throw ValidationError("settling_index: band must be in (0, 1)");

  const long tail = std::max<long>(1, static_cast<long>(std::ceil(0.05 * static_cast<double>(n))));
  const Vector final_value = traj.states.rightCols(tail).rowwise().mean();
  const double scale = traj.states.cwiseAbs().maxCoeff();

  SettlingResult out;
  Vector tol(final_value.size());
  for (Eigen::Index c = 0; c < tol.size(); ++c) {
    if (std::abs(final_value(c)) >= band * scale) {
      tol(c) = band * std::abs(final_value(c));
    } else {
      tol(c) = band * scale;
      out.floor_applied = true;
    }
  }

  long last_violation = -1;
  for (long k = n - 1; k >= 0; --k) {
    if (((traj[k] - final_value).cwiseAbs() - tol).maxCoeff() > 0.0) {
      last_violation = k;
      break;
    }
  }
  out.index = last_violation + 1;
  if (n > 1 && out.index >= n - tail) {
    out.index = (n - 1) / 2;
    out.fallback = true;
  }
  return out;
}

MseResult mse(const Trajectory& x_hat, const Trajectory& x, long from) {
  if (x_hat.size() != x.size() || x_hat.dim() != x.dim()) {
    throw DimensionError("mse: trajectories differ in shape");
  }
  if (from < 0 || from >= x.size()) throw ValidationError("mse: start index out of range");
  MseResult out;
  out.count = x.size() - from;
  out.raw = 0.5 * (x_hat.states.rightCols(out.count) - x.states.rightCols(out.count)).squaredNorm();
  out.normalized = out.raw / static_cast<double>(out.count);
  return out;
}

double max_deviation(const Trajectory& x_hat, const Trajectory& x) {
  if (x_hat.size() != x.size() || x_hat.dim() != x.dim()) {
    throw DimensionError("max_deviation: trajectories differ in shape");
  }
  const double denom = x.states.cwiseAbs().maxCoeff();
  if (!(denom > 0.0)) throw UndefinedMetricError("max_deviation: true trajectory is all zero");
  return (x_hat.states - x.states).cwiseAbs().maxCoeff() / denom;
}

}  // namespace dkfsel
