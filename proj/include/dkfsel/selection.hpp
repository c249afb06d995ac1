#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dkfsel/dkf.hpp"
#include "dkfsel/metrics.hpp"
#include "dkfsel/stability.hpp"

namespace dkfsel {

struct SelectionReport {
  std::vector<int> nodes;
  double mse = 0.0;      ///< normalized, from the settling index
  double mse_raw = 0.0;  ///< un-normalized 1/2 sum of squared errors
  double md = 0.0;
  long iteration = 0;    ///< 1-based; 0 for non-greedy reports
  double r0 = 0.0;
  double tau0 = 0.0;
  bool ran = true;       ///< false: empty subset, metrics are NaN
};

struct GreedyOptions {
  int iterations = 100;
  std::optional<double> r_max;    ///< default: largest node variance
  std::optional<double> tau_max;  ///< default: largest realized delay [s]
  double settling_band = 0.01;
  int ensemble = 1;               ///< realizations averaged per iteration
};

struct GreedyResult {
  std::vector<SelectionReport> reports;  ///< one per iteration
  std::vector<Realization> realizations; ///< the shared draws (first is canonical)
  long settle_index = 0;
  bool settle_fallback = false;

  /// Index into `reports` of the smallest finite MSE (earliest on ties), or -1.
  long best() const;
};

/// Threshold subset of one greedy iteration: all nodes with
/// variance <= r0 and delay <= tau0.
std::vector<int> threshold_subset(const SensorNetwork& net, std::span<const double> delay_s,
                                  double r0, double tau0);

/// Algorithm 1. Realizations are drawn from `rng` once and shared by every
/// iteration. Ensemble members share the first member's delay draw.
GreedyResult greedy_select(const LtvSystem& sys, const SensorNetwork& net,
                           const GreedyOptions& opts, long n_steps, Rng& rng);

/// Algorithm 1 against caller-supplied realizations.
GreedyResult greedy_select_on(const LtvSystem& sys, const SensorNetwork& net,
                              const GreedyOptions& opts, std::vector<Realization> realizations);

/// Evaluates one subset on one realization (zero-initialized DKF).
SelectionReport evaluate_subset(const LtvSystem& sys, const SensorNetwork& net,
                                const Realization& real, std::span<const int> subset,
                                double settling_band = 0.01);

struct StabilityNodeRow {
  int node_id = 0;
  bool selected = false;
  long ct_exp = 0;
  long ct_act = 0;
  double delay_s = 0.0;
  long delay_steps = 0;
  double variance = 0.0;
};

struct StabilitySelection {
  std::vector<int> nodes;
  std::vector<StabilityNodeRow> rows;  ///< one per network node, id order
  std::string warning;                 ///< non-empty when nothing was applicable
  bool pseudo = false;                 ///< I~ needed a pseudo-inverse somewhere
};

/// Algorithm 2 with explicit per-node delays (seconds). A node is selected iff
/// it has at least one applicable step and trace(I_i(k - d_i | k - d_i)) >
/// trace(I~(k)) at every applicable step.
StabilitySelection stability_select(const LtvSystem& sys, const SensorNetwork& net,
                                    const StabilityParams& params, long n_steps,
                                    std::span<const double> delay_s);

/// Algorithm 2 using each node's base delay.
StabilitySelection stability_select(const LtvSystem& sys, const SensorNetwork& net,
                                    const StabilityParams& params, long n_steps);

}  // namespace dkfsel
