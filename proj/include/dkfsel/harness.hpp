#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "dkfsel/config.hpp"
#include "dkfsel/csv.hpp"
#include "dkfsel/observability.hpp"
#include "dkfsel/selection.hpp"

namespace dkfsel {

struct ExperimentOutcome {
  SensorNetwork network;
  Realization realization;  ///< the realization every subset is scored on
  StabilityParams params;
  std::optional<GreedyResult> greedy;
  std::optional<SelectionReport> greedy_best;
  std::optional<StabilitySelection> stability;
  std::optional<SelectionReport> stability_report;
  std::optional<SelectionReport> fixed_report;
  /// Stability report if run, else greedy best, else the fixed subset.
  SelectionReport primary;
  std::vector<std::string> warnings;
};

/// Runs the configured pipeline on one seed. The network is drawn from
/// derive_seed(seed, 0) and the realizations from derive_seed(seed, 1).
/// When `write_outputs` is set, CSVs are written to cfg.out.
ExperimentOutcome run_experiment(const ExperimentConfig& cfg, bool write_outputs = true);

struct RunStat {
  double mean = 0.0;
  double variance = 0.0;  ///< unbiased; 0 for a single run
};

RunStat mean_variance(const std::vector<double>& values);

struct MonteCarloRun {
  int run = 0;
  std::uint64_t seed = 0;
  bool ok = false;
  std::string status;  ///< "ok", or the reason the run failed
  long n_selected = 0;
  double mse = 0.0;
  double md = 0.0;
};

struct MonteCarloSummary {
  std::vector<MonteCarloRun> runs;
  RunStat mse;
  RunStat md;
  RunStat n_selected;
  int failed = 0;  ///< statistics cover the successful runs only
};

/// Repeats run_experiment with seed_run = derive_seed(cfg.seed, run). Per-run
/// outputs go to cfg.out/run_NNN; the summary to cfg.out.
MonteCarloSummary monte_carlo(const ExperimentConfig& cfg, int runs, bool write_outputs = true);

/// Structural observability of the configured plant and network over the
/// horizon; writes observability.csv when `write_outputs` is set.
ObservabilityCertificate observability_check(const ExperimentConfig& cfg,
                                             bool write_outputs = true);

CsvTable greedy_table(const GreedyResult& result);
CsvTable stability_table(const StabilitySelection& selection);
CsvTable trace_table(const Trajectory& truth, const DkfResult& run);
CsvTable monte_carlo_runs_table(const MonteCarloSummary& summary);
CsvTable monte_carlo_summary_table(const MonteCarloSummary& summary);

}  // namespace dkfsel
