#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "dkfsel/model.hpp"
#include "dkfsel/rng.hpp"
#include "dkfsel/sensing.hpp"
#include "dkfsel/stability.hpp"

namespace dkfsel {

enum class Mode { Greedy, Stability, FixedSubset, All };

std::string to_string(Mode mode);
Mode parse_mode(const std::string& text);

struct ExperimentConfig {
  // system
  int state_dim = 2;
  double q_scale = 0.1;
  std::vector<double> x0 = {1.0, 1.0};
  double ts = 0.01;
  std::string transition = "builtin";  ///< "builtin" or "table:<path>"

  // network
  int n_sensors = 2000;
  Range variance_range{0.0, 0.5};
  Range delay_range{0.0, 2.0};
  double jitter_std = 0.0;
  std::filesystem::path network;  ///< optional network file; overrides sampling

  // stability
  int k_bar = kDefaultKBar;
  double alpha = kDefaultAlpha;
  std::optional<double> beta_hat_override;

  // run
  Mode mode = Mode::All;
  bool mode_set = false;  ///< mode was given explicitly
  long horizon = 500;
  std::uint64_t seed = 1;
  int runs = 1;
  std::filesystem::path out = "out";
  int greedy_iterations = 100;
  int greedy_ensemble = 1;
  double settling_band = 0.01;
  std::vector<int> subset;  ///< fixed-subset mode; empty means all nodes

  /// Throws ValidationError listing every offending key.
  void validate() const;
};

/// `key = value` lines; '#' starts a comment. Lists are whitespace or comma
/// separated and may be wrapped in brackets. Unknown keys and malformed values
/// are collected and reported together.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::filesystem::path& path);

/// The plant described by the config (builtin family or matrix table).
LtvSystem build_system(const ExperimentConfig& cfg);

/// The network file if one is configured, otherwise a random network drawn
/// from `rng`. `jitter_std` is applied to every node.
SensorNetwork build_network(const ExperimentConfig& cfg, Rng& rng);

}  // namespace dkfsel
