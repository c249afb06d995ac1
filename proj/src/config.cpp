#include "dkfsel/config.hpp"

#include <algorithm>
#include <fstream>
#include <functional>
#include <sstream>

#include "dkfsel/csv.hpp"
#include "dkfsel/errors.hpp"

namespace dkfsel {

std::string to_string(Mode mode) {
  switch (mode) {
    case Mode::Greedy: return "greedy";
    case Mode::Stability: return "stability";
    case Mode::FixedSubset: return "fixed-subset";
    case Mode::All: return "all";
  }
  return "all";
}

Mode parse_mode(const std::string& text) {
  if (text == "greedy") return Mode::Greedy;
  if (text == "stability") return Mode::Stability;
  if (text == "fixed-subset") return Mode::FixedSubset;
  if (text == "all") return Mode::All;
  throw ValidationError("unknown mode '" + text + "'");
}

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(std::string s) {
  s = trim(s);
  if (!s.empty() && s.front() == '[' && s.back() == ']') s = s.substr(1, s.size() - 2);
  std::replace(s.begin(), s.end(), ',', ' ');
  std::istringstream in(s);
  std::vector<std::string> out;
  for (std::string tok; in >> tok;) out.push_back(tok);
  return out;
}

long long parse_integer(const std::string& s) {
  std::size_t pos = 0;
  const long long v = std::stoll(s, &pos);
  if (pos != s.size()) throw ValidationError("not an integer: '" + s + "'");
  return v;
}

std::vector<double> parse_doubles(const std::string& s) {
  std::vector<double> out;
  for (const auto& tok : split_list(s)) out.push_back(parse_double(tok));
  return out;
}

Range parse_range(const std::string& s) {
  const auto v = parse_doubles(s);
  if (v.size() != 2) throw ValidationError("expected two values");
  return {v[0], v[1]};
}

using Setter = std::function<void(ExperimentConfig&, const std::string&)>;

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = {
      {"state_dim", [](auto& c, auto& v) { c.state_dim = static_cast<int>(parse_integer(v)); }},
      {"q_scale", [](auto& c, auto& v) { c.q_scale = parse_double(v); }},
      {"x0", [](auto& c, auto& v) { c.x0 = parse_doubles(v); }},
      {"ts", [](auto& c, auto& v) { c.ts = parse_double(v); }},
      {"transition", [](auto& c, auto& v) { c.transition = v; }},
      {"n_sensors", [](auto& c, auto& v) { c.n_sensors = static_cast<int>(parse_integer(v)); }},
      {"variance_range", [](auto& c, auto& v) { c.variance_range = parse_range(v); }},
      {"delay_range", [](auto& c, auto& v) { c.delay_range = parse_range(v); }},
      {"jitter_std", [](auto& c, auto& v) { c.jitter_std = parse_double(v); }},
      {"network", [](auto& c, auto& v) { c.network = v; }},
      {"k_bar", [](auto& c, auto& v) { c.k_bar = static_cast<int>(parse_integer(v)); }},
      {"alpha", [](auto& c, auto& v) { c.alpha = parse_double(v); }},
      {"beta_hat_override", [](auto& c, auto& v) { c.beta_hat_override = parse_double(v); }},
      {"mode",
       [](auto& c, auto& v) {
         c.mode = parse_mode(v);
         c.mode_set = true;
       }},
      {"horizon", [](auto& c, auto& v) { c.horizon = static_cast<long>(parse_integer(v)); }},
      {"seed",
       [](auto& c, auto& v) {
         std::size_t pos = 0;
         c.seed = std::stoull(v, &pos);
         if (pos != v.size() || v.front() == '-') throw ValidationError("bad seed");
       }},
      {"runs", [](auto& c, auto& v) { c.runs = static_cast<int>(parse_integer(v)); }},
      {"out", [](auto& c, auto& v) { c.out = v; }},
      {"greedy_iterations",
       [](auto& c, auto& v) { c.greedy_iterations = static_cast<int>(parse_integer(v)); }},
      {"greedy_ensemble",
       [](auto& c, auto& v) { c.greedy_ensemble = static_cast<int>(parse_integer(v)); }},
      {"settling_band", [](auto& c, auto& v) { c.settling_band = parse_double(v); }},
      {"subset",
       [](auto& c, auto& v) {
         c.subset.clear();
         if (trim(v) == "all") return;
         for (const auto& tok : split_list(v)) c.subset.push_back(static_cast<int>(parse_integer(tok)));
       }},
  };
  return table;
}

std::string join(const std::vector<std::string>& items) {
  std::string out;
  for (const auto& s : items) out += (out.empty() ? "" : "; ") + s;
  return out;
}

}  // namespace

void ExperimentConfig::validate() const {
  std::vector<std::string> bad;
  if (state_dim < 1) bad.push_back("state_dim (must be >= 1)");
  if (!(q_scale > 0.0)) bad.push_back("q_scale (must be > 0)");
  if (static_cast<int>(x0.size()) != state_dim) bad.push_back("x0 (length must equal state_dim)");
  if (!(ts > 0.0)) bad.push_back("ts (must be > 0)");
  if (transition != "builtin" && transition.rfind("table:", 0) != 0) {
    bad.push_back("transition (builtin or table:<path>)");
  }
  if (transition == "builtin" && state_dim != 2) bad.push_back("transition (builtin needs state_dim = 2)");
  if (network.empty() && n_sensors < 1) bad.push_back("n_sensors (must be >= 1)");
  if (!(variance_range.lo >= 0.0 && variance_range.hi >= variance_range.lo)) {
    bad.push_back("variance_range (need 0 <= lo <= hi)");
  }
  if (!(delay_range.lo >= 0.0 && delay_range.hi >= delay_range.lo)) {
    bad.push_back("delay_range (need 0 <= lo <= hi)");
  }
  if (!(jitter_std >= 0.0)) bad.push_back("jitter_std (must be >= 0)");
  if (k_bar < 1) bad.push_back("k_bar (must be >= 1)");
  if (!(alpha > 0.0)) bad.push_back("alpha (must be > 0)");
  if (beta_hat_override && !(*beta_hat_override > 0.0 && *beta_hat_override <= 1.0)) {
    bad.push_back("beta_hat_override (must be in (0, 1])");
  }
  if (horizon < 2) bad.push_back("horizon (must be >= 2)");
  if ((mode == Mode::Stability || mode == Mode::All) && horizon <= k_bar) {
    bad.push_back("horizon (must exceed k_bar for stability selection)");
  }
  if (runs < 1) bad.push_back("runs (must be >= 1)");
  if (greedy_iterations < 1) bad.push_back("greedy_iterations (must be >= 1)");
  if (greedy_ensemble < 1) bad.push_back("greedy_ensemble (must be >= 1)");
  if (!(settling_band > 0.0 && settling_band < 1.0)) bad.push_back("settling_band (must be in (0, 1))");
  if (!bad.empty()) throw ValidationError("invalid config: " + join(bad));
}

ExperimentConfig parse_config(const std::string& text) {
  ExperimentConfig cfg;
  std::vector<std::string> bad;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      bad.push_back("line " + std::to_string(line_no) + " (expected key = value)");
      continue;
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    const auto it = setters().find(key);
    if (it == setters().end()) {
      bad.push_back(key + " (unknown key)");
      continue;
    }
    try {
      it->second(cfg, value);
    } catch (const std::exception& e) {
      bad.push_back(key + " (" + e.what() + ")");
    }
  }
  if (!bad.empty()) throw ValidationError("invalid config: " + join(bad));
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw IoError("cannot open config " + path.string());
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_config(ss.str());
}

LtvSystem build_system(const ExperimentConfig& cfg) {
  LtvSystem sys;
  sys.state_dim = cfg.state_dim;
  sys.process_noise_cov = cfg.q_scale * Matrix::Identity(cfg.state_dim, cfg.state_dim);
  sys.initial_state = Eigen::Map<const Vector>(cfg.x0.data(), static_cast<Eigen::Index>(cfg.x0.size()));
  sys.sample_time = cfg.ts;
  if (cfg.transition == "builtin") {
    sys.transition = BuiltinTransition{};
  } else {
    sys.transition = TableTransition{load_matrix_table(cfg.transition.substr(6))};
  }
  sys.validate();
  return sys;
}

SensorNetwork build_network(const ExperimentConfig& cfg, Rng& rng) {
  SensorNetwork net = cfg.network.empty()
                          ? sample_network(cfg.n_sensors, cfg.state_dim, cfg.variance_range,
                                           cfg.delay_range, rng)
                          : load_network(cfg.network, cfg.state_dim);
  if (cfg.jitter_std > 0.0) {
    for (auto& n : net.nodes) n.delay.jitter_std = cfg.jitter_std;
  }
  net.validate(cfg.state_dim);
  return net;
}

}  // namespace dkfsel
