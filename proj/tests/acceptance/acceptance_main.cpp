// Acceptance gate: one PASS/FAIL line per criterion, nonzero exit on any FAIL.
//
//   acceptance [--cli <path to dkfsel>] [--work <scratch dir>] [--only AC6,AC7]

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <limits>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "dkfsel/dkf.hpp"
#include "dkfsel/harness.hpp"
#include "dkfsel/stability.hpp"
#include "oracle.hpp"

using namespace dkfsel;
namespace fs = std::filesystem;

namespace {

struct Verdict {
  bool pass = false;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

LtvSystem random_ltv(std::mt19937_64& rng, long n_steps) {
  LtvSystem sys;
  sys.state_dim = 2;
  std::vector<Matrix> table;
  for (long k = 0; k < n_steps; ++k) table.push_back(oracle::random_contraction(2, rng));
  sys.transition = TableTransition{table};
  sys.process_noise_cov = oracle::random_psd(2, 2, rng, 0.05);
  sys.initial_state = oracle::random_matrix(2, 1, rng);
  sys.sample_time = 0.01;
  sys.validate();
  return sys;
}

std::vector<Matrix> transitions(const LtvSystem& sys, long n) {
  std::vector<Matrix> a;
  for (long k = 0; k < n; ++k) a.push_back(transition_matrix(sys, k));
  return a;
}

SensorNode selector(int id, int state, double r) {
  SensorNode n;
  n.id = id;
  n.h = Matrix::Zero(1, 2);
  n.h(0, state) = 1.0;
  n.r = Matrix::Constant(1, 1, r);
  return n;
}

// AC1: single-node information filter vs covariance-form KF.
Verdict ac1() {
  const auto t0 = Clock::now();
  std::mt19937_64 seeds(101);
  const long n = 200;
  double worst = 0.0;
  for (int s = 0; s < 20; ++s) {
    const LtvSystem sys = random_ltv(seeds, n);
    const Matrix h = oracle::random_matrix(1, 2, seeds);
    const Matrix r = Matrix::Constant(1, 1, std::uniform_real_distribution<double>(0.05, 0.5)(seeds));
    Rng rng(seeds());
    const Trajectory truth = simulate(sys, n, rng);
    std::normal_distribution<double> noise(0.0, std::sqrt(r(0, 0)));
    std::vector<Vector> zs;
    for (long k = 0; k <= n; ++k) zs.push_back(h * truth[k] + Vector::Constant(1, noise(rng)));

    const Matrix p0 = Matrix::Identity(2, 2);
    const Vector x0 = Vector::Zero(2);
    const auto ref = oracle::covariance_kf(transitions(sys, n), sys.process_noise_cov, h, r, zs, x0, p0);

    NodeFilterState st = NodeFilterState::from_prior(p0.inverse(), p0.inverse() * x0);
    for (long k = 0; k <= n; ++k) {
      st = node_measurement_update(st, zs[static_cast<std::size_t>(k)], h, r);
      const Vector x = *st.x_post();
      worst = std::max(worst, (x - ref.x_post[static_cast<std::size_t>(k)]).cwiseAbs().maxCoeff());
      if (k < n) st = node_time_update(st, transition_matrix(sys, k), sys.process_noise_cov, k);
    }
  }
  const double secs = seconds_since(t0);
  return {worst < 1e-8 && secs < 5.0,
          "max |x_IF - x_KF| = " + fmt("%.3e", worst) + " (< 1e-8), runtime " + fmt("%.2f", secs) +
              " s (< 5 s)"};
}

// AC2: zero-delay fusion vs centralized stacked KF.
Verdict ac2() {
  std::mt19937_64 seeds(202);
  const long n = 200;
  double worst = 0.0;
  for (int count : {2, 5, 10}) {
    for (int rep = 0; rep < 3; ++rep) {
      const LtvSystem sys = rep == 0 ? benchmark_system() : random_ltv(seeds, n);
      SensorNetwork net;
      for (int i = 1; i <= count; ++i) {
        SensorNode node;
        node.id = i;
        node.h = oracle::random_matrix(1, 2, seeds);
        node.r = Matrix::Constant(1, 1, std::uniform_real_distribution<double>(0.05, 0.5)(seeds));
        net.nodes.push_back(node);
      }
      const Matrix p0 = Matrix::Identity(2, 2);
      const Vector x0 = Vector::Zero(2);
      DkfOptions opts;
      opts.estimator_init = {p0.inverse(), p0.inverse() * x0};
      Rng rng(seeds());
      const auto ids = net.ids();
      const DkfRun run = run_dkf(sys, net, ids, n, rng, opts);

      Matrix h(count, 2);
      Matrix r = Matrix::Zero(count, count);
      for (int i = 0; i < count; ++i) {
        h.row(i) = net.nodes[static_cast<std::size_t>(i)].h;
        r(i, i) = net.nodes[static_cast<std::size_t>(i)].r(0, 0);
      }
      std::vector<Vector> zs;
      for (long k = 0; k <= n; ++k) {
        Vector z(count);
        for (int i = 0; i < count; ++i) z(i) = run.realization.z(static_cast<std::size_t>(i), k, 1)(0);
        zs.push_back(z);
      }
      const auto ref = oracle::covariance_kf(transitions(sys, n), sys.process_noise_cov, h, r, zs, x0, p0);
      for (long k = 0; k <= n; ++k) {
        worst = std::max(worst, (run.result.x_hat[k] - ref.x_post[static_cast<std::size_t>(k)])
                                    .cwiseAbs()
                                    .maxCoeff());
      }
    }
  }
  return {worst < 1e-6, "max |x_DKF - x_central| = " + fmt("%.3e", worst) + " (< 1e-6)"};
}

// Random info with 0 <= info <= bound.
Matrix below(const Matrix& bound, std::mt19937_64& rng) {
  Eigen::HouseholderQR<Matrix> qr(oracle::random_matrix(2, 2, rng));
  const Matrix v = qr.householderQ();
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const Vector d = (Vector(2) << u(rng), u(rng)).finished();
  const Matrix s = psd_sqrt(bound);
  return s * (v * d.asDiagonal() * v.transpose()) * s;
}

// AC3: psi monotonicity and the Lemma 1(2) lower bound.
Verdict ac3() {
  std::mt19937_64 rng(303);
  double worst_mono = std::numeric_limits<double>::infinity();
  for (int t = 0; t < 200; ++t) {
    const Matrix i1 = oracle::random_psd(2, 1 + t % 2, rng);
    const Matrix i2 = i1 + oracle::random_psd(2, 1 + (t / 2) % 2, rng);
    const Matrix a = oracle::random_invertible(2, rng);
    const Matrix q = oracle::random_psd(2, 2, rng, 0.05);
    worst_mono = std::min(worst_mono, oracle::min_eig(psi(i2, a, q) - psi(i1, a, q)));
  }

  const LtvSystem sys = benchmark_system();
  const long horizon = 500;
  double worst_bound = std::numeric_limits<double>::infinity();
  std::uniform_int_distribution<long> pick_k(0, horizon - 1);
  for (int t = 0; t < 100; ++t) {
    const Matrix i_bound = 20.0 * oracle::random_psd(2, 2, rng, 0.05);
    const double beta = beta_hat(sys, horizon, i_bound, kDefaultAlpha);
    const Matrix info = below(i_bound, rng);
    const long k = pick_k(rng);
    const Matrix a = transition_matrix(sys, k);
    const Matrix ainv = a.inverse();
    worst_bound = std::min(worst_bound, oracle::min_eig(psi(info, a, sys.process_noise_cov) -
                                                        beta * ainv.transpose() * info * ainv));
  }
  return {worst_mono >= -1e-9 && worst_bound >= -1e-8,
          "min eig psi(I2)-psi(I1) = " + fmt("%.3e", worst_mono) + " (>= -1e-9); min eig of Lemma 1(2) gap = " +
              fmt("%.3e", worst_bound) + " (>= -1e-8)"};
}

// AC4: per-node inverse information equals the Riccati covariance.
Verdict ac4() {
  const LtvSystem sys = benchmark_system();
  const long n = 200;
  const Matrix p0 = Matrix::Identity(2, 2);
  double worst = 0.0;
  int id = 1;
  for (int state : {0, 1}) {
    for (double r : {1e-3, 0.05, 0.5}) {
      const SensorNode node = selector(id++, state, r);
      const MatrixSeries hist = local_information_history(sys, node, n, p0.inverse());
      const auto ref = oracle::riccati_posterior(transitions(sys, n), sys.process_noise_cov, node.h,
                                                 node.r, p0, static_cast<std::size_t>(n + 1));
      for (long k = 0; k <= n; ++k) {
        worst = std::max(worst, (Matrix(hist[k]).inverse() - ref[static_cast<std::size_t>(k)])
                                    .cwiseAbs()
                                    .maxCoeff());
      }
    }
  }
  return {worst < 1e-8, "max |I_i(k|k)^-1 - Sigma_riccati(k|k)| = " + fmt("%.3e", worst) + " (< 1e-8)"};
}

// AC5: empirical error covariance against trace(I~(N)^-1).
Verdict ac5() {
  const LtvSystem sys = benchmark_system();
  const long n = 500;
  SensorNetwork net;
  net.nodes.push_back(selector(1, 0, 0.01));
  const StabilityParams params = make_stability_params(sys, net, n, kDefaultKBar);
  const Matrix l = node_information_gain(net.nodes[0]);
  const ITildeResult bound = i_tilde(n, params.k_bar, params.beta_hat, sys, l);

  Matrix cov = Matrix::Zero(2, 2);
  const int runs = 100;
  const std::vector<int> subset = {1};
  for (int r = 0; r < runs; ++r) {
    Rng rng(derive_seed(505, static_cast<std::uint64_t>(r)));
    const DkfRun run = run_dkf(sys, net, subset, n, rng);
    const Vector e = run.result.x_hat[n] - run.realization.truth[n];
    cov += e * e.transpose() / runs;
  }
  const double emp = cov.trace();
  const double limit = is_effectively_singular(bound.value)
                           ? std::numeric_limits<double>::infinity()
                           : bound.value.inverse().trace();
  return {emp <= 1.1 * limit,
          "trace(empirical cov at k=N) = " + fmt("%.4e", emp) + ", trace(I~(N)^-1) = " + fmt("%.4e", limit) +
              " (beta_hat = " + fmt("%.4e", params.beta_hat) + ", k_bar = 20, 100 runs)"};
}

struct ScenarioResults {
  bool ran = false;
  ExperimentOutcome outcome;
  double seconds = 0.0;
  std::string error;
};

ScenarioResults& scenario(const fs::path& work) {
  static ScenarioResults res;
  if (res.ran) return res;
  res.ran = true;
  ExperimentConfig cfg;  // paper scenario defaults: n=2000, N=500, seed 1
  cfg.mode = Mode::All;
  cfg.out = work / "scenario";
  const auto t0 = Clock::now();
  try {
    res.outcome = run_experiment(cfg);
  } catch (const std::exception& e) {
    res.error = e.what();
  }
  res.seconds = seconds_since(t0);
  return res;
}

// AC6: greedy sweep on the 2000-node scenario.
Verdict ac6(const fs::path& work) {
  const auto& s = scenario(work);
  if (!s.error.empty()) return {false, "scenario failed: " + s.error};
  const auto& g = *s.outcome.greedy;
  const long best = g.best();
  long first_run = -1, last_run = -1;
  for (std::size_t i = 0; i < g.reports.size(); ++i) {
    if (!g.reports[i].ran) continue;
    if (first_run < 0) first_run = static_cast<long>(i);
    last_run = static_cast<long>(i);
  }
  const bool interior = best > first_run && best < last_run;
  const std::size_t size = best >= 0 ? g.reports[static_cast<std::size_t>(best)].nodes.size() : 0;
  const bool size_ok = size >= 100 && size <= 1500;
  const bool fast = s.seconds < 600.0;
  return {best >= 0 && interior && size_ok && fast,
          "best iteration " + std::to_string(best + 1) + " of run range [" + std::to_string(first_run + 1) +
              ", " + std::to_string(last_run + 1) + "] (interior: " + (interior ? "yes" : "no") +
              "), best subset " + std::to_string(size) + " nodes (need [100, 1500]), mse " +
              fmt("%.4f", best >= 0 ? g.reports[static_cast<std::size_t>(best)].mse : NAN) + ", scenario runtime " +
              fmt("%.1f", s.seconds) + " s"};
}

// AC7: stability selection against the greedy best on the same realization.
Verdict ac7(const fs::path& work) {
  const auto& s = scenario(work);
  if (!s.error.empty()) return {false, "scenario failed: " + s.error};
  const auto& o = s.outcome;
  const auto& st = *o.stability_report;
  const auto& gb = *o.greedy_best;
  const bool nonempty = !st.nodes.empty();
  const bool smaller = st.nodes.size() < gb.nodes.size();
  const bool close = st.ran && gb.ran && st.mse <= 3.0 * gb.mse;
  return {nonempty && smaller && close,
          "stability " + std::to_string(st.nodes.size()) + " nodes (mse " + fmt("%.4f", st.mse) +
              ") vs greedy best " + std::to_string(gb.nodes.size()) + " nodes (mse " + fmt("%.4f", gb.mse) +
              "); need non-empty, strictly smaller, mse <= 3x; beta_hat " + fmt("%.3e", o.params.beta_hat)};
}

// AC8: stochastic-delay Monte Carlo.
Verdict ac8(const fs::path& work) {
  const auto& s = scenario(work);
  if (!s.error.empty()) return {false, "scenario failed: " + s.error};
  ExperimentConfig cfg;
  cfg.mode = Mode::Stability;
  cfg.jitter_std = 2.0 * cfg.ts;
  cfg.out = work / "montecarlo";
  const MonteCarloSummary mc = monte_carlo(cfg, 25);
  const auto summary = read_csv(cfg.out / "montecarlo_summary.csv");
  std::set<std::string> stats;
  for (const auto& row : summary.rows) {
    for (const char* col : {"mean", "variance"}) {
      const double v = parse_double(row[summary.column(col)]);
      if (std::isfinite(v)) stats.insert(row[0] + "/" + col);
    }
  }
  const bool six = stats.size() == 6 && stats.count("mse/mean") && stats.count("md/variance") &&
                   stats.count("n_selected/variance");
  const double greedy_size = static_cast<double>(s.outcome.greedy_best->nodes.size());
  const double ref = s.outcome.stability_report->mse;
  const bool count_ok = mc.n_selected.mean < greedy_size;
  const bool mse_ok = std::isfinite(mc.mse.mean) && mc.mse.mean >= 0.25 * ref && mc.mse.mean <= 4.0 * ref;
  return {count_ok && mse_ok && six && mc.failed == 0,
          "node count mean " + fmt("%.1f", mc.n_selected.mean) + " (var " + fmt("%.1f", mc.n_selected.variance) +
              ") vs greedy best " + fmt("%.0f", greedy_size) + "; mse mean " + fmt("%.4f", mc.mse.mean) +
              " vs constant-delay " + fmt("%.4f", ref) + " (band [0.25x, 4x]); md mean " + fmt("%.4f", mc.md.mean) +
              "; summary stats present " + std::to_string(stats.size()) + "/6; failed runs " +
              std::to_string(mc.failed)};
}

StructuralMatrix pattern2(bool a, bool b, bool c, bool d) {
  StructuralMatrix s(2, 2);
  s.set(0, 0, a);
  s.set(0, 1, b);
  s.set(1, 0, c);
  s.set(1, 1, d);
  return s;
}

// AC9: structural observability.
Verdict ac9() {
  const StructuralMatrix a_bench = structure_over_horizon(benchmark_system(), 500);
  bool bench_ok = true;
  for (int state : {0, 1}) {
    StructuralMatrix h(1, 2);
    h.set(0, state);
    const auto cert = is_structurally_observable(a_bench, std::span(&h, 1));
    bench_ok = bench_ok && cert.observable && cert.matching_size == 2 && !cert.describe().empty();
  }

  StructuralMatrix h1(1, 2);
  h1.set(0, 0);
  const auto counter = is_structurally_observable(pattern2(true, false, false, true), std::span(&h1, 1));
  const bool counter_ok = !counter.observable && counter.unreachable_states == std::vector<int>{2};

  Rng rng(909);
  std::bernoulli_distribution star(0.45);
  int verdicts = 0, worst = 100;
  for (int t = 0; t < 400 && verdicts < 60; ++t) {
    const int m = 1 + t % 4;
    StructuralMatrix a(m, m), h(1, m);
    for (int i = 0; i < m; ++i) {
      for (int j = 0; j < m; ++j) a.set(i, j, star(rng));
      h.set(0, i, star(rng));
    }
    if (!is_structurally_observable(a, std::span(&h, 1)).observable) continue;
    ++verdicts;
    int passed = 0;
    for (int r = 0; r < 100; ++r) {
      passed += is_rank_observable(random_realization(a, rng), random_realization(h, rng)) ? 1 : 0;
    }
    worst = std::min(worst, passed);
  }
  return {bench_ok && counter_ok && verdicts > 0 && worst >= 99,
          std::string("benchmark pattern observable: ") + (bench_ok ? "yes" : "no") +
              "; decoupled counterexample: " + counter.describe() + "; generic cross-check over " +
              std::to_string(verdicts) + " observable patterns, worst " + std::to_string(worst) + "/100"};
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

// AC10: CLI determinism, each subcommand twice.
Verdict ac10(const fs::path& work, const std::string& cli) {
  if (cli.empty()) return {false, "no --cli binary given"};
  const fs::path dir = work / "determinism";
  fs::remove_all(dir);
  fs::create_directories(dir);
  const fs::path cfg = dir / "small.cfg";
  {
    std::ofstream f(cfg);
    f << "n_sensors = 200\nhorizon = 200\ngreedy_iterations = 20\njitter_std = 0.02\nruns = 3\n";
  }
  const std::vector<std::string> commands = {"simulate", "select-greedy", "select-stability",
                                             "montecarlo", "observability-check"};
  int compared = 0;
  std::string mismatch;
  for (const auto& cmd : commands) {
    for (const char* pass : {"a", "b"}) {
      const fs::path out = dir / (cmd + "_" + pass);
      const std::string line = "\"" + cli + "\" " + cmd + " --config \"" + cfg.string() + "\" --seed 7 --out \"" +
                               out.string() + "\" > /dev/null 2>&1";
      const int rc = std::system(line.c_str());
      if (rc != 0) return {false, cmd + " exited with status " + std::to_string(rc)};
    }
    const fs::path a = dir / (cmd + "_a");
    for (const auto& entry : fs::recursive_directory_iterator(a)) {
      if (entry.path().extension() != ".csv") continue;
      const fs::path rel = fs::relative(entry.path(), a);
      ++compared;
      if (slurp(entry.path()) != slurp(dir / (cmd + "_b") / rel)) mismatch += " " + cmd + "/" + rel.string();
    }
  }
  return {compared > 0 && mismatch.empty(),
          std::to_string(compared) + " CSV files compared across 5 subcommands" +
              (mismatch.empty() ? ", all byte-identical" : "; differing:" + mismatch)};
}

}  // namespace

int main(int argc, char** argv) {
  std::string cli;
  fs::path work = fs::temp_directory_path() / "dkfsel_acceptance";
  std::set<std::string> only;
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    if (arg == "--cli" && i + 1 < argc) cli = argv[++i];
    else if (arg == "--work" && i + 1 < argc) work = argv[++i];
    else if (arg == "--only" && i + 1 < argc) {
      std::stringstream ss(argv[++i]);
      for (std::string id; std::getline(ss, id, ',');) only.insert(id);
    } else {
      std::cerr << "usage: acceptance [--cli <dkfsel>] [--work <dir>] [--only AC1,AC2]\n";
      return 2;
    }
  }
  fs::create_directories(work);

  const std::vector<std::pair<std::string, std::function<Verdict()>>> criteria = {
      {"AC1", ac1},
      {"AC2", ac2},
      {"AC3", ac3},
      {"AC4", ac4},
      {"AC5", ac5},
      {"AC6", [&] { return ac6(work); }},
      {"AC7", [&] { return ac7(work); }},
      {"AC8", [&] { return ac8(work); }},
      {"AC9", ac9},
      {"AC10", [&] { return ac10(work, cli); }},
  };

  int failures = 0;
  for (const auto& [id, check] : criteria) {
    if (!only.empty() && !only.count(id)) continue;
    Verdict v;
    try {
      v = check();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    std::replace(v.detail.begin(), v.detail.end(), '\n', ' ');
    failures += v.pass ? 0 : 1;
    std::cout << (v.pass ? "[PASS] " : "[FAIL] ") << id << ": " << v.detail << std::endl;
  }
  std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " criteria failed")
            << std::endl;
  return failures == 0 ? 0 : 1;
}
