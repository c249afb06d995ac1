#include "dkfsel/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <future>
#include <thread>

#include "dkfsel/errors.hpp"

namespace dkfsel {

namespace fs = std::filesystem;

namespace {

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create directory " + dir.string() + ": " + ec.message());
}

SelectionReport not_run(std::vector<int> nodes = {}) {
  SelectionReport r;
  r.nodes = std::move(nodes);
  r.ran = false;
  r.mse = r.mse_raw = r.md = std::nan("");
  return r;
}

DkfResult run_subset(const LtvSystem& sys, const SensorNetwork& net, const Realization& real,
                     const std::vector<int>& subset) {
  const NodeBank bank(sys, net, real, subset, NodeFilterState::zero(sys.state_dim));
  return run_dkf_on(sys, real, bank, subset);
}

void add_report_row(CsvTable& t, const std::string& name, const SelectionReport& r) {
  t.add_row({name, format_int(static_cast<long long>(r.nodes.size())), format_double(r.mse),
             format_double(r.mse_raw), format_double(r.md), r.ran ? "1" : "0"});
}

}  // namespace

CsvTable greedy_table(const GreedyResult& result) {
  CsvTable t{{"iteration", "r0", "tau0", "n_selected", "mse", "md", "mse_raw"}, {}};
  for (const auto& r : result.reports) {
    t.add_row({format_int(r.iteration), format_double(r.r0), format_double(r.tau0),
               format_int(static_cast<long long>(r.nodes.size())), format_double(r.mse),
               format_double(r.md), format_double(r.mse_raw)});
  }
  return t;
}

CsvTable stability_table(const StabilitySelection& selection) {
  CsvTable t{{"node_id", "selected", "ct_exp", "ct_act", "delay_s", "variance"}, {}};
  for (const auto& r : selection.rows) {
    t.add_row({format_int(r.node_id), r.selected ? "1" : "0", format_int(r.ct_exp),
               format_int(r.ct_act), format_double(r.delay_s), format_double(r.variance)});
  }
  return t;
}

CsvTable trace_table(const Trajectory& truth, const DkfResult& run) {
  CsvTable t;
  t.header.push_back("k");
  const int m = static_cast<int>(truth.dim());
  for (int i = 1; i <= m; ++i) t.header.push_back("x_true_" + std::to_string(i));
  for (int i = 1; i <= m; ++i) t.header.push_back("x_hat_" + std::to_string(i));
  t.header.push_back("trace_info");
  for (long k = 0; k < truth.size(); ++k) {
    std::vector<std::string> row{format_int(k)};
    for (int i = 0; i < m; ++i) row.push_back(format_double(truth[k](i)));
    for (int i = 0; i < m; ++i) row.push_back(format_double(run.x_hat[k](i)));
    row.push_back(format_double(run.fused[static_cast<std::size_t>(k)].info.trace()));
    t.add_row(std::move(row));
  }
  return t;
}

ExperimentOutcome run_experiment(const ExperimentConfig& cfg, bool write_outputs) {
  cfg.validate();
  const LtvSystem sys = build_system(cfg);
  sys.require_horizon(cfg.horizon);

  ExperimentOutcome out;
  Rng net_rng(derive_seed(cfg.seed, 0));
  Rng real_rng(derive_seed(cfg.seed, 1));
  out.network = build_network(cfg, net_rng);
  const SensorNetwork& net = out.network;

  const bool do_greedy = cfg.mode == Mode::Greedy || cfg.mode == Mode::All;
  const bool do_stability = cfg.mode == Mode::Stability || cfg.mode == Mode::All;
  const bool do_fixed = cfg.mode == Mode::FixedSubset || cfg.mode == Mode::All;

  if (do_greedy) {
    GreedyOptions g;
    g.iterations = cfg.greedy_iterations;
    g.ensemble = cfg.greedy_ensemble;
    g.settling_band = cfg.settling_band;
    out.greedy = greedy_select(sys, net, g, cfg.horizon, real_rng);
    out.realization = out.greedy->realizations.front();
    out.greedy->realizations.clear();
    out.greedy->realizations.shrink_to_fit();
    const long best = out.greedy->best();
    if (best >= 0) {
      // The best iteration is rescored on the canonical realization alone.
      const auto& rep = out.greedy->reports[static_cast<std::size_t>(best)];
      out.greedy_best = evaluate_subset(sys, net, out.realization, rep.nodes, cfg.settling_band);
      out.greedy_best->iteration = rep.iteration;
      out.greedy_best->r0 = rep.r0;
      out.greedy_best->tau0 = rep.tau0;
    } else {
      out.greedy_best = not_run();
      out.warnings.push_back("greedy: no iteration selected any node");
    }
  } else {
    out.realization = draw_realization(sys, net, cfg.horizon, real_rng);
  }

  if (do_stability) {
    out.params = make_stability_params(sys, net, cfg.horizon, cfg.k_bar, cfg.alpha,
                                       cfg.beta_hat_override);
    out.stability =
        stability_select(sys, net, out.params, cfg.horizon, out.realization.delay_s);
    if (!out.stability->warning.empty()) out.warnings.push_back(out.stability->warning);
    if (out.stability->nodes.empty()) {
      out.stability_report = not_run();
      out.warnings.push_back("stability: no node passed the bound test");
    } else {
      out.stability_report = evaluate_subset(sys, net, out.realization, out.stability->nodes,
                                             cfg.settling_band);
    }
  }

  if (do_fixed) {
    const std::vector<int> subset = cfg.subset.empty() ? net.ids() : cfg.subset;
    validate_subset(net, subset);
    out.fixed_report = evaluate_subset(sys, net, out.realization, subset, cfg.settling_band);
  }

  out.primary = out.stability_report ? *out.stability_report
                : out.greedy_best    ? *out.greedy_best
                                     : *out.fixed_report;

  if (write_outputs) {
    ensure_dir(cfg.out);
    save_network(net, cfg.out / "network.txt");
    if (out.greedy) write_csv(greedy_table(*out.greedy), cfg.out / "greedy.csv");
    if (out.stability) {
      write_csv(stability_table(*out.stability), cfg.out / "stability.csv");
      CsvTable p{{"k_bar", "alpha", "beta_hat", "i_bound_trace"}, {}};
      p.add_row({format_int(out.params.k_bar), format_double(out.params.alpha),
                 format_double(out.params.beta_hat), format_double(out.params.i_bound.trace())});
      write_csv(p, cfg.out / "stability_params.csv");
    }
    CsvTable report{{"selection", "n_selected", "mse", "mse_raw", "md", "ran"}, {}};
    if (out.greedy_best) add_report_row(report, "greedy_best", *out.greedy_best);
    if (out.stability_report) add_report_row(report, "stability", *out.stability_report);
    if (out.fixed_report) add_report_row(report, "fixed_subset", *out.fixed_report);
    write_csv(report, cfg.out / "report.csv");
    if (out.primary.ran) {
      const DkfResult run = run_subset(sys, net, out.realization, out.primary.nodes);
      write_csv(trace_table(out.realization.truth, run), cfg.out / "trace.csv");
    }
  }
  return out;
}

RunStat mean_variance(const std::vector<double>& values) {
  RunStat s;
  if (values.empty()) {
    s.mean = s.variance = std::nan("");
    return s;
  }
  double sum = 0.0;
  for (double v : values) sum += v;
  s.mean = sum / static_cast<double>(values.size());
  if (values.size() > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - s.mean) * (v - s.mean);
    s.variance = ss / static_cast<double>(values.size() - 1);
  }
  return s;
}

MonteCarloSummary monte_carlo(const ExperimentConfig& cfg, int runs, bool write_outputs) {
  if (runs < 1) throw ValidationError("monte_carlo: runs must be >= 1");
  cfg.validate();

  auto one = [&](int r) {
    MonteCarloRun rec;
    rec.run = r;
    rec.seed = derive_seed(cfg.seed, static_cast<std::uint64_t>(r));
    ExperimentConfig c = cfg;
    c.seed = rec.seed;
    char name[32];
    std::snprintf(name, sizeof name, "run_%03d", r);
    c.out = cfg.out / name;
    try {
      const ExperimentOutcome o = run_experiment(c, write_outputs);
      rec.n_selected = static_cast<long>(o.primary.nodes.size());
      rec.mse = o.primary.mse;
      rec.md = o.primary.md;
      rec.ok = o.primary.ran;
      rec.status = rec.ok ? "ok" : "empty selection";
    } catch (const std::exception& e) {
      rec.ok = false;
      rec.status = e.what();
      rec.mse = rec.md = std::nan("");
    }
    return rec;
  };

  MonteCarloSummary s;
  s.runs.resize(static_cast<std::size_t>(runs));
  const int workers = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  for (int base = 0; base < runs; base += workers) {
    std::vector<std::future<MonteCarloRun>> batch;
    for (int r = base; r < std::min(runs, base + workers); ++r) {
      batch.push_back(std::async(std::launch::async, one, r));
    }
    for (auto& f : batch) {
      MonteCarloRun rec = f.get();
      s.runs[static_cast<std::size_t>(rec.run)] = std::move(rec);
    }
  }

  std::vector<double> mse, md, count;
  for (const auto& r : s.runs) {
    if (!r.ok) {
      ++s.failed;
      continue;
    }
    mse.push_back(r.mse);
    md.push_back(r.md);
    count.push_back(static_cast<double>(r.n_selected));
  }
  s.mse = mean_variance(mse);
  s.md = mean_variance(md);
  s.n_selected = mean_variance(count);

  if (write_outputs) {
    ensure_dir(cfg.out);
    write_csv(monte_carlo_runs_table(s), cfg.out / "montecarlo_runs.csv");
    write_csv(monte_carlo_summary_table(s), cfg.out / "montecarlo_summary.csv");
  }
  return s;
}

CsvTable monte_carlo_runs_table(const MonteCarloSummary& summary) {
  CsvTable t{{"run", "seed", "status", "n_selected", "mse", "md"}, {}};
  for (const auto& r : summary.runs) {
    t.add_row({format_int(r.run), std::to_string(r.seed), r.status, format_int(r.n_selected),
               format_double(r.mse), format_double(r.md)});
  }
  return t;
}

CsvTable monte_carlo_summary_table(const MonteCarloSummary& summary) {
  CsvTable t{{"metric", "mean", "variance"}, {}};
  t.add_row({"mse", format_double(summary.mse.mean), format_double(summary.mse.variance)});
  t.add_row({"md", format_double(summary.md.mean), format_double(summary.md.variance)});
  t.add_row({"n_selected", format_double(summary.n_selected.mean),
             format_double(summary.n_selected.variance)});
  return t;
}

ObservabilityCertificate observability_check(const ExperimentConfig& cfg, bool write_outputs) {
  cfg.validate();
  const LtvSystem sys = build_system(cfg);
  sys.require_horizon(cfg.horizon);
  Rng net_rng(derive_seed(cfg.seed, 0));
  const SensorNetwork net = build_network(cfg, net_rng);

  const StructuralMatrix a_bar = structure_over_horizon(sys, cfg.horizon);
  std::vector<StructuralMatrix> h_bars;
  for (const auto& n : net.nodes) {
    StructuralMatrix h = structure_of(n.h);
    if (std::find(h_bars.begin(), h_bars.end(), h) == h_bars.end()) h_bars.push_back(std::move(h));
  }
  const ObservabilityCertificate cert = is_structurally_observable(a_bar, h_bars);

  if (write_outputs) {
    ensure_dir(cfg.out);
    CsvTable t{{"state", "reachable", "in_dilation"}, {}};
    for (int i = 1; i <= cfg.state_dim; ++i) {
      const bool unreachable = std::find(cert.unreachable_states.begin(),
                                         cert.unreachable_states.end(), i) !=
                               cert.unreachable_states.end();
      const bool dilated = std::find(cert.dilated_states.begin(), cert.dilated_states.end(), i) !=
                           cert.dilated_states.end();
      t.add_row({format_int(i), unreachable ? "0" : "1", dilated ? "1" : "0"});
    }
    write_csv(t, cfg.out / "observability.csv");
  }
  return cert;
}

}  // namespace dkfsel
