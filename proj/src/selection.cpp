#include "dkfsel/selection.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "dkfsel/errors.hpp"

namespace dkfsel {

long GreedyResult::best() const {
  long best_index = -1;
  for (std::size_t i = 0; i < reports.size(); ++i) {
    const auto& r = reports[i];
    if (!r.ran || !std::isfinite(r.mse)) continue;
    if (best_index < 0 || r.mse < reports[static_cast<std::size_t>(best_index)].mse) {
      best_index = static_cast<long>(i);
    }
  }
  return best_index;
}

std::vector<int> threshold_subset(const SensorNetwork& net, std::span<const double> delay_s,
                                  double r0, double tau0) {
  if (delay_s.size() != net.size()) throw DimensionError("threshold_subset: one delay per node");
  std::vector<int> out;
  for (std::size_t i = 0; i < net.size(); ++i) {
    if (net.nodes[i].variance() <= r0 && delay_s[i] <= tau0) out.push_back(net.nodes[i].id);
  }
  return out;
}

namespace {

SelectionReport score(const Realization& real, const DkfResult& run, std::span<const int> subset,
                      long settle) {
  SelectionReport rep;
  rep.nodes.assign(subset.begin(), subset.end());
  const MseResult e = mse(run.x_hat, real.truth, settle);
  rep.mse = e.normalized;
  rep.mse_raw = e.raw;
  rep.md = max_deviation(run.x_hat, real.truth);
  return rep;
}

}  // namespace

SelectionReport evaluate_subset(const LtvSystem& sys, const SensorNetwork& net,
                                const Realization& real, std::span<const int> subset,
                                double settling_band) {
  validate_subset(net, subset);
  const NodeBank bank(sys, net, real, {subset.begin(), subset.end()},
                      NodeFilterState::zero(sys.state_dim));
  const DkfResult run = run_dkf_on(sys, real, bank, subset);
  return score(real, run, subset, settling_index(real.truth, settling_band).index);
}

GreedyResult greedy_select(const LtvSystem& sys, const SensorNetwork& net,
                           const GreedyOptions& opts, long n_steps, Rng& rng) {
  if (opts.ensemble < 1) throw ValidationError("greedy_select: ensemble must be >= 1");
  std::vector<Realization> reals;
  reals.reserve(static_cast<std::size_t>(opts.ensemble));
  for (int e = 0; e < opts.ensemble; ++e) {
    reals.push_back(draw_realization(sys, net, n_steps, rng));
    if (e > 0) {
      reals.back().delay_s = reals.front().delay_s;
      reals.back().delay_steps = reals.front().delay_steps;
    }
  }
  return greedy_select_on(sys, net, opts, std::move(reals));
}

GreedyResult greedy_select_on(const LtvSystem& sys, const SensorNetwork& net,
                              const GreedyOptions& opts, std::vector<Realization> realizations) {
  if (opts.iterations < 1) throw ValidationError("greedy_select: iterations must be >= 1");
  if (realizations.empty()) throw ValidationError("greedy_select: no realizations");
  net.validate(sys.state_dim);
  const Realization& canon = realizations.front();

  double r_max = 0.0;
  for (const auto& n : net.nodes) r_max = std::max(r_max, n.variance());
  double tau_max = 0.0;
  for (double d : canon.delay_s) tau_max = std::max(tau_max, d);
  if (opts.r_max) r_max = *opts.r_max;
  if (opts.tau_max) tau_max = *opts.tau_max;
  if (!(r_max > 0.0) || !(tau_max > 0.0)) {
    throw ValidationError("greedy_select: r_max and tau_max must be positive");
  }

  GreedyResult out;
  const int iters = opts.iterations;
  out.reports.resize(static_cast<std::size_t>(iters));
  for (int k = 1; k <= iters; ++k) {
    auto& rep = out.reports[static_cast<std::size_t>(k - 1)];
    const double frac = 1.0 - static_cast<double>(k - 1) / static_cast<double>(iters);
    rep.iteration = k;
    rep.r0 = r_max * frac;
    rep.tau0 = tau_max * frac;
    rep.nodes = threshold_subset(net, canon.delay_s, rep.r0, rep.tau0);
    rep.ran = !rep.nodes.empty();
    if (!rep.ran) {
      rep.mse = rep.mse_raw = rep.md = std::numeric_limits<double>::quiet_NaN();
    } else {
      rep.mse = rep.mse_raw = rep.md = 0.0;
    }
  }

  const SettlingResult settle = settling_index(canon.truth, opts.settling_band);
  out.settle_index = settle.index;
  out.settle_fallback = settle.fallback;

  const double weight = 1.0 / static_cast<double>(realizations.size());
  for (const auto& real : realizations) {
    // Subsets are nested, so one bank over the first subset covers them all.
    const NodeBank bank(sys, net, real, out.reports.front().nodes,
                        NodeFilterState::zero(sys.state_dim));
    const long s = settling_index(real.truth, opts.settling_band).index;
    for (auto& rep : out.reports) {
      if (!rep.ran) continue;
      const DkfResult run = run_dkf_on(sys, real, bank, rep.nodes);
      const SelectionReport one = score(real, run, rep.nodes, s);
      rep.mse += weight * one.mse;
      rep.mse_raw += weight * one.mse_raw;
      rep.md += weight * one.md;
    }
  }
  out.realizations = std::move(realizations);
  return out;
}

StabilitySelection stability_select(const LtvSystem& sys, const SensorNetwork& net,
                                    const StabilityParams& params, long n_steps,
                                    std::span<const double> delay_s) {
  params.validate();
  if (n_steps <= params.k_bar) {
    throw HorizonError("stability_select: horizon must exceed k_bar");
  }
  if (delay_s.size() != net.size()) throw DimensionError("stability_select: one delay per node");

  StabilitySelection out;
  if (net.empty()) return out;

  const ITildeKernel kernel(sys, n_steps, params.k_bar, params.beta_hat);
  out.pseudo = kernel.pseudo();
  const Matrix zero = Matrix::Zero(sys.state_dim, sys.state_dim);

  bool any_applicable = false;
  out.rows.resize(net.size());
  for (std::size_t i = 0; i < net.size(); ++i) {
    const SensorNode& node = net.nodes[i];
    StabilityNodeRow& row = out.rows[i];
    row.node_id = node.id;
    row.delay_s = delay_s[i];
    row.delay_steps = delay_to_steps(delay_s[i], sys.sample_time);
    row.variance = node.variance();

    const Matrix l = node_information_gain(node);
    const MatrixSeries hist = local_information_history(sys, node, n_steps, zero);
    for (long k = params.k_bar + 1; k <= n_steps; ++k) {
      const long origin = k - row.delay_steps;
      if (origin <= 0) continue;
      ++row.ct_exp;
      if (hist[origin].trace() > kernel.trace(k, l)) ++row.ct_act;
    }
    any_applicable = any_applicable || row.ct_exp > 0;
    row.selected = row.ct_exp > 0 && row.ct_exp == row.ct_act;
    if (row.selected) out.nodes.push_back(node.id);
  }
  if (!any_applicable) out.warning = "delays are larger than the estimation horizon";
  return out;
}

StabilitySelection stability_select(const LtvSystem& sys, const SensorNetwork& net,
                                    const StabilityParams& params, long n_steps) {
  std::vector<double> delays;
  delays.reserve(net.size());
  for (const auto& n : net.nodes) delays.push_back(n.delay.base);
  return stability_select(sys, net, params, n_steps, delays);
}

}  // namespace dkfsel
