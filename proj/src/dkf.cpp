#include "dkfsel/dkf.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <unordered_set>

#include "dkfsel/errors.hpp"

namespace dkfsel {

namespace {

struct MeasurementTerms {
  Matrix ht_rinv;  ///< H^T R^{-1}
  Matrix l;        ///< H^T R^{-1} H

  MeasurementTerms(const Matrix& h, const Matrix& r) {
    const Eigen::LDLT<Matrix> ldlt(r);
    if (ldlt.info() != Eigen::Success || is_effectively_singular(r)) {
      throw ValidationError("measurement noise covariance R is singular");
    }
    ht_rinv = ldlt.solve(h).transpose();
    l = symmetrize(ht_rinv * h);
  }
};

/// C(k) and (I - C(k)) for a given M(k).
struct RiccatiFactors {
  Matrix m;
  Matrix c;
  Matrix i_minus_c;
};

RiccatiFactors riccati_factors(const Matrix& info, const TimeUpdateOperator& op) {
  RiccatiFactors f;
  f.m = symmetrize(op.a_inv.transpose() * info * op.a_inv);
  const Matrix s = f.m + op.q_inv;
  // M symmetric => C = M S^{-1} = (S^{-1} M)^T.
  f.c = s.ldlt().solve(f.m).transpose();
  f.i_minus_c = Matrix::Identity(info.rows(), info.cols()) - f.c;
  return f;
}

Matrix propagate_matrix(const RiccatiFactors& f, const TimeUpdateOperator& op) {
  // (I - C) stands on the left: (I - C) M = C Q^{-1} makes this equal to
  // M - M (M + Q^{-1})^{-1} M. The transposed placement only agrees when C
  // and M commute.
  return symmetrize(f.i_minus_c * f.m * f.i_minus_c.transpose() +
                    f.c * op.q_inv * f.c.transpose());
}

void require_finite(const Matrix& a, long step, const char* what) {
  if (!a.allFinite()) {
    throw NumericError(std::string(what) + " became non-finite at step " +
                       std::to_string(step));
  }
}

std::vector<TimeUpdateOperator> time_update_operators(const LtvSystem& sys, long n_steps,
                                                      double tol) {
  sys.require_horizon(n_steps);
  std::vector<TimeUpdateOperator> ops;
  ops.reserve(static_cast<std::size_t>(n_steps));
  for (long k = 0; k < n_steps; ++k) {
    ops.push_back(TimeUpdateOperator::make(transition_matrix(sys, k), sys.process_noise_cov, tol));
  }
  return ops;
}

}  // namespace

NodeFilterState NodeFilterState::zero(int state_dim) {
  return from_prior(Matrix::Zero(state_dim, state_dim), Vector::Zero(state_dim));
}

NodeFilterState NodeFilterState::from_prior(const Matrix& info_prior, const Vector& iv_prior) {
  NodeFilterState s;
  s.info_prior = info_prior;
  s.iv_prior = iv_prior;
  s.info_post = info_prior;
  s.iv_post = iv_prior;
  return s;
}

std::optional<Vector> NodeFilterState::x_prior(double tol) const {
  if (is_effectively_singular(info_prior, tol)) return std::nullopt;
  return Vector(info_prior.ldlt().solve(iv_prior));
}

std::optional<Vector> NodeFilterState::x_post(double tol) const {
  if (is_effectively_singular(info_post, tol)) return std::nullopt;
  return Vector(info_post.ldlt().solve(iv_post));
}

TimeUpdateOperator TimeUpdateOperator::make(const Matrix& a_k, const Matrix& q, double tol) {
  TimeUpdateOperator op;
  auto inv = inverse_or_pinv(a_k, tol);
  op.a_inv = std::move(inv.inverse);
  op.pseudo = inv.pseudo;
  const Eigen::LLT<Matrix> llt(q);
  if (llt.info() != Eigen::Success) {
    throw ValidationError("process noise covariance Q is not positive definite");
  }
  op.q_inv = symmetrize(llt.solve(Matrix::Identity(q.rows(), q.cols())));
  return op;
}

InformationPair propagate_information(const Matrix& info, const Vector& iv,
                                      const TimeUpdateOperator& op, long step) {
  const RiccatiFactors f = riccati_factors(info, op);
  InformationPair out{propagate_matrix(f, op), f.i_minus_c * (op.a_inv.transpose() * iv)};
  require_finite(out.info, step, "information matrix");
  require_finite(out.iv, step, "information vector");
  return out;
}

NodeFilterState node_measurement_update(const NodeFilterState& state, const Vector& z,
                                        const Matrix& h, const Matrix& r) {
  if (h.cols() != state.info_prior.rows() || z.size() != h.rows()) {
    throw DimensionError("node_measurement_update: inconsistent dimensions");
  }
  const MeasurementTerms terms(h, r);
  NodeFilterState next = state;
  next.info_post = state.info_prior + terms.l;
  next.iv_post = state.iv_prior + terms.ht_rinv * z;
  return next;
}

NodeFilterState node_time_update(const NodeFilterState& state, const Matrix& a_k,
                                 const Matrix& q, long step) {
  const auto op = TimeUpdateOperator::make(a_k, q);
  auto next = propagate_information(state.info_post, state.iv_post, op, step);
  NodeFilterState out;
  out.info_prior = std::move(next.info);
  out.iv_prior = std::move(next.iv);
  out.info_post = out.info_prior;
  out.iv_post = out.iv_prior;
  return out;
}

Matrix observer_gain(const NodeFilterState& state, const Matrix& a_k, const Matrix& h,
                     const Matrix& r) {
  if (is_effectively_singular(state.info_post)) {
    throw NotObservableError("observer gain: information matrix is still singular");
  }
  const MeasurementTerms terms(h, r);
  return a_k * state.info_post.ldlt().solve(terms.ht_rinv);
}

FusedPrior FusedPrior::zero(int state_dim) {
  return {Matrix::Zero(state_dim, state_dim), Vector::Zero(state_dim)};
}

DelayedReport report_view(int node_id, long origin_step, long staleness, const Matrix& d_info,
                          const Vector& d_iv) {
  return DelayedReport{node_id, origin_step, staleness,
                       Eigen::Map<const Matrix>(d_info.data(), d_info.rows(), d_info.cols()),
                       Eigen::Map<const Vector>(d_iv.data(), d_iv.size())};
}

FusedEstimate fuse(const FusedPrior& prior, std::span<const DelayedReport> reports, long step,
                   double tol) {
  FusedEstimate est;
  est.step = step;
  est.info = prior.info;
  est.iv = prior.iv;
  for (const auto& r : reports) {
    if (r.d_info.rows() != est.info.rows() || r.d_iv.size() != est.iv.size()) {
      throw DimensionError("fuse: report from node " + std::to_string(r.node_id) +
                           " has wrong dimension");
    }
    est.info += r.d_info;
    est.iv += r.d_iv;
  }
  est.info = symmetrize(est.info);
  if (is_effectively_singular(est.info, tol)) {
    est.pseudo_inverse = true;
    est.x_hat = pseudo_inverse(est.info, tol) * est.iv;
  } else {
    est.x_hat = est.info.ldlt().solve(est.iv);
  }
  return est;
}

Realization draw_realization(const LtvSystem& sys, const SensorNetwork& net, long n_steps,
                             Rng& rng) {
  Rng plant_rng(rng());
  Rng delay_rng(rng());
  const std::uint64_t meas_seed = rng();

  Realization real;
  real.truth = simulate(sys, n_steps, plant_rng);

  Eigen::Index rows = 0;
  real.offset.reserve(net.size());
  for (const auto& node : net.nodes) {
    real.offset.push_back(rows);
    rows += node.h.rows();
    const double d = effective_delay(node, delay_rng);
    real.delay_s.push_back(d);
    real.delay_steps.push_back(delay_to_steps(d, sys.sample_time));
  }

  real.measurements.resize(rows, n_steps + 1);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (std::size_t i = 0; i < net.size(); ++i) {
    const auto& node = net.nodes[i];
    const Matrix noise_factor = Eigen::LLT<Matrix>(node.r).matrixL();
    Rng node_rng(derive_seed(meas_seed, static_cast<std::uint64_t>(node.id)));
    Vector e(node.h.rows());
    for (long k = 0; k <= n_steps; ++k) {
      for (Eigen::Index j = 0; j < e.size(); ++j) e(j) = normal(node_rng);
      real.measurements.col(k).segment(real.offset[i], node.h.rows()) =
          node.h * real.truth[k] + noise_factor * e;
    }
  }
  return real;
}

NodeBank::NodeBank(const LtvSystem& sys, const SensorNetwork& net, const Realization& real,
                   std::vector<int> ids, const NodeFilterState& init)
    : ids_(std::move(ids)), slot_of_id_(net.size() + 1, -1) {
  const long n_steps = real.n_steps();
  const auto m = static_cast<Eigen::Index>(sys.state_dim);
  const auto ops = time_update_operators(sys, n_steps, kDefaultSingularTol);

  d_info_.reserve(ids_.size());
  d_iv_.reserve(ids_.size());
  info_post_.reserve(ids_.size());
  for (std::size_t s = 0; s < ids_.size(); ++s) {
    const int id = ids_[s];
    const SensorNode& node = net.by_id(id);
    slot_of_id_[static_cast<std::size_t>(id)] = static_cast<long>(s);
    const MeasurementTerms terms(node.h, node.r);
    const auto p = node.h.rows();
    const auto index = static_cast<std::size_t>(id - 1);

    MatrixSeries d_info(m, m, n_steps + 1);
    MatrixSeries d_iv(m, 1, n_steps + 1);
    MatrixSeries info_post(m, m, n_steps + 1);

    Matrix info_prior = init.info_prior;
    Vector iv_prior = init.iv_prior;
    for (long k = 0; k <= n_steps; ++k) {
      const Matrix info = info_prior + terms.l;
      const Vector iv = iv_prior + terms.ht_rinv * real.z(index, k, p);
      d_info[k] = info - info_prior;
      d_iv[k] = iv - iv_prior;
      info_post[k] = info;
      if (k < n_steps) {
        auto next = propagate_information(info, iv, ops[static_cast<std::size_t>(k)], k);
        info_prior = std::move(next.info);
        iv_prior = std::move(next.iv);
      }
    }
    d_info_.push_back(std::move(d_info));
    d_iv_.push_back(std::move(d_iv));
    info_post_.push_back(std::move(info_post));
  }
}

long NodeBank::slot(int id) const {
  if (id < 1 || static_cast<std::size_t>(id) >= slot_of_id_.size()) return -1;
  return slot_of_id_[static_cast<std::size_t>(id)];
}

MatrixSeries local_information_history(const LtvSystem& sys, const SensorNode& node,
                                       long n_steps, const Matrix& init_info) {
  const auto ops = time_update_operators(sys, n_steps, kDefaultSingularTol);
  const MeasurementTerms terms(node.h, node.r);
  MatrixSeries hist(sys.state_dim, sys.state_dim, n_steps + 1);
  Matrix prior = init_info;
  for (long k = 0; k <= n_steps; ++k) {
    const Matrix post = prior + terms.l;
    hist[k] = post;
    if (k < n_steps) {
      const RiccatiFactors f = riccati_factors(post, ops[static_cast<std::size_t>(k)]);
      prior = propagate_matrix(f, ops[static_cast<std::size_t>(k)]);
      require_finite(prior, k, "information matrix");
    }
  }
  return hist;
}

void validate_subset(const SensorNetwork& net, std::span<const int> subset) {
  if (subset.empty()) throw SelectionError("node subset is empty");
  std::unordered_set<int> seen;
  for (int id : subset) {
    net.by_id(id);
    if (!seen.insert(id).second) {
      throw SelectionError("node " + std::to_string(id) + " appears twice in the subset");
    }
  }
}

DkfResult run_dkf_on(const LtvSystem& sys, const Realization& real, const NodeBank& bank,
                     std::span<const int> subset, const DkfOptions& opts) {
  if (subset.empty()) throw SelectionError("node subset is empty");
  const long n_steps = real.n_steps();
  const int m = sys.state_dim;
  const auto ops = time_update_operators(sys, n_steps, opts.singular_tol);

  std::vector<long> slots;
  slots.reserve(subset.size());
  for (int id : subset) {
    const long s = bank.slot(id);
    if (s < 0) throw SelectionError("node " + std::to_string(id) + " is not in the node bank");
    slots.push_back(s);
  }

  DkfResult out;
  out.subset.assign(subset.begin(), subset.end());
  out.fused.reserve(static_cast<std::size_t>(n_steps + 1));
  out.x_hat.states.resize(m, n_steps + 1);

  FusedPrior prior = opts.estimator_init.info.size() > 0 ? opts.estimator_init
                                                         : FusedPrior::zero(m);
  std::vector<DelayedReport> reports;
  reports.reserve(subset.size());
  for (long k = 0; k <= n_steps; ++k) {
    reports.clear();
    for (std::size_t j = 0; j < subset.size(); ++j) {
      const int id = subset[j];
      const long staleness =
          opts.ignore_delays ? 0 : real.delay_steps[static_cast<std::size_t>(id - 1)];
      const long origin = k - staleness;
      if (origin < 0) continue;
      const auto slot = static_cast<std::size_t>(slots[j]);
      const auto d_info = bank.d_info(slot)[origin];
      const auto d_iv = bank.d_iv(slot)[origin];
      reports.push_back(DelayedReport{id, origin, staleness,
                                      Eigen::Map<const Matrix>(d_info.data(), m, m),
                                      Eigen::Map<const Vector>(d_iv.data(), m)});
    }
    FusedEstimate est = fuse(prior, reports, k, opts.singular_tol);
    if (est.pseudo_inverse) out.pseudo_inverse_steps.push_back(k);
    out.x_hat[k] = est.x_hat;
    if (k < n_steps) {
      auto next = propagate_information(est.info, est.iv, ops[static_cast<std::size_t>(k)], k);
      prior = {std::move(next.info), std::move(next.iv)};
    }
    out.fused.push_back(std::move(est));
  }
  return out;
}

DkfRun run_dkf(const LtvSystem& sys, const SensorNetwork& net, std::span<const int> subset,
               long n_steps, Rng& rng, const DkfOptions& opts) {
  validate_subset(net, subset);
  DkfRun run;
  run.realization = draw_realization(sys, net, n_steps, rng);
  const NodeFilterState init = opts.node_init ? *opts.node_init : NodeFilterState::zero(sys.state_dim);
  const NodeBank bank(sys, net, run.realization, {subset.begin(), subset.end()}, init);
  run.result = run_dkf_on(sys, run.realization, bank, subset, opts);
  run.node_info.reserve(subset.size());
  for (std::size_t s = 0; s < subset.size(); ++s) run.node_info.push_back(bank.info_post(s));
  return run;
}

}  // namespace dkfsel
