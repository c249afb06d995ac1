#pragma once

#include <optional>
#include <span>
#include <vector>

#include "dkfsel/linalg.hpp"
#include "dkfsel/model.hpp"
#include "dkfsel/rng.hpp"
#include "dkfsel/sensing.hpp"

namespace dkfsel {

/// Fixed-shape matrix per step stored contiguously (column-major blocks).
class MatrixSeries {
 public:
  MatrixSeries() = default;
  MatrixSeries(Eigen::Index rows, Eigen::Index cols, long length)
      : rows_(rows), cols_(cols), length_(length),
        data_(static_cast<std::size_t>(rows * cols * length), 0.0) {}

  long size() const { return length_; }
  Eigen::Index rows() const { return rows_; }
  Eigen::Index cols() const { return cols_; }

  Eigen::Map<const Matrix> operator[](long k) const {
    return Eigen::Map<const Matrix>(block(k), rows_, cols_);
  }
  Eigen::Map<Matrix> operator[](long k) { return Eigen::Map<Matrix>(block(k), rows_, cols_); }

 private:
  const double* block(long k) const { return data_.data() + k * rows_ * cols_; }
  double* block(long k) { return data_.data() + k * rows_ * cols_; }

  Eigen::Index rows_ = 0;
  Eigen::Index cols_ = 0;
  long length_ = 0;
  std::vector<double> data_;
};

/// Per-node information-filter state. Information matrices are
/// I(k|k-1) / I(k|k); information vectors are y(k|k-1) = I(k|k-1) x(k|k-1)
/// and y(k|k) = I(k|k) x(k|k).
struct NodeFilterState {
  Matrix info_prior;
  Matrix info_post;
  Vector iv_prior;
  Vector iv_post;
  Matrix gain;  ///< empty until observer_gain has been evaluated

  /// Zero information, i.e. I(0|-1) = 0, y(0|-1) = 0.
  static NodeFilterState zero(int state_dim);
  static NodeFilterState from_prior(const Matrix& info_prior, const Vector& iv_prior);

  /// I^{-1} y, or nullopt while the information matrix is singular.
  std::optional<Vector> x_prior(double tol = kDefaultSingularTol) const;
  std::optional<Vector> x_post(double tol = kDefaultSingularTol) const;
};

/// Quantities shared by every information time update at one step: A(k)^{-1}
/// (pseudo-inverse when A(k) is effectively singular) and Q^{-1}.
struct TimeUpdateOperator {
  Matrix a_inv;
  Matrix q_inv;
  bool pseudo = false;

  static TimeUpdateOperator make(const Matrix& a_k, const Matrix& q,
                                 double tol = kDefaultSingularTol);
};

struct InformationPair {
  Matrix info;
  Vector iv;
};

/// One information-form time update:
///   M = A^{-T} I A^{-1},  C = M (M + Q^{-1})^{-1},
///   I' = (I - C) M (I - C)^T + C Q^{-1} C^T,  y' = (I - C) A^{-T} y.
/// Throws NumericError naming `step` on a non-finite result.
InformationPair propagate_information(const Matrix& info, const Vector& iv,
                                      const TimeUpdateOperator& op, long step = -1);

/// info_post = info_prior + H^T R^{-1} H, iv_post = iv_prior + H^T R^{-1} z.
NodeFilterState node_measurement_update(const NodeFilterState& state, const Vector& z,
                                        const Matrix& h, const Matrix& r);

/// Advances the posterior to the next prior (see propagate_information).
NodeFilterState node_time_update(const NodeFilterState& state, const Matrix& a_k,
                                 const Matrix& q, long step = -1);

/// L(k) = A(k) I(k|k)^{-1} H^T R^{-1}, i.e. the covariance-form gain
/// premultiplied by A(k). Throws NotObservableError while I(k|k) is singular.
Matrix observer_gain(const NodeFilterState& state, const Matrix& a_k, const Matrix& h,
                     const Matrix& r);

/// Estimator-side prior I(k|k-1), y(k|k-1).
struct FusedPrior {
  Matrix info;
  Vector iv;

  static FusedPrior zero(int state_dim);
};

struct FusedEstimate {
  long step = 0;
  Matrix info;
  Vector iv;
  Vector x_hat;
  bool pseudo_inverse = false;  ///< I(k|k) was singular; x_hat used pinv

  FusedPrior as_prior() const { return {info, iv}; }
};

/// Non-owning view of one node's information increments produced at
/// `origin_step` and delivered `staleness` steps later.
struct DelayedReport {
  int node_id;
  long origin_step;
  long staleness;
  Eigen::Map<const Matrix> d_info;
  Eigen::Map<const Vector> d_iv;
};

DelayedReport report_view(int node_id, long origin_step, long staleness, const Matrix& d_info,
                          const Vector& d_iv);

/// I(k|k) = I(k|k-1) + sum d_info, y(k|k) = y(k|k-1) + sum d_iv and
/// x(k|k) = I(k|k)^{-1} y(k|k) (pseudo-inverse, flagged, when singular).
FusedEstimate fuse(const FusedPrior& prior, std::span<const DelayedReport> reports, long step,
                   double tol = kDefaultSingularTol);

/// One shared draw of everything random in a run: the plant trajectory, every
/// node's measurements z_i(0..N) and each node's effective delay.
struct Realization {
  Trajectory truth;
  Matrix measurements;               ///< stacked node outputs x steps 0..N
  std::vector<Eigen::Index> offset;  ///< first measurement row per node
  std::vector<double> delay_s;       ///< effective delay per node [s]
  std::vector<long> delay_steps;     ///< staleness per node [steps]

  long n_steps() const { return truth.size() - 1; }
  auto z(std::size_t node_index, long k, Eigen::Index p) const {
    return measurements.col(k).segment(offset[node_index], p);
  }
};

/// Plant, delays and measurements are drawn from three sub-streams seeded
/// from `rng`, so the realization is a pure function of the rng state.
Realization draw_realization(const LtvSystem& sys, const SensorNetwork& net, long n_steps,
                             Rng& rng);

/// Local filter histories for a set of nodes run on one realization: the
/// per-step report increments and I_i(k|k). Nodes filter on their own
/// delay-free clock; delays only act at the estimator.
class NodeBank {
 public:
  NodeBank(const LtvSystem& sys, const SensorNetwork& net, const Realization& real,
           std::vector<int> ids, const NodeFilterState& init);

  const std::vector<int>& ids() const { return ids_; }
  /// Index of node `id` inside this bank, or -1.
  long slot(int id) const;
  const MatrixSeries& d_info(std::size_t slot) const { return d_info_[slot]; }
  const MatrixSeries& d_iv(std::size_t slot) const { return d_iv_[slot]; }
  const MatrixSeries& info_post(std::size_t slot) const { return info_post_[slot]; }

 private:
  std::vector<int> ids_;
  std::vector<long> slot_of_id_;
  std::vector<MatrixSeries> d_info_;
  std::vector<MatrixSeries> d_iv_;
  std::vector<MatrixSeries> info_post_;
};

/// Information-matrix-only local recursion I_i(k|k), k = 0..n_steps, from
/// I_i(0|-1) = init_info. No measurements are needed.
MatrixSeries local_information_history(const LtvSystem& sys, const SensorNode& node,
                                       long n_steps, const Matrix& init_info);

struct DkfOptions {
  FusedPrior estimator_init;        ///< empty => zero information
  std::optional<NodeFilterState> node_init;  ///< default: zero information
  /// Use zero staleness for every node regardless of the realization.
  bool ignore_delays = false;
  double singular_tol = kDefaultSingularTol;
};

struct DkfResult {
  std::vector<FusedEstimate> fused;  ///< steps 0..N
  Trajectory x_hat;
  std::vector<long> pseudo_inverse_steps;
  std::vector<int> subset;
};

/// Estimator loop over one realization: each step fuses the most recent
/// delivered report of every subset node (origin k - d_j; none while
/// k - d_j < 0), then predicts with the information time update.
DkfResult run_dkf_on(const LtvSystem& sys, const Realization& real, const NodeBank& bank,
                     std::span<const int> subset, const DkfOptions& opts = {});

struct DkfRun {
  Realization realization;
  DkfResult result;
  /// I_i(k|k) histories of the subset nodes, same order as `result.subset`.
  std::vector<MatrixSeries> node_info;
};

/// Simulates the plant once, runs every subset node's local filter, and fuses
/// with delays. Throws SelectionError for an empty or unknown subset.
DkfRun run_dkf(const LtvSystem& sys, const SensorNetwork& net, std::span<const int> subset,
               long n_steps, Rng& rng, const DkfOptions& opts = {});

void validate_subset(const SensorNetwork& net, std::span<const int> subset);

}  // namespace dkfsel
