#pragma once

#include <span>
#include <string>
#include <vector>

#include "dkfsel/linalg.hpp"
#include "dkfsel/model.hpp"

namespace dkfsel {

inline constexpr double kDefaultStructureTol = 1e-12;

/// Zero / free-parameter pattern of a matrix.
class StructuralMatrix {
 public:
  StructuralMatrix() = default;
  StructuralMatrix(Eigen::Index rows, Eigen::Index cols)
      : rows_(rows), cols_(cols), star_(static_cast<std::size_t>(rows * cols), false) {}

  Eigen::Index rows() const { return rows_; }
  Eigen::Index cols() const { return cols_; }
  bool operator()(Eigen::Index i, Eigen::Index j) const {
    return star_[static_cast<std::size_t>(i * cols_ + j)];
  }
  void set(Eigen::Index i, Eigen::Index j, bool star = true) {
    star_[static_cast<std::size_t>(i * cols_ + j)] = star;
  }
  /// Element-wise OR; shapes must agree.
  StructuralMatrix& operator|=(const StructuralMatrix& other);
  bool operator==(const StructuralMatrix&) const = default;

  /// Rows like "* 0" for printing.
  std::string to_string() const;

 private:
  Eigen::Index rows_ = 0;
  Eigen::Index cols_ = 0;
  std::vector<bool> star_;
};

/// Entry is a free parameter iff |a_ij| > tol.
StructuralMatrix structure_of(const Matrix& a, double tol = kDefaultStructureTol);

/// Union pattern of A(0..n_steps-1).
StructuralMatrix structure_over_horizon(const LtvSystem& sys, long n_steps,
                                        double tol = kDefaultStructureTol);

struct ObservabilityCertificate {
  bool observable = false;
  /// Edge convention used for reachability, spelled out for audit.
  std::string edge_convention;
  std::vector<int> unreachable_states;  ///< 1-based state indices
  std::vector<int> dilated_states;      ///< 1-based; empty unless a dilation exists
  int dilation_neighbours = 0;          ///< |N(S)| for the dilated set S
  int matching_size = 0;
  bool no_outputs = false;

  std::string describe() const;
};

/// Structural observability of (A_bar, stacked H_bar).
///
/// Reachability runs on the digraph of (A^T, H^T): an edge y_j -> x_i for
/// every h_bar(j, i) = *, and x_i -> x_j for every a_bar(i, j) = * (x_j
/// drives x_i, so information about x_i flows back to x_j). Every state must
/// be reachable from an output. The dilation test is a maximum matching of
/// state columns into the rows of [A_bar; H_bar]; a deficient matching yields
/// a set S of columns with |N(S)| < |S|.
ObservabilityCertificate is_structurally_observable(const StructuralMatrix& a_bar,
                                                    std::span<const StructuralMatrix> h_bars);

/// Rank of [H; HA; ...; HA^{m-1}] equals m (relative tolerance 1e-9).
bool is_rank_observable(const Matrix& a, const Matrix& h);

/// Draws a numerical realization of a pattern: U[lo, hi] on free entries.
Matrix random_realization(const StructuralMatrix& pattern, Rng& rng, double lo = 0.5,
                          double hi = 1.5);

}  // namespace dkfsel
