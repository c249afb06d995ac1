#include "dkfsel/observability.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <functional>
#include <sstream>

#include "dkfsel/errors.hpp"

namespace dkfsel {

StructuralMatrix& StructuralMatrix::operator|=(const StructuralMatrix& other) {
  if (other.rows_ != rows_ || other.cols_ != cols_) {
    throw DimensionError("structural union: shape mismatch");
  }
  for (std::size_t i = 0; i < star_.size(); ++i) star_[i] = star_[i] || other.star_[i];
  return *this;
}

std::string StructuralMatrix::to_string() const {
  std::ostringstream os;
  for (Eigen::Index i = 0; i < rows_; ++i) {
    os << "[";
    for (Eigen::Index j = 0; j < cols_; ++j) os << (j ? " " : "") << ((*this)(i, j) ? '*' : '0');
    os << "]";
  }
  return os.str();
}

StructuralMatrix structure_of(const Matrix& a, double tol) {
  StructuralMatrix s(a.rows(), a.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) s.set(i, j, std::abs(a(i, j)) > tol);
  }
  return s;
}

StructuralMatrix structure_over_horizon(const LtvSystem& sys, long n_steps, double tol) {
  if (n_steps < 1) throw ValidationError("structure_over_horizon: n_steps must be >= 1");
  StructuralMatrix s = structure_of(transition_matrix(sys, 0), tol);
  for (long k = 1; k < n_steps; ++k) s |= structure_of(transition_matrix(sys, k), tol);
  return s;
}

std::string ObservabilityCertificate::describe() const {
  std::ostringstream os;
  os << (observable ? "structurally observable" : "NOT structurally observable") << "\n";
  os << "edges: " << edge_convention << "\n";
  if (no_outputs) os << "no output rows supplied\n";
  os << "matching size: " << matching_size << "\n";
  auto list = [&](const char* label, const std::vector<int>& v) {
    os << label << ":";
    if (v.empty()) os << " none";
    for (int s : v) os << " x" << s;
    os << "\n";
  };
  list("unreachable states", unreachable_states);
  list("dilated states", dilated_states);
  if (!dilated_states.empty()) os << "dilation neighbours: " << dilation_neighbours << "\n";
  return os.str();
}

ObservabilityCertificate is_structurally_observable(const StructuralMatrix& a_bar,
                                                    std::span<const StructuralMatrix> h_bars) {
  const Eigen::Index m = a_bar.rows();
  if (a_bar.cols() != m || m < 1) throw DimensionError("A_bar must be square and non-empty");

  ObservabilityCertificate cert;
  cert.edge_convention =
      "y_j -> x_i iff h_bar(j,i) = *; x_i -> x_j iff a_bar(i,j) = * (graph of A^T, H^T)";

  // Stack output rows.
  std::vector<std::vector<int>> out_rows;
  for (const auto& h : h_bars) {
    if (h.cols() != m) throw DimensionError("H_bar has wrong number of columns");
    for (Eigen::Index j = 0; j < h.rows(); ++j) {
      std::vector<int> support;
      for (Eigen::Index i = 0; i < m; ++i) {
        if (h(j, i)) support.push_back(static_cast<int>(i));
      }
      out_rows.push_back(std::move(support));
    }
  }
  if (out_rows.empty()) {
    cert.no_outputs = true;
    for (Eigen::Index i = 0; i < m; ++i) cert.unreachable_states.push_back(static_cast<int>(i) + 1);
    return cert;
  }

  // Reachability from the outputs.
  std::vector<bool> seen(static_cast<std::size_t>(m), false);
  std::deque<int> queue;
  for (const auto& row : out_rows) {
    for (int i : row) {
      if (!seen[static_cast<std::size_t>(i)]) {
        seen[static_cast<std::size_t>(i)] = true;
        queue.push_back(i);
      }
    }
  }
  while (!queue.empty()) {
    const int i = queue.front();
    queue.pop_front();
    for (Eigen::Index j = 0; j < m; ++j) {
      if (a_bar(i, j) && !seen[static_cast<std::size_t>(j)]) {
        seen[static_cast<std::size_t>(j)] = true;
        queue.push_back(static_cast<int>(j));
      }
    }
  }
  for (Eigen::Index i = 0; i < m; ++i) {
    if (!seen[static_cast<std::size_t>(i)]) cert.unreachable_states.push_back(static_cast<int>(i) + 1);
  }

  // Bipartite graph: state column c -> rows of [A_bar; H_bar] with a star in c.
  const int n_rows = static_cast<int>(m) + static_cast<int>(out_rows.size());
  std::vector<std::vector<int>> adj(static_cast<std::size_t>(m));
  for (Eigen::Index r = 0; r < m; ++r) {
    for (Eigen::Index c = 0; c < m; ++c) {
      if (a_bar(r, c)) adj[static_cast<std::size_t>(c)].push_back(static_cast<int>(r));
    }
  }
  for (std::size_t j = 0; j < out_rows.size(); ++j) {
    for (int c : out_rows[j]) adj[static_cast<std::size_t>(c)].push_back(static_cast<int>(m) + static_cast<int>(j));
  }

  // Kuhn's augmenting paths; m is small.
  std::vector<int> row_match(static_cast<std::size_t>(n_rows), -1);
  std::vector<int> col_match(static_cast<std::size_t>(m), -1);
  std::vector<bool> visited;
  std::function<bool(int)> augment = [&](int c) {
    for (int r : adj[static_cast<std::size_t>(c)]) {
      if (visited[static_cast<std::size_t>(r)]) continue;
      visited[static_cast<std::size_t>(r)] = true;
      const int owner = row_match[static_cast<std::size_t>(r)];
      if (owner < 0 || augment(owner)) {
        row_match[static_cast<std::size_t>(r)] = c;
        col_match[static_cast<std::size_t>(c)] = r;
        return true;
      }
    }
    return false;
  };
  for (int c = 0; c < m; ++c) {
    visited.assign(static_cast<std::size_t>(n_rows), false);
    if (augment(c)) ++cert.matching_size;
  }

  if (cert.matching_size < m) {
    // Columns reachable by alternating paths from an unmatched column form a
    // Hall violator: every neighbour row is matched inside the set.
    const auto free_col = std::find(col_match.begin(), col_match.end(), -1) - col_match.begin();
    std::vector<bool> in_set(static_cast<std::size_t>(m), false);
    std::vector<bool> row_seen(static_cast<std::size_t>(n_rows), false);
    std::deque<int> q{static_cast<int>(free_col)};
    in_set[static_cast<std::size_t>(free_col)] = true;
    while (!q.empty()) {
      const int c = q.front();
      q.pop_front();
      for (int r : adj[static_cast<std::size_t>(c)]) {
        if (row_seen[static_cast<std::size_t>(r)]) continue;
        row_seen[static_cast<std::size_t>(r)] = true;
        ++cert.dilation_neighbours;
        const int owner = row_match[static_cast<std::size_t>(r)];
        if (owner >= 0 && !in_set[static_cast<std::size_t>(owner)]) {
          in_set[static_cast<std::size_t>(owner)] = true;
          q.push_back(owner);
        }
      }
    }
    for (int c = 0; c < m; ++c) {
      if (in_set[static_cast<std::size_t>(c)]) cert.dilated_states.push_back(c + 1);
    }
  }

  cert.observable = cert.unreachable_states.empty() && cert.dilated_states.empty();
  return cert;
}

bool is_rank_observable(const Matrix& a, const Matrix& h) {
  const Eigen::Index m = a.rows();
  Matrix obs(h.rows() * m, m);
  Matrix block = h;
  for (Eigen::Index i = 0; i < m; ++i) {
    obs.middleRows(i * h.rows(), h.rows()) = block;
    block = block * a;
  }
  Eigen::ColPivHouseholderQR<Matrix> qr(obs);
  qr.setThreshold(1e-9);
  return qr.rank() == m;
}

Matrix random_realization(const StructuralMatrix& pattern, Rng& rng, double lo, double hi) {
  std::uniform_real_distribution<double> u(lo, hi);
  Matrix a = Matrix::Zero(pattern.rows(), pattern.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      if (pattern(i, j)) a(i, j) = u(rng);
    }
  }
  return a;
}

}  // namespace dkfsel
