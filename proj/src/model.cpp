#include "dkfsel/model.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <string>

#include "dkfsel/errors.hpp"

namespace dkfsel {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

}  // namespace

void LtvSystem::validate() const {
  if (state_dim < 1) throw ValidationError("state_dim must be >= 1");
  if (!(sample_time > 0.0)) throw ValidationError("ts must be > 0");
  if (process_noise_cov.rows() != state_dim || process_noise_cov.cols() != state_dim) {
    throw DimensionError("process noise covariance must be state_dim x state_dim");
  }
  if (!is_symmetric(process_noise_cov, 1e-12)) {
    throw ValidationError("process noise covariance is not symmetric");
  }
  if (!(min_eigenvalue(process_noise_cov) > 0.0)) {
    throw ValidationError("process noise covariance is not positive definite");
  }
  if (initial_state.size() != state_dim) {
    throw DimensionError("x0 must have state_dim entries");
  }
  std::visit(Overloaded{
                 [&](const BuiltinTransition& b) {
                   if (state_dim != 2) {
                     throw ValidationError("builtin transition requires state_dim = 2");
                   }
                   if (!(b.t_max >= 0.0)) throw ValidationError("t_max must be >= 0");
                 },
                 [&](const TableTransition& t) {
                   if (t.matrices.empty()) throw ValidationError("transition table is empty");
                   for (const auto& a : t.matrices) {
                     if (a.rows() != state_dim || a.cols() != state_dim) {
                       throw DimensionError("transition table matrix has wrong shape");
                     }
                   }
                 }},
             transition);
}

void LtvSystem::require_horizon(long n_steps) const {
  if (const auto* t = std::get_if<TableTransition>(&transition)) {
    if (static_cast<long>(t->matrices.size()) < n_steps) {
      throw HorizonError("transition table holds " + std::to_string(t->matrices.size()) +
                         " matrices but the run needs " + std::to_string(n_steps));
    }
  }
}

LtvSystem benchmark_system(double q_scale, double sample_time) {
  LtvSystem sys;
  sys.state_dim = 2;
  sys.transition = BuiltinTransition{};
  sys.process_noise_cov = q_scale * Matrix::Identity(2, 2);
  sys.initial_state = Vector::Ones(2);
  sys.sample_time = sample_time;
  return sys;
}

Matrix transition_matrix(const LtvSystem& sys, long k) {
  if (k < 0) throw HorizonError("negative step index");
  return std::visit(
      Overloaded{[&](const BuiltinTransition& b) -> Matrix {
                   const double t = std::min(static_cast<double>(k) * sys.sample_time, b.t_max);
                   Matrix a(2, 2);
                   a << 0.5, 0.25, 0.25, std::exp2(-t);
                   return a;
                 },
                 [&](const TableTransition& t) -> Matrix {
                   if (k >= static_cast<long>(t.matrices.size())) {
                     throw HorizonError("transition table has no entry for step " +
                                        std::to_string(k));
                   }
                   return t.matrices[static_cast<std::size_t>(k)];
                 }},
      sys.transition);
}

GaussianSampler::GaussianSampler(const Matrix& covariance) {
  const Eigen::LLT<Matrix> llt(symmetrize(covariance));
  if (llt.info() != Eigen::Success) {
    throw ValidationError("covariance is not positive definite");
  }
  factor_ = llt.matrixL();
}

Vector GaussianSampler::operator()(Rng& rng) const {
  std::normal_distribution<double> normal(0.0, 1.0);
  Vector e(factor_.rows());
  for (Eigen::Index i = 0; i < e.size(); ++i) e(i) = normal(rng);
  return factor_ * e;
}

Trajectory simulate(const LtvSystem& sys, long n_steps, Rng& rng) {
  const GaussianSampler sampler(sys.process_noise_cov);
  return simulate(sys, n_steps, rng, [&](long, Rng& r) { return sampler(r); });
}

Trajectory simulate(const LtvSystem& sys, long n_steps, Rng& rng, const NoiseSource& noise) {
  if (n_steps < 1) throw ValidationError("simulate: n_steps must be >= 1");
  sys.validate();
  sys.require_horizon(n_steps);
  Trajectory traj{Matrix(sys.state_dim, n_steps + 1)};
  traj[0] = sys.initial_state;
  for (long k = 0; k < n_steps; ++k) {
    traj[k + 1] = transition_matrix(sys, k) * traj[k] + noise(k, rng);
    if (!traj[k + 1].allFinite()) {
      throw DivergenceError("state diverged at step " + std::to_string(k + 1), k + 1);
    }
  }
  return traj;
}

std::vector<Matrix> parse_matrix_table(const std::string& text) {
  std::vector<Matrix> out;
  std::vector<std::vector<double>> rows;
  auto flush = [&] {
    if (rows.empty()) return;
    const auto n_cols = rows.front().size();
    Matrix a(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(n_cols));
    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (rows[i].size() != n_cols) {
        throw ValidationError("matrix table block " + std::to_string(out.size()) +
                              " has ragged rows");
      }
      for (std::size_t j = 0; j < n_cols; ++j) {
        a(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
      }
    }
    out.push_back(std::move(a));
    rows.clear();
  };

  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) {
      flush();
      continue;
    }
    std::istringstream ls(line);
    std::vector<double> row;
    std::string tok;
    while (ls >> tok) {
      std::size_t used = 0;
      double v = 0.0;
      try {
        v = std::stod(tok, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used != tok.size()) throw ValidationError("matrix table: bad number '" + tok + "'");
      row.push_back(v);
    }
    rows.push_back(std::move(row));
  }
  flush();
  return out;
}

std::vector<Matrix> load_matrix_table(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open matrix table " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_matrix_table(ss.str());
}

}  // namespace dkfsel
