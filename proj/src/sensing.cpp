#include "dkfsel/sensing.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>

#include "dkfsel/errors.hpp"

namespace dkfsel {

double SensorNode::variance() const { return r.diagonal().maxCoeff(); }

void SensorNode::validate(int state_dim) const {
  if (h.cols() != state_dim) throw DimensionError("node " + std::to_string(id) + ": H has wrong width");
  if (h.rows() < 1 || h.rows() > state_dim) {
    throw DimensionError("node " + std::to_string(id) + ": H must have 1..m rows");
  }
  if (r.rows() != h.rows() || r.cols() != h.rows()) {
    throw DimensionError("node " + std::to_string(id) + ": R must be p x p");
  }
  if (!(min_eigenvalue(r) > 0.0)) {
    throw ValidationError("node " + std::to_string(id) + ": R is not positive definite");
  }
  if (Eigen::FullPivLU<Matrix>(h).rank() != h.rows()) {
    throw ValidationError("node " + std::to_string(id) + ": H is not full row rank");
  }
  if (!(delay.base >= 0.0) || !(delay.jitter_std >= 0.0)) {
    throw ValidationError("node " + std::to_string(id) + ": delay parameters must be >= 0");
  }
}

void SensorNetwork::validate(int state_dim) const {
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (nodes[i].id != static_cast<int>(i) + 1) {
      throw ValidationError("sensor ids must be contiguous 1..n in order");
    }
    nodes[i].validate(state_dim);
  }
}

const SensorNode& SensorNetwork::by_id(int id) const {
  if (id < 1 || id > static_cast<int>(nodes.size())) {
    throw SelectionError("unknown sensor id " + std::to_string(id));
  }
  return nodes[static_cast<std::size_t>(id - 1)];
}

std::vector<int> SensorNetwork::ids() const {
  std::vector<int> out;
  out.reserve(nodes.size());
  for (const auto& n : nodes) out.push_back(n.id);
  return out;
}

Vector measure(const SensorNode& node, const Eigen::Ref<const Vector>& x, Rng& rng) {
  if (x.size() != node.h.cols()) throw DimensionError("measure: state has wrong dimension");
  const Eigen::LLT<Matrix> llt(node.r);
  std::normal_distribution<double> normal(0.0, 1.0);
  Vector e(node.r.rows());
  for (Eigen::Index i = 0; i < e.size(); ++i) e(i) = normal(rng);
  return node.h * x + Matrix(llt.matrixL()) * e;
}

SensorNetwork sample_network(int n, int state_dim, Range variance, Range delay, Rng& rng) {
  if (n <= 0) throw ValidationError("sample_network: empty network requested");
  if (state_dim < 1) throw ValidationError("sample_network: state_dim must be >= 1");
  if (!(variance.lo >= 0.0 && variance.lo <= variance.hi) ||
      !(delay.lo >= 0.0 && delay.lo <= delay.hi)) {
    throw ValidationError("sample_network: ranges must satisfy 0 <= lo <= hi");
  }
  std::uniform_int_distribution<int> row(0, state_dim - 1);
  std::uniform_real_distribution<double> var_dist(variance.lo, variance.hi);
  std::uniform_real_distribution<double> delay_dist(delay.lo, delay.hi);

  SensorNetwork net;
  net.nodes.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    SensorNode node;
    node.id = i + 1;
    node.h = Matrix::Zero(1, state_dim);
    node.h(0, row(rng)) = 1.0;
    const double v = variance.lo == variance.hi ? variance.lo : var_dist(rng);
    node.r = Matrix::Constant(1, 1, std::max(v, kMinVariance));
    node.delay.base = delay.lo == delay.hi ? delay.lo : delay_dist(rng);
    node.delay.jitter_std = 0.0;
    net.nodes.push_back(std::move(node));
  }
  return net;
}

double effective_delay(const SensorNode& node, Rng& rng) {
  double d = node.delay.base;
  if (node.delay.jitter_std > 0.0) {
    std::normal_distribution<double> jitter(0.0, node.delay.jitter_std);
    d += jitter(rng);
  }
  return std::max(d, 0.0);
}

long delay_to_steps(double delay_s, double ts) {
  if (!(ts > 0.0)) throw ValidationError("delay_to_steps: ts must be > 0");
  if (delay_s <= 0.0) return 0;
  // Snap quotients like 14.499999999999998 onto the intended tie.
  const double q = std::round(delay_s / ts * 1e9) / 1e9;
  return std::lround(q);
}

long delay_steps(const SensorNode& node, double ts, Rng& rng) {
  return delay_to_steps(effective_delay(node, rng), ts);
}

SensorNetwork load_network(const std::filesystem::path& path, int state_dim) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open network file " + path.string());
  SensorNetwork net;
  std::string line;
  long line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::istringstream ls(line);
    int id = 0;
    int row = 0;
    double var = 0.0;
    double delay = 0.0;
    double jitter = 0.0;
    if (!(ls >> id >> row >> var >> delay >> jitter)) {
      throw ValidationError("network file line " + std::to_string(line_no) + " is malformed");
    }
    if (row < 1 || row > state_dim) {
      throw ValidationError("network file line " + std::to_string(line_no) +
                            ": h_row_index out of range");
    }
    SensorNode node;
    node.id = id;
    node.h = Matrix::Zero(1, state_dim);
    node.h(0, row - 1) = 1.0;
    node.r = Matrix::Constant(1, 1, var);
    node.delay = {delay, jitter};
    net.nodes.push_back(std::move(node));
  }
  net.validate(state_dim);
  return net;
}

void save_network(const SensorNetwork& net, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write network file " + path.string());
  for (const auto& n : net.nodes) {
    Eigen::Index row = 0;
    if (n.h.rows() != 1 || n.h.row(0).cwiseAbs().maxCoeff(&row) != 1.0) {
      throw ValidationError("save_network: only selector-row nodes can be written");
    }
    char buf[160];
    std::snprintf(buf, sizeof buf, "%d %ld %.17g %.17g %.17g\n", n.id,
                  static_cast<long>(row) + 1, n.r(0, 0), n.delay.base, n.delay.jitter_std);
    out << buf;
  }
  if (!out) throw IoError("failed writing network file " + path.string());
}

}  // namespace dkfsel
