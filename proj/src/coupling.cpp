#include "pcsbl/coupling.hpp"

#include <stdexcept>

namespace pcsbl {

namespace {

Eigen::VectorXd coupled_sum(const NeighborGraph& graph,
                            const Eigen::VectorXd& v, double beta,
                            const char* what) {
  if (v.size() != graph.size())
    throw std::invalid_argument(std::string(what) + ": dimension mismatch");
  Eigen::VectorXd out(v.size());
  for (int i = 0; i < graph.size(); ++i) {
    double acc = v[i];
    for (int j : graph.neighbors(i)) acc += beta * v[j];
    out[i] = acc;
  }
  return out;
}

}  // namespace

NeighborGraph NeighborGraph::chain(int n) {
  if (n < 1) throw std::invalid_argument("chain: size must be >= 1");
  NeighborGraph g;
  g.topology_ = Topology::kChain;
  g.grid_rows_ = n;
  g.grid_cols_ = 1;
  g.offsets_.reserve(n + 1);
  g.flat_.reserve(n > 1 ? 2 * (n - 1) : 0);
  g.offsets_.push_back(0);
  for (int i = 0; i < n; ++i) {
    if (i > 0) g.flat_.push_back(i - 1);
    if (i + 1 < n) g.flat_.push_back(i + 1);
    g.offsets_.push_back(static_cast<int>(g.flat_.size()));
  }
  return g;
}

NeighborGraph NeighborGraph::lattice(int rows, int cols) {
  if (rows < 1 || cols < 1)
    throw std::invalid_argument("lattice: dims must be >= 1");
  NeighborGraph g;
  g.topology_ = Topology::kLattice;
  g.grid_rows_ = rows;
  g.grid_cols_ = cols;
  const int n = rows * cols;
  g.offsets_.reserve(n + 1);
  g.flat_.reserve(4 * n);
  g.offsets_.push_back(0);
  for (int l = 0; l < cols; ++l) {
    for (int q = 0; q < rows; ++q) {
      if (q > 0) g.flat_.push_back(l * rows + q - 1);
      if (q + 1 < rows) g.flat_.push_back(l * rows + q + 1);
      if (l > 0) g.flat_.push_back((l - 1) * rows + q);
      if (l + 1 < cols) g.flat_.push_back((l + 1) * rows + q);
      g.offsets_.push_back(static_cast<int>(g.flat_.size()));
    }
  }
  return g;
}

Eigen::VectorXd eta_from_alpha(const NeighborGraph& graph,
                               const Eigen::VectorXd& alpha, double beta) {
  return coupled_sum(graph, alpha, beta, "eta_from_alpha");
}

Eigen::VectorXd omega_from_moments(const NeighborGraph& graph,
                                   const Eigen::VectorXd& m2, double beta) {
  return coupled_sum(graph, m2, beta, "omega_from_moments");
}

}  // namespace pcsbl
