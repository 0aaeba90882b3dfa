#pragma once

#include <Eigen/Dense>
#include <span>
#include <vector>

namespace pcsbl {

enum class Topology { kChain, kLattice };

// Neighbor structure over signal indices. Chains couple index n to n-1 and
// n+1; lattices of Q rows by L columns (stored column-major, so index
// n = l*Q + q) couple each site to its four axis neighbors. Edges are
// truncated, never wrapped.
class NeighborGraph {
 public:
  static NeighborGraph chain(int n);
  static NeighborGraph lattice(int rows, int cols);

  int size() const { return static_cast<int>(offsets_.size()) - 1; }
  Topology topology() const { return topology_; }
  int grid_rows() const { return grid_rows_; }
  int grid_cols() const { return grid_cols_; }

  std::span<const int> neighbors(int i) const {
    return {flat_.data() + offsets_[i], flat_.data() + offsets_[i + 1]};
  }

 private:
  NeighborGraph() = default;

  Topology topology_ = Topology::kChain;
  int grid_rows_ = 0;
  int grid_cols_ = 0;
  std::vector<int> offsets_;  // CSR layout: neighbors of i live in
  std::vector<int> flat_;     // flat_[offsets_[i] .. offsets_[i+1])
};

// Per-site precision seen by the prior: eta[n] = alpha[n] + beta * sum of
// alpha over neighbors of n.
Eigen::VectorXd eta_from_alpha(const NeighborGraph& graph,
                               const Eigen::VectorXd& alpha, double beta);

// Coupled second moments driving the alpha update: omega[n] = m2[n] + beta *
// sum of m2 over neighbors of n. Same stencil as eta_from_alpha; the graph is
// symmetric so gathering from neighbors equals scattering to them.
Eigen::VectorXd omega_from_moments(const NeighborGraph& graph,
                                   const Eigen::VectorXd& m2, double beta);

}  // namespace pcsbl
