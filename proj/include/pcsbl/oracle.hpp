#pragma once

#include <Eigen/Dense>

#include "pcsbl/coupling.hpp"
#include "pcsbl/linop.hpp"
#include "pcsbl/solver.hpp"

namespace pcsbl {

struct ExactPosterior {
  Eigen::VectorXd mu;     // gamma * sigma * A' y
  Eigen::MatrixXd sigma;  // (gamma A'A + diag(eta))^-1
};

// Closed-form Gaussian posterior via a symmetric positive definite
// factorization. Throws on factorization failure rather than regularizing.
ExactPosterior exact_posterior(const Eigen::MatrixXd& a,
                               const Eigen::VectorXd& y,
                               const Eigen::VectorXd& eta, double gamma);

// Convenience overload that materializes the operator first; structured
// kinds are accepted up to 4096 columns.
ExactPosterior exact_posterior(const SensingOperator& op,
                               const Eigen::VectorXd& y,
                               const Eigen::VectorXd& eta, double gamma);

// Same outer EM loop as pcsbl_gamp_solve but with the exact posterior as the
// E-step: second moments mu^2 + diag(sigma), noise update from the exact
// residual moment |y - A mu|^2 + trace terms. Cubic in the signal length per
// round; exists as a correctness and runtime baseline.
RecoveryReport pcsbl_em_solve(const SensingOperator& op,
                              const Eigen::VectorXd& y,
                              const NeighborGraph& graph,
                              const SolverConfig& cfg = {});

}  // namespace pcsbl
