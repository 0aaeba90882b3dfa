#pragma once

#include <Eigen/Dense>
#include <string>
#include <utility>

#include "pcsbl/linop.hpp"

namespace pcsbl {

struct GampOptions {
  double epsilon = 0.0;    // stop when sum |d mu|^2 <= epsilon; 0 means 1e-8*n
  int k_max = 200;
  double damping = 1.0;    // rho in (0,1] applied to s_hat and mu_x; 1 = none
  std::string trace_path;  // per-iteration CSV when nonempty
};

// Message quantities after the most recent iteration.
struct GampState {
  Eigen::VectorXd mu_x, phi_x;   // coefficient posterior mean / variance
  Eigen::VectorXd r_hat, tau_r;  // pseudo-observation and its variance
  Eigen::VectorXd z_hat, p_hat, tau_p;  // measurement-side messages
  Eigen::VectorXd s_hat, tau_s;
  int k = 0;  // completed iterations
};

struct GampResult {
  GampState state;
  bool converged = false;
  bool diverged = false;  // non-finite state hit; state holds last finite one
  int iterations = 0;
  Eigen::VectorXd mu_z, phi_z;  // posterior of z = A x at the final p_hat
};

// Prior-side shrinkage for a Gaussian prior with precision eta:
//   mu = r / (1 + eta tau),  phi = tau / (1 + eta tau).
std::pair<double, double> g_in(double r_hat, double tau_r, double eta);

// Likelihood-side update for Gaussian noise with precision gamma:
//   s = gamma (y - p) / (1 + gamma tau),  tau_s = gamma / (1 + gamma tau).
std::pair<double, double> g_out(double p_hat, double tau_p, double y,
                                double gamma);

// Posterior mean and variance of a measurement entry z given its incoming
// message (p_hat, tau_p) and the observation y:
//   mu_z = (tau_p gamma y + p_hat) / (1 + gamma tau_p),
//   phi_z = tau_p / (1 + gamma tau_p).
std::pair<double, double> output_posterior(double p_hat, double tau_p,
                                           double y, double gamma);

// Runs the four-step message passing loop until the squared change of mu_x
// drops below epsilon or k_max iterations elapse. mu_init, when given, seeds
// mu_x (warm start); phi_x always starts at the prior variance 1/eta and
// s_hat at zero.
GampResult gamp_run(const SensingOperator& op, const Eigen::VectorXd& y,
                    const Eigen::VectorXd& eta, double gamma,
                    const GampOptions& opts = {},
                    const Eigen::VectorXd* mu_init = nullptr);

}  // namespace pcsbl
