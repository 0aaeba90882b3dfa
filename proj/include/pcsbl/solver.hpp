#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "pcsbl/coupling.hpp"
#include "pcsbl/gamp.hpp"
#include "pcsbl/linop.hpp"

namespace pcsbl {

// Hyperparameter precisions are capped here instead of pruning coefficients;
// a coefficient at the cap has prior variance ~1e-10 and is numerically dead.
inline constexpr double kAlphaCap = 1e10;

struct HyperState {
  Eigen::VectorXd alpha;  // per-coefficient precision hyperparameters
  double gamma = 0.0;     // noise precision
  double a = 1.5;         // Gamma hyperprior shape/rate for alpha
  double b = 1e-6;
  double c = 1.0;         // Gamma hyperprior shape/rate for gamma
  double d = 1e-6;
  double beta = 1.0;      // neighbor coupling weight in [0,1]
};

struct SolverConfig {
  double a = 1.5;
  double b = 1e-6;
  double c = 1.0;
  double d = 1e-6;
  double beta = 1.0;
  double alpha_init = 1.0;
  double gamma_init = 0.0;   // 0 means 100 / var(y)
  double gamma_fixed = 0.0;  // > 0 freezes the noise precision (known noise)
  GampOptions inner;
  double outer_tol = 1e-6;  // relative change of x_hat between outer rounds
  int outer_t_max = 100;
  bool cold_start = false;  // true: do not carry mu_x across outer rounds
  std::string trace_path;   // outer-loop CSV when nonempty
};

struct OuterTrace {
  int t = 0;
  double dx_sq = 0.0;  // squared change of x_hat at this round
  double gamma = 0.0;
};

struct RecoveryReport {
  Eigen::VectorXd x_hat;    // final posterior mean
  Eigen::VectorXd phi_hat;  // final posterior variances
  HyperState hyper;
  int outer_iterations = 0;
  int inner_iterations_total = 0;
  bool converged = false;
  double wall_time_s = 0.0;
  std::vector<OuterTrace> trace;
};

// Throws invalid_argument on out-of-range fields.
void check_solver_config(const SolverConfig& cfg);

// Resolves the starting noise precision: gamma_fixed wins, then gamma_init,
// then the default 100 / var(y).
double initial_gamma(const SolverConfig& cfg, const Eigen::VectorXd& y);

// Coefficient second moments mu^2 + phi evaluated from the pseudo-observation
// form: ((r/(1+eta tau))^2 + tau/(1+eta tau)).
Eigen::VectorXd second_moment(const Eigen::VectorXd& r_hat,
                              const Eigen::VectorXd& tau_r,
                              const Eigen::VectorXd& eta);

// alpha[n] = (a-1) / (0.5 omega[n] + b), capped at kAlphaCap.
Eigen::VectorXd update_alpha(const Eigen::VectorXd& omega, double a, double b);

// Objective maximized by the alpha update, used to test the bracket that
// justifies it: sum of (a-1)log(alpha) - b alpha + 0.5 log(eta) - 0.5 eta m2
// with eta = eta_from_alpha(graph, alpha, beta).
double q_alpha_eval(const Eigen::VectorXd& alpha, const Eigen::VectorXd& m2,
                    const NeighborGraph& graph, double beta, double a,
                    double b);

// gamma = (M + 2c - 2) / (2d + sum((y - mu_z)^2 + phi_z)).
double update_gamma(const Eigen::VectorXd& y, const Eigen::VectorXd& mu_z,
                    const Eigen::VectorXd& phi_z, double c, double d);

// Outer EM loop with the message passing engine as E-step: eta from alpha,
// inner solve, alpha from coupled second moments, gamma from the measurement
// posterior. Stops when the relative change of x_hat falls below
// cfg.outer_tol or after cfg.outer_t_max rounds. A diverging inner solve is
// retried with damping 0.5 then 0.25; persistent divergence throws.
RecoveryReport pcsbl_gamp_solve(const SensingOperator& op,
                                const Eigen::VectorXd& y,
                                const NeighborGraph& graph,
                                const SolverConfig& cfg = {});

}  // namespace pcsbl
