#include "pcsbl/solver.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <stdexcept>

namespace pcsbl {

void check_solver_config(const SolverConfig& cfg) {
  if (cfg.a <= 1.0)
    throw std::invalid_argument("solver: a must exceed 1");
  if (cfg.b < 0 || cfg.c <= 0 || cfg.d < 0)
    throw std::invalid_argument("solver: b, d must be >= 0 and c > 0");
  if (cfg.beta < 0 || cfg.beta > 1)
    throw std::invalid_argument("solver: beta must lie in [0,1]");
  if (cfg.alpha_init <= 0)
    throw std::invalid_argument("solver: alpha_init must be positive");
  if (cfg.gamma_init < 0 || cfg.gamma_fixed < 0)
    throw std::invalid_argument("solver: gamma values must be >= 0");
  if (cfg.outer_tol < 0)
    throw std::invalid_argument("solver: outer_tol must be >= 0");
  if (cfg.outer_t_max < 1)
    throw std::invalid_argument("solver: outer_t_max must be >= 1");
}

double initial_gamma(const SolverConfig& cfg, const Eigen::VectorXd& y) {
  if (cfg.gamma_fixed > 0) return cfg.gamma_fixed;
  if (cfg.gamma_init > 0) return cfg.gamma_init;
  const double mean = y.mean();
  double var = (y.array() - mean).square().sum() /
               static_cast<double>(y.size());
  if (var <= 0) var = 1.0;  // degenerate all-constant measurements
  return 100.0 / var;
}

Eigen::VectorXd second_moment(const Eigen::VectorXd& r_hat,
                              const Eigen::VectorXd& tau_r,
                              const Eigen::VectorXd& eta) {
  if (r_hat.size() != tau_r.size() || r_hat.size() != eta.size())
    throw std::invalid_argument("second_moment: length mismatch");
  if ((tau_r.array() <= 0).any())
    throw std::invalid_argument("second_moment: tau_r must be positive");
  if ((eta.array() < 0).any())
    throw std::invalid_argument("second_moment: eta must be nonnegative");
  const Eigen::ArrayXd denom = 1.0 + eta.array() * tau_r.array();
  return ((r_hat.array() / denom).square() + tau_r.array() / denom).matrix();
}

Eigen::VectorXd update_alpha(const Eigen::VectorXd& omega, double a,
                             double b) {
  if (a <= 1.0) throw std::invalid_argument("update_alpha: a must exceed 1");
  if (b < 0) throw std::invalid_argument("update_alpha: b must be >= 0");
  if ((omega.array() < 0).any())
    throw std::invalid_argument("update_alpha: omega must be nonnegative");
  return ((a - 1.0) / (0.5 * omega.array() + b)).min(kAlphaCap).matrix();
}

double q_alpha_eval(const Eigen::VectorXd& alpha, const Eigen::VectorXd& m2,
                    const NeighborGraph& graph, double beta, double a,
                    double b) {
  if ((alpha.array() <= 0).any())
    throw std::invalid_argument("q_alpha_eval: alpha must be positive");
  const Eigen::VectorXd eta = eta_from_alpha(graph, alpha, beta);
  return ((a - 1.0) * alpha.array().log() - b * alpha.array() +
          0.5 * eta.array().log() - 0.5 * eta.array() * m2.array())
      .sum();
}

double update_gamma(const Eigen::VectorXd& y, const Eigen::VectorXd& mu_z,
                    const Eigen::VectorXd& phi_z, double c, double d) {
  if (y.size() != mu_z.size() || y.size() != phi_z.size())
    throw std::invalid_argument("update_gamma: length mismatch");
  if ((phi_z.array() <= 0).any())
    throw std::invalid_argument("update_gamma: phi_z must be positive");
  const double m = static_cast<double>(y.size());
  const double residual = ((y - mu_z).array().square() + phi_z.array()).sum();
  return (m + 2.0 * c - 2.0) / (2.0 * d + residual);
}

RecoveryReport pcsbl_gamp_solve(const SensingOperator& op,
                                const Eigen::VectorXd& y,
                                const NeighborGraph& graph,
                                const SolverConfig& cfg) {
  check_solver_config(cfg);
  if (y.size() != op.rows())
    throw std::invalid_argument("pcsbl_gamp_solve: y length != rows");
  if (graph.size() != op.cols())
    throw std::invalid_argument("pcsbl_gamp_solve: graph size != cols");

  const auto start = std::chrono::steady_clock::now();
  const int n = op.cols();

  RecoveryReport rep;
  rep.hyper.a = cfg.a;
  rep.hyper.b = cfg.b;
  rep.hyper.c = cfg.c;
  rep.hyper.d = cfg.d;
  rep.hyper.beta = cfg.beta;
  rep.hyper.alpha = Eigen::VectorXd::Constant(n, cfg.alpha_init);
  rep.hyper.gamma = initial_gamma(cfg, y);

  std::ofstream trace;
  if (!cfg.trace_path.empty()) {
    trace.open(cfg.trace_path);
    if (!trace)
      throw std::runtime_error("pcsbl_gamp_solve: cannot open trace file " +
                               cfg.trace_path);
    trace << "t,dx_sq,gamma\n";
  }

  Eigen::VectorXd x_prev = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd mu_warm;
  for (int t = 1; t <= cfg.outer_t_max; ++t) {
    const Eigen::VectorXd eta = eta_from_alpha(graph, rep.hyper.alpha,
                                               cfg.beta);

    GampResult inner;
    const Eigen::VectorXd* warm =
        (!cfg.cold_start && mu_warm.size() == n) ? &mu_warm : nullptr;
    const double retries[] = {cfg.inner.damping, 0.5, 0.25};
    bool solved = false;
    double rho_prev = -1.0;
    for (double rho : retries) {
      if (rho == rho_prev || rho > cfg.inner.damping) continue;
      rho_prev = rho;
      GampOptions opts = cfg.inner;
      opts.damping = rho;
      inner = gamp_run(op, y, eta, rep.hyper.gamma, opts, warm);
      rep.inner_iterations_total += inner.iterations;
      if (!inner.diverged) {
        solved = true;
        break;
      }
    }
    if (!solved)
      throw std::runtime_error(
          "pcsbl_gamp_solve: inner engine diverged at outer round " +
          std::to_string(t) + " (gamma " + std::to_string(rep.hyper.gamma) +
          ") despite damping retries");

    const Eigen::VectorXd m2 =
        second_moment(inner.state.r_hat, inner.state.tau_r, eta);
    const Eigen::VectorXd omega = omega_from_moments(graph, m2, cfg.beta);
    rep.hyper.alpha = update_alpha(omega, cfg.a, cfg.b);
    if (cfg.gamma_fixed <= 0)
      rep.hyper.gamma = update_gamma(y, inner.mu_z, inner.phi_z, cfg.c, cfg.d);

    rep.x_hat = inner.state.mu_x;
    rep.phi_hat = inner.state.phi_x;
    rep.outer_iterations = t;

    const double dx = (rep.x_hat - x_prev).norm();
    rep.trace.push_back({t, dx * dx, rep.hyper.gamma});
    if (trace.is_open())
      trace << t << ',' << dx * dx << ',' << rep.hyper.gamma << '\n';

    if (t >= 2) {
      const double denom = x_prev.norm();
      const bool settled = denom > 0 ? dx / denom <= cfg.outer_tol : dx == 0;
      if (settled) {
        rep.converged = true;
        break;
      }
    }
    x_prev = rep.x_hat;
    if (!cfg.cold_start) mu_warm = rep.x_hat;
  }

  rep.wall_time_s = std::chrono::duration<double>(
                        std::chrono::steady_clock::now() - start)
                        .count();
  return rep;
}

}  // namespace pcsbl
