#include "pcsbl/gamp.hpp"

#include <cmath>
#include <fstream>
#include <stdexcept>

namespace pcsbl {

namespace {

constexpr double kVarianceFloor = 1e-12;

bool state_ok(const GampState& st) {
  return st.mu_x.allFinite() && st.phi_x.allFinite() && st.r_hat.allFinite() &&
         st.tau_r.allFinite() && st.p_hat.allFinite() && st.tau_p.allFinite() &&
         st.s_hat.allFinite() && st.tau_s.allFinite() &&
         (st.phi_x.array() > 0).all() && (st.tau_r.array() > 0).all() &&
         (st.tau_p.array() > 0).all() && (st.tau_s.array() > 0).all();
}

}  // namespace

std::pair<double, double> g_in(double r_hat, double tau_r, double eta) {
  if (tau_r <= 0) throw std::invalid_argument("g_in: tau_r must be positive");
  if (eta < 0) throw std::invalid_argument("g_in: eta must be nonnegative");
  const double denom = 1.0 + eta * tau_r;
  return {r_hat / denom, tau_r / denom};
}

std::pair<double, double> g_out(double p_hat, double tau_p, double y,
                                double gamma) {
  if (tau_p <= 0) throw std::invalid_argument("g_out: tau_p must be positive");
  if (gamma <= 0) throw std::invalid_argument("g_out: gamma must be positive");
  const double denom = 1.0 + gamma * tau_p;
  return {gamma * (y - p_hat) / denom, gamma / denom};
}

std::pair<double, double> output_posterior(double p_hat, double tau_p,
                                           double y, double gamma) {
  if (tau_p <= 0)
    throw std::invalid_argument("output_posterior: tau_p must be positive");
  if (gamma <= 0)
    throw std::invalid_argument("output_posterior: gamma must be positive");
  const double denom = 1.0 + gamma * tau_p;
  return {(tau_p * gamma * y + p_hat) / denom, tau_p / denom};
}

GampResult gamp_run(const SensingOperator& op, const Eigen::VectorXd& y,
                    const Eigen::VectorXd& eta, double gamma,
                    const GampOptions& opts, const Eigen::VectorXd* mu_init) {
  const int m = op.rows();
  const int n = op.cols();
  if (y.size() != m) throw std::invalid_argument("gamp_run: y length != m");
  if (eta.size() != n) throw std::invalid_argument("gamp_run: eta length != n");
  if ((eta.array() <= 0).any())
    throw std::invalid_argument("gamp_run: eta must be entrywise positive");
  if (gamma <= 0) throw std::invalid_argument("gamp_run: gamma must be positive");
  if (opts.k_max < 1) throw std::invalid_argument("gamp_run: k_max must be >= 1");
  if (opts.damping <= 0 || opts.damping > 1)
    throw std::invalid_argument("gamp_run: damping must be in (0,1]");
  if (opts.epsilon < 0)
    throw std::invalid_argument("gamp_run: epsilon must be >= 0");
  if (mu_init && mu_init->size() != n)
    throw std::invalid_argument("gamp_run: mu_init length != n");

  const double epsilon = opts.epsilon > 0 ? opts.epsilon : 1e-8 * n;
  const double rho = opts.damping;

  GampResult res;
  GampState& st = res.state;
  st.mu_x = mu_init ? *mu_init : Eigen::VectorXd::Zero(n);
  st.phi_x = eta.cwiseInverse();
  st.s_hat = Eigen::VectorXd::Zero(m);
  st.tau_s = Eigen::VectorXd::Constant(m, gamma);
  st.z_hat = Eigen::VectorXd::Zero(m);
  st.p_hat = Eigen::VectorXd::Zero(m);
  st.tau_p = Eigen::VectorXd::Constant(m, 1.0);
  st.r_hat = st.mu_x;
  st.tau_r = st.phi_x;

  std::ofstream trace;
  if (!opts.trace_path.empty()) {
    trace.open(opts.trace_path);
    if (!trace)
      throw std::runtime_error("gamp_run: cannot open trace file " +
                               opts.trace_path);
    trace << "k,delta_mu_sq,residual_norm\n";
  }

  GampState snapshot = st;
  for (int k = 1; k <= opts.k_max; ++k) {
    snapshot = st;

    st.z_hat = op.apply(st.mu_x);
    st.tau_p = op.apply_sq(st.phi_x).cwiseMax(kVarianceFloor);
    st.p_hat = st.z_hat - st.tau_p.cwiseProduct(st.s_hat);

    Eigen::VectorXd s_new(m);
    for (int i = 0; i < m; ++i) {
      auto [s, ts] = g_out(st.p_hat[i], st.tau_p[i], y[i], gamma);
      s_new[i] = s;
      st.tau_s[i] = ts;
    }
    st.s_hat = rho * s_new + (1.0 - rho) * st.s_hat;

    st.tau_r = op.apply_sq_adjoint(st.tau_s).cwiseMax(kVarianceFloor)
                   .cwiseInverse();
    st.r_hat = st.mu_x + st.tau_r.cwiseProduct(op.apply_adjoint(st.s_hat));

    Eigen::VectorXd mu_new(n);
    for (int i = 0; i < n; ++i) {
      auto [mu, phi] = g_in(st.r_hat[i], st.tau_r[i], eta[i]);
      mu_new[i] = mu;
      st.phi_x[i] = phi;
    }
    mu_new = rho * mu_new + (1.0 - rho) * st.mu_x;
    const double delta = (mu_new - st.mu_x).squaredNorm();
    st.mu_x = mu_new;
    st.k = k;
    res.iterations = k;

    if (!state_ok(st)) {
      st = snapshot;
      res.diverged = true;
      break;
    }
    if (trace.is_open())
      trace << k << ',' << delta << ',' << (y - st.z_hat).norm() << '\n';
    if (delta <= epsilon) {
      res.converged = true;
      break;
    }
  }

  res.mu_z.resize(m);
  res.phi_z.resize(m);
  for (int i = 0; i < m; ++i) {
    auto [mz, pz] = output_posterior(st.p_hat[i], st.tau_p[i], y[i], gamma);
    res.mu_z[i] = mz;
    res.phi_z[i] = pz;
  }
  return res;
}

}  // namespace pcsbl
