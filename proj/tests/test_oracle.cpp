#include <cmath>

#include "doctest.h"
#include "pcsbl/oracle.hpp"
#include "pcsbl/rng.hpp"
#include "pcsbl/signals.hpp"
#include "test_util.hpp"

using namespace pcsbl;

TEST_SUITE_BEGIN("oracle");

TEST_CASE("identity operator posterior in closed form") {
  const Eigen::MatrixXd a = Eigen::MatrixXd::Identity(3, 3);
  Eigen::VectorXd y(3);
  y << 1.0, -2.0, 0.5;
  const auto post = exact_posterior(a, y, Eigen::VectorXd::Ones(3), 1.0);
  CHECK(testutil::max_abs_diff(post.mu, 0.5 * y) <= 1e-15);
  CHECK((post.sigma - 0.5 * Eigen::MatrixXd::Identity(3, 3))
            .cwiseAbs()
            .maxCoeff() <= 1e-15);
}

TEST_CASE("scalar posterior") {
  Eigen::MatrixXd a(1, 1);
  a << 1.0;
  Eigen::VectorXd y(1), eta(1);
  y << 3.0;
  eta << 1.0;
  const auto post = exact_posterior(a, y, eta, 1.0);
  CHECK(post.mu[0] == doctest::Approx(1.5).epsilon(1e-15));
  CHECK(post.sigma(0, 0) == doctest::Approx(0.5).epsilon(1e-15));
}

TEST_CASE("posterior solves the regularized normal equations") {
  Rng rng(31);
  Eigen::MatrixXd a(8, 12);
  for (int i = 0; i < 8; ++i)
    for (int j = 0; j < 12; ++j) a(i, j) = rng.gauss();
  Eigen::VectorXd y(8), eta(12);
  for (int i = 0; i < 8; ++i) y[i] = rng.gauss();
  for (int j = 0; j < 12; ++j) eta[j] = 0.2 + rng.uniform();
  const double gamma = 3.0;

  const auto post = exact_posterior(a, y, eta, gamma);

  Eigen::MatrixXd precision = gamma * a.transpose() * a;
  precision.diagonal() += eta;
  const Eigen::VectorXd rhs = gamma * a.transpose() * y;
  const Eigen::VectorXd direct = precision.colPivHouseholderQr().solve(rhs);
  CHECK(testutil::max_abs_diff(post.mu, direct) <= 1e-10);
  CHECK((precision * post.mu - rhs).norm() <= 1e-10 * rhs.norm());

  CHECK((post.sigma - post.sigma.transpose()).cwiseAbs().maxCoeff() <= 1e-10);
  for (int j = 0; j < 12; ++j) CHECK(post.sigma(j, j) > 0.0);
  CHECK((precision * post.sigma - Eigen::MatrixXd::Identity(12, 12))
            .cwiseAbs()
            .maxCoeff() <= 1e-9);
}

TEST_CASE("residual second moment matches Monte Carlo sampling") {
  Rng rng(77);
  const int m = 5, n = 8;
  Eigen::MatrixXd a(m, n);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < n; ++j) a(i, j) = rng.gauss();
  Eigen::VectorXd y(m), eta(n);
  for (int i = 0; i < m; ++i) y[i] = rng.gauss();
  for (int j = 0; j < n; ++j) eta[j] = 0.5 + rng.uniform();
  const auto post = exact_posterior(a, y, eta, 2.0);

  const Eigen::MatrixXd a_sigma = a * post.sigma;
  const double closed_form =
      (y - a * post.mu).squaredNorm() + a_sigma.cwiseProduct(a).sum();

  const Eigen::MatrixXd chol = post.sigma.llt().matrixL();
  double acc = 0.0;
  const int samples = 100000;
  for (int s = 0; s < samples; ++s) {
    Eigen::VectorXd xi(n);
    for (int j = 0; j < n; ++j) xi[j] = rng.gauss();
    const Eigen::VectorXd x = post.mu + chol * xi;
    acc += (y - a * x).squaredNorm();
  }
  acc /= samples;
  CHECK(std::abs(acc - closed_form) <= 0.01 * closed_form);
}

TEST_CASE("one exact outer round on a 2-coefficient toy") {
  const auto op = SensingOperator::dense(Eigen::MatrixXd::Identity(2, 2));
  Eigen::VectorXd y(2);
  y << 1.0, 0.0;
  SolverConfig cfg;
  cfg.beta = 0.0;
  cfg.gamma_fixed = 1.0;
  cfg.outer_t_max = 1;
  const auto rep = pcsbl_em_solve(op, y, NeighborGraph::chain(2), cfg);

  // posterior is mu = y/2, sigma = I/2; moments (0.75, 0.5) give these alphas
  CHECK(std::abs(rep.hyper.alpha[0] - 1.3333297777872593) <= 1e-12);
  CHECK(std::abs(rep.hyper.alpha[1] - 1.9999920000320002) <= 1e-12);
  CHECK(testutil::max_abs_diff(rep.x_hat, 0.5 * y) <= 1e-15);
  CHECK(rep.hyper.gamma == 1.0);
  CHECK(rep.outer_iterations == 1);
}

TEST_CASE("learned noise precision uses the exact residual moment") {
  const int m = 10, n = 6;
  const auto op = SensingOperator::gaussian_dense(m, n, 8, true);
  Rng rng(9);
  Eigen::VectorXd y(m);
  for (int i = 0; i < m; ++i) y[i] = rng.gauss();

  SolverConfig cfg;
  cfg.outer_t_max = 1;
  cfg.gamma_init = 4.0;
  const auto rep = pcsbl_em_solve(op, y, NeighborGraph::chain(n), cfg);

  const Eigen::VectorXd eta = eta_from_alpha(
      NeighborGraph::chain(n), Eigen::VectorXd::Constant(n, cfg.alpha_init),
      cfg.beta);
  const auto post = exact_posterior(op.materialize(), y, eta, 4.0);
  const Eigen::MatrixXd a_sigma = op.materialize() * post.sigma;
  const double residual = (y - op.materialize() * post.mu).squaredNorm() +
                          a_sigma.cwiseProduct(op.materialize()).sum();
  const double want = (m + 2.0 * cfg.c - 2.0) / (2.0 * cfg.d + residual);
  CHECK(rep.hyper.gamma == doctest::Approx(want).epsilon(1e-14));
}

TEST_CASE("structured operators materialize only up to the size guard") {
  const auto big = SensingOperator::subsampled_hadamard(16, 8192, 1);
  CHECK_THROWS_AS(
      exact_posterior(big, Eigen::VectorXd::Zero(16),
                      Eigen::VectorXd::Ones(8192), 1.0),
      std::invalid_argument);

  const auto ok = SensingOperator::subsampled_hadamard(16, 64, 1);
  const auto post = exact_posterior(ok, Eigen::VectorXd::Ones(16),
                                    Eigen::VectorXd::Ones(64), 1.0);
  CHECK(post.mu.size() == 64);
}

TEST_CASE("message passing moments track the exact ones through one round") {
  const int m = 48, n = 32;
  const auto op = SensingOperator::gaussian_dense(m, n, 15, true);
  const Eigen::VectorXd x = gen_block_sparse(n, 8, 2, 16);
  const auto noisy = add_noise(op.apply(x), 25.0, 17);
  const auto graph = NeighborGraph::chain(n);

  const double beta = 1.0, gamma = 1.0 / noisy.sigma2;
  const Eigen::VectorXd eta =
      eta_from_alpha(graph, Eigen::VectorXd::Ones(n), beta);

  GampOptions opts;
  opts.epsilon = 1e-14;
  opts.k_max = 2000;
  const auto inner = gamp_run(op, noisy.y, eta, gamma, opts);
  REQUIRE(inner.converged);
  const Eigen::VectorXd m2_mp =
      second_moment(inner.state.r_hat, inner.state.tau_r, eta);

  const auto post = exact_posterior(op.materialize(), noisy.y, eta, gamma);
  const Eigen::VectorXd m2_exact =
      post.mu.array().square().matrix() + post.sigma.diagonal();

  const Eigen::VectorXd alpha_mp =
      update_alpha(omega_from_moments(graph, m2_mp, beta), 1.5, 1e-6);
  const Eigen::VectorXd alpha_exact =
      update_alpha(omega_from_moments(graph, m2_exact, beta), 1.5, 1e-6);
  CHECK(testutil::rel_l2(inner.state.mu_x, post.mu) <= 0.05);
  // second moments inherit the message passing variance approximation, so
  // the weight updates drift more than the means do
  CHECK(testutil::rel_l2(alpha_mp, alpha_exact) <= 0.2);
}

TEST_CASE("both solvers recover the same noiseless signal") {
  const int n = 64, m = 40;
  const auto op = SensingOperator::gaussian_dense(m, n, 70, true);
  const Eigen::VectorXd x = gen_block_sparse(n, 12, 3, 71);
  const auto graph = NeighborGraph::chain(n);
  SolverConfig cfg;
  cfg.gamma_fixed = 1e8;

  const auto gamp_rep = pcsbl_gamp_solve(op, op.apply(x), graph, cfg);
  const auto em_rep = pcsbl_em_solve(op, op.apply(x), graph, cfg);
  CHECK(success(x, gamp_rep.x_hat));
  CHECK(success(x, em_rep.x_hat));
  CHECK(testutil::rel_l2(gamp_rep.x_hat, em_rep.x_hat) <= 1e-2);
}

TEST_CASE("input validation") {
  Eigen::MatrixXd a = Eigen::MatrixXd::Identity(3, 3);
  const Eigen::VectorXd y = Eigen::VectorXd::Ones(3);
  const Eigen::VectorXd eta = Eigen::VectorXd::Ones(3);
  CHECK_THROWS_AS(exact_posterior(a, Eigen::VectorXd::Ones(2), eta, 1.0),
                  std::invalid_argument);
  CHECK_THROWS_AS(exact_posterior(a, y, Eigen::VectorXd::Ones(2), 1.0),
                  std::invalid_argument);
  CHECK_THROWS_AS(exact_posterior(a, y, Eigen::VectorXd::Zero(3), 1.0),
                  std::invalid_argument);
  CHECK_THROWS_AS(exact_posterior(a, y, eta, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(
      pcsbl_em_solve(SensingOperator::dense(a), y, NeighborGraph::chain(2)),
      std::invalid_argument);
}

TEST_SUITE_END();
