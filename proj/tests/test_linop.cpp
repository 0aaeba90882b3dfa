#include <chrono>
#include <cmath>

#include "doctest.h"
#include "pcsbl/linop.hpp"
#include "pcsbl/rng.hpp"
#include "test_util.hpp"

using namespace pcsbl;

namespace {

Eigen::VectorXd random_vec(Rng& rng, int n) {
  Eigen::VectorXd v(n);
  for (int i = 0; i < n; ++i) v[i] = rng.gauss();
  return v;
}

void check_adjoint_identity(const SensingOperator& op, int probes) {
  Rng rng(99);
  for (int p = 0; p < probes; ++p) {
    const Eigen::VectorXd x = random_vec(rng, op.cols());
    const Eigen::VectorXd v = random_vec(rng, op.rows());
    const double lhs = op.apply(x).dot(v);
    const double rhs = x.dot(op.apply_adjoint(v));
    CHECK(std::abs(lhs - rhs) <= 1e-12 * std::max(1.0, std::abs(lhs)));
  }
}

void check_squared_against_materialized(const SensingOperator& op) {
  const Eigen::MatrixXd sq = op.materialize().cwiseProduct(op.materialize());
  Rng rng(7);
  for (int p = 0; p < 20; ++p) {
    const Eigen::VectorXd phi = random_vec(rng, op.cols()).cwiseAbs();
    const Eigen::VectorXd tau = random_vec(rng, op.rows()).cwiseAbs();
    CHECK(testutil::max_abs_diff(op.apply_sq(phi), sq * phi) <= 1e-12);
    CHECK(testutil::max_abs_diff(op.apply_sq_adjoint(tau),
                                 sq.transpose() * tau) <= 1e-12);
  }
}

}  // namespace

TEST_SUITE_BEGIN("linop");

TEST_CASE("apply on the identity and a 2-point transform") {
  const auto id = SensingOperator::dense(Eigen::MatrixXd::Identity(3, 3));
  Eigen::VectorXd x(3);
  x << 1, 2, 3;
  CHECK(testutil::max_abs_diff(id.apply(x), x) == 0.0);

  Eigen::MatrixXd h2(2, 2);
  h2 << 1, 1, 1, -1;
  h2 /= std::sqrt(2.0);
  Eigen::VectorXd ones2 = Eigen::VectorXd::Ones(2);
  const Eigen::VectorXd out = SensingOperator::dense(h2).apply(ones2);
  CHECK(std::abs(out[0] - std::sqrt(2.0)) <= 1e-15);
  CHECK(std::abs(out[1]) <= 1e-15);
}

TEST_CASE("apply_adjoint on the identity and a row selector") {
  const auto id = SensingOperator::dense(Eigen::MatrixXd::Identity(3, 3));
  Eigen::VectorXd v(3);
  v << 4, 5, 6;
  CHECK(testutil::max_abs_diff(id.apply_adjoint(v), v) == 0.0);

  Eigen::MatrixXd sel(2, 3);
  sel << 1, 0, 0, 0, 1, 0;
  Eigen::VectorXd w(2);
  w << 2, 3;
  Eigen::VectorXd want(3);
  want << 2, 3, 0;
  CHECK(testutil::max_abs_diff(SensingOperator::dense(sel).apply_adjoint(w),
                               want) == 0.0);
}

TEST_CASE("adjoint identity holds for every kind on 100 probes") {
  check_adjoint_identity(SensingOperator::gaussian_dense(5, 8, 21, false), 100);
  check_adjoint_identity(SensingOperator::kronecker_gaussian(3, 4, 5, 22, false),
                         100);
  check_adjoint_identity(SensingOperator::subsampled_hadamard(20, 64, 23), 100);
}

TEST_CASE("apply_sq closed forms") {
  const auto id = SensingOperator::dense(Eigen::MatrixXd::Identity(3, 3));
  Eigen::VectorXd phi(3);
  phi << 1, 2, 3;
  CHECK(testutil::max_abs_diff(id.apply_sq(phi), phi) == 0.0);

  Eigen::MatrixXd h2(2, 2);
  h2 << 1, 1, 1, -1;
  h2 /= std::sqrt(2.0);
  Eigen::VectorXd phi2 = Eigen::VectorXd::Constant(2, 2.0);
  CHECK(testutil::max_abs_diff(SensingOperator::dense(h2).apply_sq(phi2), phi2)
        <= 1e-15);

  // constant-magnitude rows collapse to (sum phi)/n per row
  const auto had = SensingOperator::subsampled_hadamard(4, 8, 5);
  Eigen::VectorXd phi8 = Eigen::VectorXd::LinSpaced(8, 0.5, 4.0);
  const Eigen::VectorXd got = had.apply_sq(phi8);
  for (int i = 0; i < 4; ++i)
    CHECK(std::abs(got[i] - phi8.sum() / 8.0) <= 1e-15);
  check_squared_against_materialized(had);
}

TEST_CASE("apply_sq_adjoint matches a brute-force double loop") {
  const auto op = SensingOperator::gaussian_dense(6, 10, 33, false);
  const Eigen::MatrixXd a = op.materialize();
  Rng rng(4);
  const Eigen::VectorXd tau = random_vec(rng, 6).cwiseAbs();
  Eigen::VectorXd want = Eigen::VectorXd::Zero(10);
  for (int n = 0; n < 10; ++n)
    for (int m = 0; m < 6; ++m) want[n] += a(m, n) * a(m, n) * tau[m];
  CHECK(testutil::max_abs_diff(op.apply_sq_adjoint(tau), want) <= 1e-12);

  Eigen::MatrixXd with_zero_col = a;
  with_zero_col.col(3).setZero();
  const auto op0 = SensingOperator::dense(with_zero_col);
  CHECK(op0.apply_sq_adjoint(tau)[3] == 0.0);
}

TEST_CASE("squared applications agree with materialized squares per kind") {
  check_squared_against_materialized(
      SensingOperator::gaussian_dense(24, 64, 11, true));
  check_squared_against_materialized(
      SensingOperator::kronecker_gaussian(4, 8, 8, 12, false));
  check_squared_against_materialized(
      SensingOperator::subsampled_hadamard(40, 64, 13));
}

TEST_CASE("gaussian_dense column normalization and determinism") {
  const auto op = SensingOperator::gaussian_dense(80, 200, 77, true);
  const Eigen::MatrixXd a = op.materialize();
  for (int j = 0; j < 200; ++j)
    CHECK(std::abs(a.col(j).norm() - 1.0) <= 1e-12);
  check_adjoint_identity(op, 10);

  const auto again = SensingOperator::gaussian_dense(80, 200, 77, true);
  CHECK(a == again.materialize());
  const auto other = SensingOperator::gaussian_dense(80, 200, 78, true);
  CHECK(a != other.materialize());
}

TEST_CASE("kronecker kind equals an explicit block product") {
  Rng rng(6);
  const int q = 3, l = 7, b_cols = 5;
  Eigen::MatrixXd b(q, b_cols);
  for (int i = 0; i < q; ++i)
    for (int j = 0; j < b_cols; ++j) b(i, j) = rng.gauss();
  const auto op = SensingOperator::kronecker(b, l);
  CHECK(op.rows() == q * l);
  CHECK(op.cols() == b_cols * l);

  Eigen::MatrixXd x_mat(b_cols, l);
  for (int i = 0; i < b_cols; ++i)
    for (int j = 0; j < l; ++j) x_mat(i, j) = rng.gauss();
  const Eigen::VectorXd x =
      Eigen::Map<const Eigen::VectorXd>(x_mat.data(), x_mat.size());
  const Eigen::MatrixXd bx = b * x_mat;
  const Eigen::VectorXd want =
      Eigen::Map<const Eigen::VectorXd>(bx.data(), bx.size());
  CHECK(testutil::max_abs_diff(op.apply(x), want) <= 1e-13);
  CHECK(testutil::max_abs_diff(op.materialize() * x, want) <= 1e-13);
}

TEST_CASE("hadamard kind is orthonormal when square") {
  const auto op = SensingOperator::subsampled_hadamard(8, 8, 3);
  Rng rng(8);
  for (int p = 0; p < 20; ++p) {
    const Eigen::VectorXd x = random_vec(rng, 8);
    CHECK(testutil::max_abs_diff(op.apply_adjoint(op.apply(x)), x) <= 1e-12);
  }
  const Eigen::MatrixXd a = op.materialize();
  CHECK((a.transpose() * a - Eigen::MatrixXd::Identity(8, 8))
            .cwiseAbs()
            .maxCoeff() <= 1e-12);
}

TEST_CASE("hadamard entries all have magnitude 1/sqrt(n)") {
  const auto op = SensingOperator::subsampled_hadamard(3, 8, 17);
  const Eigen::MatrixXd a = op.materialize();
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 8; ++j)
      CHECK(std::abs(std::abs(a(i, j)) - 1.0 / std::sqrt(8.0)) <= 1e-15);
}

TEST_CASE("hadamard determinism") {
  const auto a = SensingOperator::subsampled_hadamard(5, 16, 9).materialize();
  const auto b = SensingOperator::subsampled_hadamard(5, 16, 9).materialize();
  CHECK(a == b);
}

TEST_CASE("fwht squares to n times the identity") {
  Rng rng(2);
  Eigen::VectorXd x = random_vec(rng, 16);
  Eigen::VectorXd t = x;
  fwht(t);
  fwht(t);
  CHECK(testutil::max_abs_diff(t / 16.0, x) <= 1e-13);
}

TEST_CASE("hadamard apply cost grows subquadratically") {
  const int n_small = 256, n_large = 16384;
  const auto small_op = SensingOperator::subsampled_hadamard(n_small / 2,
                                                             n_small, 1);
  const auto large_op = SensingOperator::subsampled_hadamard(n_large / 2,
                                                             n_large, 1);
  Rng rng(5);
  Eigen::VectorXd xs = random_vec(rng, n_small);
  Eigen::VectorXd xl = random_vec(rng, n_large);

  auto time_apply = [](const SensingOperator& op, const Eigen::VectorXd& x,
                       int reps) {
    double sink = 0;
    const auto t0 = std::chrono::steady_clock::now();
    for (int r = 0; r < reps; ++r) sink += op.apply(x).sum();
    const auto t1 = std::chrono::steady_clock::now();
    CHECK(std::isfinite(sink));
    return std::chrono::duration<double>(t1 - t0).count() / reps;
  };
  time_apply(small_op, xs, 50);  // warm up
  const double t_small = time_apply(small_op, xs, 2000);
  const double t_large = time_apply(large_op, xl, 100);
  // n grows 64x: quadratic cost would grow ~4096x, n log n ~112x
  CHECK(t_large / t_small < 1024.0);
}

TEST_CASE("construction and application errors") {
  CHECK_THROWS_AS(SensingOperator::subsampled_hadamard(2, 12, 0),
                  std::invalid_argument);
  CHECK_THROWS_AS(SensingOperator::subsampled_hadamard(9, 8, 0),
                  std::invalid_argument);
  CHECK_THROWS_AS(SensingOperator::gaussian_dense(0, 4, 0, false),
                  std::invalid_argument);
  CHECK_THROWS_AS(SensingOperator::kronecker(Eigen::MatrixXd::Ones(2, 2), 0),
                  std::invalid_argument);

  const auto op = SensingOperator::gaussian_dense(3, 5, 1, false);
  CHECK_THROWS_AS(op.apply(Eigen::VectorXd::Zero(4)), std::invalid_argument);
  CHECK_THROWS_AS(op.apply_adjoint(Eigen::VectorXd::Zero(5)),
                  std::invalid_argument);
  CHECK_THROWS_AS(op.apply_sq(Eigen::VectorXd::Constant(5, -1.0)),
                  std::invalid_argument);
  CHECK_THROWS_AS(op.apply_sq_adjoint(Eigen::VectorXd::Constant(3, -1.0)),
                  std::invalid_argument);
}

TEST_CASE("is_power_of_two") {
  CHECK(is_power_of_two(1));
  CHECK(is_power_of_two(64));
  CHECK(!is_power_of_two(0));
  CHECK(!is_power_of_two(-8));
  CHECK(!is_power_of_two(12));
}

TEST_SUITE_END();
