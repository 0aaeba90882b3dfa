#include "pcsbl/linop.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <mutex>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "pcsbl/rng.hpp"

namespace pcsbl {

namespace {

void require(bool cond, const char* msg) {
  if (!cond) throw std::invalid_argument(msg);
}

void check_nonneg(const Eigen::VectorXd& v, const char* what) {
  if ((v.array() < 0.0).any())
    throw std::invalid_argument(std::string(what) + ": negative entry");
}

using RowMatrixXd =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

}  // namespace

bool is_power_of_two(int n) {
  return n > 0 && std::has_single_bit(static_cast<unsigned>(n));
}

void fwht(Eigen::Ref<Eigen::VectorXd> v) {
  const Eigen::Index n = v.size();
  require(is_power_of_two(static_cast<int>(n)), "fwht: size not a power of two");
  for (Eigen::Index len = 1; len < n; len <<= 1) {
    for (Eigen::Index i = 0; i < n; i += len << 1) {
      for (Eigen::Index j = i; j < i + len; ++j) {
        const double a = v[j];
        const double b = v[j + len];
        v[j] = a + b;
        v[j + len] = a - b;
      }
    }
  }
}

struct SensingOperator::Impl {
  OperatorDescriptor desc;

  virtual ~Impl() = default;
  virtual Eigen::VectorXd apply(const Eigen::VectorXd& x) const = 0;
  virtual Eigen::VectorXd apply_adjoint(const Eigen::VectorXd& v) const = 0;
  virtual Eigen::VectorXd apply_sq(const Eigen::VectorXd& phi) const = 0;
  virtual Eigen::VectorXd apply_sq_adjoint(const Eigen::VectorXd& tau) const = 0;
  virtual Eigen::MatrixXd materialize() const = 0;
};

namespace {

struct DenseImpl final : SensingOperator::Impl {
  RowMatrixXd a;
  mutable RowMatrixXd a_sq;  // squared entries, built on first use
  mutable std::once_flag sq_once;

  const RowMatrixXd& squared() const {
    std::call_once(sq_once, [&] { a_sq = a.cwiseProduct(a); });
    return a_sq;
  }

  Eigen::VectorXd apply(const Eigen::VectorXd& x) const override { return a * x; }
  Eigen::VectorXd apply_adjoint(const Eigen::VectorXd& v) const override {
    return a.transpose() * v;
  }
  Eigen::VectorXd apply_sq(const Eigen::VectorXd& phi) const override {
    return squared() * phi;
  }
  Eigen::VectorXd apply_sq_adjoint(const Eigen::VectorXd& tau) const override {
    return squared().transpose() * tau;
  }
  Eigen::MatrixXd materialize() const override { return Eigen::MatrixXd(a); }
};

// A = I_reps (x) B acting on vec(X) column-major: A x = vec(B X).
struct KroneckerImpl final : SensingOperator::Impl {
  Eigen::MatrixXd b;
  int reps = 0;
  mutable Eigen::MatrixXd b_sq;
  mutable std::once_flag sq_once;

  const Eigen::MatrixXd& squared() const {
    std::call_once(sq_once, [&] { b_sq = b.cwiseProduct(b); });
    return b_sq;
  }

  Eigen::VectorXd block_apply(const Eigen::MatrixXd& blk,
                              const Eigen::VectorXd& in, bool forward) const {
    const Eigen::Index q = forward ? blk.cols() : blk.rows();
    const Eigen::Index p = forward ? blk.rows() : blk.cols();
    Eigen::Map<const Eigen::MatrixXd> in_mat(in.data(), q, reps);
    Eigen::MatrixXd out =
        forward ? (blk * in_mat).eval() : (blk.transpose() * in_mat).eval();
    return Eigen::Map<const Eigen::VectorXd>(out.data(), p * reps);
  }

  Eigen::VectorXd apply(const Eigen::VectorXd& x) const override {
    return block_apply(b, x, true);
  }
  Eigen::VectorXd apply_adjoint(const Eigen::VectorXd& v) const override {
    return block_apply(b, v, false);
  }
  Eigen::VectorXd apply_sq(const Eigen::VectorXd& phi) const override {
    return block_apply(squared(), phi, true);
  }
  Eigen::VectorXd apply_sq_adjoint(const Eigen::VectorXd& tau) const override {
    return block_apply(squared(), tau, false);
  }
  Eigen::MatrixXd materialize() const override {
    Eigen::MatrixXd full =
        Eigen::MatrixXd::Zero(b.rows() * reps, b.cols() * reps);
    for (int r = 0; r < reps; ++r)
      full.block(r * b.rows(), r * b.cols(), b.rows(), b.cols()) = b;
    return full;
  }
};

// Rows of the sign-randomized scaled Hadamard transform. Every entry has
// magnitude scale = 1/sqrt(n), so the squared applications collapse to a
// rank-one closed form.
struct HadamardImpl final : SensingOperator::Impl {
  int n = 0;
  std::vector<int> row_index;  // selected transform rows, ascending
  Eigen::VectorXd sign;        // +-1 diagonal
  double scale = 0.0;

  Eigen::VectorXd apply(const Eigen::VectorXd& x) const override {
    Eigen::VectorXd t = sign.cwiseProduct(x);
    fwht(t);
    Eigen::VectorXd out(row_index.size());
    for (std::size_t i = 0; i < row_index.size(); ++i)
      out[static_cast<Eigen::Index>(i)] = scale * t[row_index[i]];
    return out;
  }
  Eigen::VectorXd apply_adjoint(const Eigen::VectorXd& v) const override {
    Eigen::VectorXd t = Eigen::VectorXd::Zero(n);
    for (std::size_t i = 0; i < row_index.size(); ++i)
      t[row_index[i]] = v[static_cast<Eigen::Index>(i)];
    fwht(t);  // Hadamard matrix is symmetric
    return scale * sign.cwiseProduct(t);
  }
  Eigen::VectorXd apply_sq(const Eigen::VectorXd& phi) const override {
    const double total = phi.sum() / static_cast<double>(n);
    return Eigen::VectorXd::Constant(static_cast<Eigen::Index>(row_index.size()),
                                     total);
  }
  Eigen::VectorXd apply_sq_adjoint(const Eigen::VectorXd& tau) const override {
    const double total = tau.sum() / static_cast<double>(n);
    return Eigen::VectorXd::Constant(n, total);
  }
  Eigen::MatrixXd materialize() const override {
    // H[r,c] = (-1)^popcount(r & c)
    Eigen::MatrixXd full(row_index.size(), n);
    for (std::size_t i = 0; i < row_index.size(); ++i) {
      const unsigned r = static_cast<unsigned>(row_index[i]);
      for (int c = 0; c < n; ++c) {
        const int par = std::popcount(r & static_cast<unsigned>(c)) & 1;
        full(static_cast<Eigen::Index>(i), c) =
            scale * sign[c] * (par ? -1.0 : 1.0);
      }
    }
    return full;
  }
};

}  // namespace

SensingOperator::SensingOperator(std::shared_ptr<const Impl> impl)
    : impl_(std::move(impl)) {}

int SensingOperator::rows() const { return impl_->desc.m; }
int SensingOperator::cols() const { return impl_->desc.n; }
OperatorKind SensingOperator::kind() const { return impl_->desc.kind; }
const OperatorDescriptor& SensingOperator::descriptor() const {
  return impl_->desc;
}

Eigen::VectorXd SensingOperator::apply(const Eigen::VectorXd& x) const {
  require(x.size() == cols(), "apply: dimension mismatch");
  return impl_->apply(x);
}

Eigen::VectorXd SensingOperator::apply_adjoint(const Eigen::VectorXd& v) const {
  require(v.size() == rows(), "apply_adjoint: dimension mismatch");
  return impl_->apply_adjoint(v);
}

Eigen::VectorXd SensingOperator::apply_sq(const Eigen::VectorXd& phi) const {
  require(phi.size() == cols(), "apply_sq: dimension mismatch");
  check_nonneg(phi, "apply_sq");
  return impl_->apply_sq(phi);
}

Eigen::VectorXd SensingOperator::apply_sq_adjoint(
    const Eigen::VectorXd& tau) const {
  require(tau.size() == rows(), "apply_sq_adjoint: dimension mismatch");
  check_nonneg(tau, "apply_sq_adjoint");
  return impl_->apply_sq_adjoint(tau);
}

Eigen::MatrixXd SensingOperator::materialize() const {
  return impl_->materialize();
}

SensingOperator SensingOperator::dense(Eigen::MatrixXd a) {
  require(a.rows() >= 1 && a.cols() >= 1, "dense: empty matrix");
  auto impl = std::make_shared<DenseImpl>();
  impl->desc.kind = OperatorKind::kDense;
  impl->desc.m = static_cast<int>(a.rows());
  impl->desc.n = static_cast<int>(a.cols());
  impl->a = a;
  return SensingOperator(std::move(impl));
}

SensingOperator SensingOperator::gaussian_dense(int m, int n,
                                                std::uint64_t seed,
                                                bool normalize_columns) {
  require(m >= 1 && n >= 1, "gaussian_dense: dims must be >= 1");
  auto impl = std::make_shared<DenseImpl>();
  impl->desc.kind = OperatorKind::kDense;
  impl->desc.m = m;
  impl->desc.n = n;
  impl->desc.seed = seed;
  impl->desc.seeded = true;
  impl->desc.normalize_columns = normalize_columns;
  Rng rng(seed);
  impl->a.resize(m, n);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < n; ++j) impl->a(i, j) = rng.gauss();
  if (normalize_columns) {
    for (int j = 0; j < n; ++j) {
      const double nj = impl->a.col(j).norm();
      if (nj > 0.0) impl->a.col(j) /= nj;
    }
  }
  return SensingOperator(std::move(impl));
}

namespace {

std::shared_ptr<KroneckerImpl> make_kronecker_impl(Eigen::MatrixXd b,
                                                   int reps) {
  require(b.rows() >= 1 && b.cols() >= 1, "kronecker: empty block");
  require(reps >= 1, "kronecker: reps must be >= 1");
  auto impl = std::make_shared<KroneckerImpl>();
  impl->desc.kind = OperatorKind::kKronecker;
  impl->desc.b_rows = static_cast<int>(b.rows());
  impl->desc.b_cols = static_cast<int>(b.cols());
  impl->desc.reps = reps;
  impl->desc.m = static_cast<int>(b.rows()) * reps;
  impl->desc.n = static_cast<int>(b.cols()) * reps;
  impl->b = std::move(b);
  impl->reps = reps;
  return impl;
}

}  // namespace

SensingOperator SensingOperator::kronecker(Eigen::MatrixXd b, int reps) {
  return SensingOperator(make_kronecker_impl(std::move(b), reps));
}

SensingOperator SensingOperator::kronecker_gaussian(int b_rows, int b_cols,
                                                    int reps,
                                                    std::uint64_t seed,
                                                    bool normalize_columns) {
  require(b_rows >= 1 && b_cols >= 1 && reps >= 1,
          "kronecker_gaussian: dims must be >= 1");
  Rng rng(seed);
  Eigen::MatrixXd b(b_rows, b_cols);
  for (int i = 0; i < b_rows; ++i)
    for (int j = 0; j < b_cols; ++j) b(i, j) = rng.gauss();
  if (normalize_columns) {
    for (int j = 0; j < b_cols; ++j) {
      const double nj = b.col(j).norm();
      if (nj > 0.0) b.col(j) /= nj;
    }
  }
  auto impl = make_kronecker_impl(std::move(b), reps);
  impl->desc.seed = seed;
  impl->desc.seeded = true;
  impl->desc.normalize_columns = normalize_columns;
  return SensingOperator(std::move(impl));
}

SensingOperator SensingOperator::subsampled_hadamard(int m, int n,
                                                     std::uint64_t seed) {
  require(is_power_of_two(n), "subsampled_hadamard: n not a power of two");
  require(m >= 1 && m <= n, "subsampled_hadamard: need 1 <= m <= n");
  auto impl = std::make_shared<HadamardImpl>();
  impl->desc.kind = OperatorKind::kHadamard;
  impl->desc.m = m;
  impl->desc.n = n;
  impl->desc.seed = seed;
  impl->desc.seeded = true;
  impl->n = n;
  impl->scale = 1.0 / std::sqrt(static_cast<double>(n));
  Rng rng(seed);
  impl->sign.resize(n);
  for (int i = 0; i < n; ++i)
    impl->sign[i] = rng.uniform_int(0, 1) == 0 ? -1.0 : 1.0;
  // m distinct rows via partial Fisher-Yates, reported in ascending order
  std::vector<int> pool(n);
  std::iota(pool.begin(), pool.end(), 0);
  for (int i = 0; i < m; ++i) {
    const auto j = rng.uniform_int(i, n - 1);
    std::swap(pool[i], pool[j]);
  }
  impl->row_index.assign(pool.begin(), pool.begin() + m);
  std::sort(impl->row_index.begin(), impl->row_index.end());
  return SensingOperator(std::move(impl));
}

}  // namespace pcsbl
