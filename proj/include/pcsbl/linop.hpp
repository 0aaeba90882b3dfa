#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <memory>
#include <string>

namespace pcsbl {

enum class OperatorKind { kDense, kKronecker, kHadamard };

// Construction recipe carried alongside each operator; enough to rebuild it
// bit-identically (or, for dense-from-file, to locate the entries).
struct OperatorDescriptor {
  OperatorKind kind = OperatorKind::kDense;
  int m = 0;
  int n = 0;
  std::uint64_t seed = 0;
  bool seeded = false;            // regenerable from seed
  bool normalize_columns = false;
  int b_rows = 0;                 // kronecker: inner block dims and replication
  int b_cols = 0;
  int reps = 0;
  std::string csv_path;           // dense loaded from file
};

// Matrix-free measurement operator with the four applications the message
// passing engine needs: A x, A' v, (A.^2) phi, (A.^2)' tau.
//
// Immutable after construction; cheap to copy and safe to share across
// concurrent solves.
class SensingOperator {
 public:
  int rows() const;
  int cols() const;
  OperatorKind kind() const;
  const OperatorDescriptor& descriptor() const;

  Eigen::VectorXd apply(const Eigen::VectorXd& x) const;
  Eigen::VectorXd apply_adjoint(const Eigen::VectorXd& v) const;
  // phi must be entrywise >= 0
  Eigen::VectorXd apply_sq(const Eigen::VectorXd& phi) const;
  // tau must be entrywise >= 0
  Eigen::VectorXd apply_sq_adjoint(const Eigen::VectorXd& tau) const;

  // Dense copy of the matrix (closed form per kind, not basis probing).
  Eigen::MatrixXd materialize() const;

  static SensingOperator dense(Eigen::MatrixXd a);
  static SensingOperator gaussian_dense(int m, int n, std::uint64_t seed,
                                        bool normalize_columns);
  static SensingOperator kronecker(Eigen::MatrixXd b, int reps);
  static SensingOperator kronecker_gaussian(int b_rows, int b_cols, int reps,
                                            std::uint64_t seed,
                                            bool normalize_columns);
  // A = Phi Psi S: m rows sampled without replacement from the n-point
  // Hadamard transform scaled by 1/sqrt(n), times a random +-1 diagonal.
  // Every entry has magnitude 1/sqrt(n); apply runs in O(n log n).
  static SensingOperator subsampled_hadamard(int m, int n, std::uint64_t seed);

  struct Impl;

 private:
  explicit SensingOperator(std::shared_ptr<const Impl> impl);
  std::shared_ptr<const Impl> impl_;
};

// In-place unnormalized Walsh-Hadamard transform; size must be a power of two.
void fwht(Eigen::Ref<Eigen::VectorXd> v);

bool is_power_of_two(int n);

}  // namespace pcsbl
