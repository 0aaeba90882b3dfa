#pragma once

#include <Eigen/Dense>
#include <cstdint>

namespace pcsbl {

// Noiseless recovery counts as success below this normalized squared error.
inline constexpr double kSuccessNmse = 1e-6;

// Unit-norm signal of length n with exactly k standard-normal nonzeros
// arranged in t maximal runs: run lengths are a uniform composition of k into
// t positive parts, run positions a uniform arrangement with at least one
// zero between consecutive runs. Throws when k + t - 1 > n.
Eigen::VectorXd gen_block_sparse(int n, int k, int t, std::uint64_t seed);

// Binary letter-like test pattern on a rows x cols grid: a few connected
// strokes (horizontal, vertical, diagonal) of random length and thickness,
// later strokes branching off earlier ones. Returned column-major; the first
// stroke always fits whole, so the pattern contains a connected cluster of
// at least 3 pixels.
Eigen::VectorXd gen_patch_2d(int rows, int cols, std::uint64_t seed);

// Column-major flattening used throughout for 2-D signals.
Eigen::VectorXd vectorize(const Eigen::MatrixXd& image);
Eigen::MatrixXd unvectorize(const Eigen::VectorXd& v, int rows, int cols);

struct NoisyMeasurement {
  Eigen::VectorXd y;
  double sigma2 = 0.0;
};

// Additive white Gaussian noise at the requested SNR, defined as
// 10 log10(|z|^2 / (m sigma^2)). Pass +infinity for the noiseless mode.
NoisyMeasurement add_noise(const Eigen::VectorXd& z, double snr_db,
                           std::uint64_t seed);

// |x - x_hat|^2 / |x|^2; throws on a zero reference signal.
double nmse(const Eigen::VectorXd& x, const Eigen::VectorXd& x_hat);

bool success(const Eigen::VectorXd& x, const Eigen::VectorXd& x_hat);

}  // namespace pcsbl
