#include "pcsbl/signals.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <utility>
#include <vector>

#include "pcsbl/rng.hpp"

namespace pcsbl {

namespace {

// Sorted sample of `count` distinct integers from {lo..hi}.
std::vector<int> sample_distinct(Rng& rng, int count, int lo, int hi) {
  std::vector<int> pool(hi - lo + 1);
  std::iota(pool.begin(), pool.end(), lo);
  for (int i = 0; i < count; ++i) {
    const auto j = rng.uniform_int(i, static_cast<int>(pool.size()) - 1);
    std::swap(pool[i], pool[j]);
  }
  pool.resize(count);
  std::sort(pool.begin(), pool.end());
  return pool;
}

}  // namespace

Eigen::VectorXd gen_block_sparse(int n, int k, int t, std::uint64_t seed) {
  if (t < 1 || k < t || n < k)
    throw std::invalid_argument("gen_block_sparse: need 1 <= t <= k <= n");
  if (k + t - 1 > n)
    throw std::invalid_argument(
        "gen_block_sparse: no room to separate the runs");

  Rng rng(seed);

  // composition of k into t positive parts via distinct cuts in {1..k-1}
  std::vector<int> lengths;
  {
    std::vector<int> cuts = sample_distinct(rng, t - 1, 1, k - 1);
    cuts.insert(cuts.begin(), 0);
    cuts.push_back(k);
    for (int i = 0; i < t; ++i) lengths.push_back(cuts[i + 1] - cuts[i]);
  }

  // weak composition of the slack into t+1 gaps; each interior gap gets one
  // extra separating zero so the runs stay maximal
  const int slack = n - k - (t - 1);
  std::vector<int> gaps(t + 1, 0);
  if (slack > 0) {
    std::vector<int> bars = sample_distinct(rng, t, 1, slack + t);
    bars.insert(bars.begin(), 0);
    bars.push_back(slack + t + 1);
    for (int i = 0; i <= t; ++i) gaps[i] = bars[i + 1] - bars[i] - 1;
  }

  Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
  int pos = gaps[0];
  for (int i = 0; i < t; ++i) {
    for (int j = 0; j < lengths[i]; ++j) x[pos + j] = rng.gauss();
    pos += lengths[i] + 1 + gaps[i + 1];  // run, separator, extra gap
  }
  x /= x.norm();
  return x;
}

Eigen::VectorXd gen_patch_2d(int rows, int cols, std::uint64_t seed) {
  if (rows < 4 || cols < 4)
    throw std::invalid_argument("gen_patch_2d: grid must be at least 4x4");

  Rng rng(seed);
  Eigen::MatrixXd img = Eigen::MatrixXd::Zero(rows, cols);
  std::vector<std::pair<int, int>> lit;

  auto set_pixel = [&](int r, int c) {
    if (r < 0 || r >= rows || c < 0 || c >= cols) return;
    if (img(r, c) == 0.0) {
      img(r, c) = 1.0;
      lit.emplace_back(r, c);
    }
  };

  const int max_len = std::max(3, std::min(rows, cols) - 2);
  const int strokes = static_cast<int>(rng.uniform_int(2, 4));
  for (int s = 0; s < strokes; ++s) {
    const int dir = static_cast<int>(rng.uniform_int(0, 3));
    const int len = static_cast<int>(rng.uniform_int(3, max_len));
    const int thick =
        (dir <= 1) ? static_cast<int>(rng.uniform_int(1, 2)) : 1;
    // steps per direction: horizontal, vertical, two diagonals
    const int dr[] = {0, 1, 1, -1};
    const int dc[] = {1, 0, 1, 1};

    int r0 = 0, c0 = 0;
    if (lit.empty()) {
      // anchor so the whole stroke fits; keeps the first cluster intact
      const int r_span = std::abs(dr[dir]) * (len - 1) + (dir == 0 ? thick - 1 : 0);
      const int c_span = std::abs(dc[dir]) * (len - 1) + (dir == 1 ? thick - 1 : 0);
      r0 = static_cast<int>(rng.uniform_int(dir == 3 ? len - 1 : 0,
                                            rows - 1 - (dir == 3 ? 0 : r_span)));
      c0 = static_cast<int>(rng.uniform_int(0, cols - 1 - c_span));
    } else {
      const auto anchor =
          lit[static_cast<std::size_t>(rng.uniform_int(0, static_cast<int>(lit.size()) - 1))];
      r0 = anchor.first;
      c0 = anchor.second;
    }

    for (int j = 0; j < len; ++j) {
      const int r = r0 + dr[dir] * j;
      const int c = c0 + dc[dir] * j;
      set_pixel(r, c);
      if (thick == 2) set_pixel(r + (dir == 0 ? 1 : 0), c + (dir == 1 ? 1 : 0));
    }
  }
  return vectorize(img);
}

Eigen::VectorXd vectorize(const Eigen::MatrixXd& image) {
  return Eigen::Map<const Eigen::VectorXd>(image.data(), image.size());
}

Eigen::MatrixXd unvectorize(const Eigen::VectorXd& v, int rows, int cols) {
  if (v.size() != static_cast<Eigen::Index>(rows) * cols)
    throw std::invalid_argument("unvectorize: size mismatch");
  return Eigen::Map<const Eigen::MatrixXd>(v.data(), rows, cols);
}

NoisyMeasurement add_noise(const Eigen::VectorXd& z, double snr_db,
                           std::uint64_t seed) {
  if (std::isnan(snr_db))
    throw std::invalid_argument("add_noise: snr_db is NaN");
  if (std::isinf(snr_db))
    return {z, 0.0};  // noiseless mode

  const double energy = z.squaredNorm();
  if (energy <= 0)
    throw std::invalid_argument(
        "add_noise: zero measurements cannot meet a finite SNR");
  const double m = static_cast<double>(z.size());
  const double sigma2 = energy / (m * std::pow(10.0, snr_db / 10.0));
  const double sigma = std::sqrt(sigma2);

  Rng rng(seed);
  Eigen::VectorXd y = z;
  for (Eigen::Index i = 0; i < y.size(); ++i) y[i] += sigma * rng.gauss();
  return {std::move(y), sigma2};
}

double nmse(const Eigen::VectorXd& x, const Eigen::VectorXd& x_hat) {
  if (x.size() != x_hat.size())
    throw std::invalid_argument("nmse: length mismatch");
  const double ref = x.squaredNorm();
  if (ref <= 0) throw std::invalid_argument("nmse: zero reference signal");
  return (x - x_hat).squaredNorm() / ref;
}

bool success(const Eigen::VectorXd& x, const Eigen::VectorXd& x_hat) {
  return nmse(x, x_hat) <= kSuccessNmse;
}

}  // namespace pcsbl
