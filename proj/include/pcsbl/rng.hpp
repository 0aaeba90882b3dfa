#pragma once

#include <cstdint>
#include <random>

namespace pcsbl {

// Mixes tag values into a base seed so that every (experiment, grid point,
// trial, stream) tuple owns an independent generator.
inline std::uint64_t seed_mix(std::uint64_t base, std::uint64_t t1,
                              std::uint64_t t2 = 0, std::uint64_t t3 = 0) {
  auto step = [](std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
  };
  std::uint64_t h = step(base);
  h = step(h ^ t1);
  h = step(h ^ t2);
  h = step(h ^ t3);
  return h;
}

// Seeded generator owned by one constructor call or one trial.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  double gauss() { return normal_(eng_); }
  double uniform() { return real_(eng_); }

  // inclusive bounds
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
    return std::uniform_int_distribution<std::int64_t>(lo, hi)(eng_);
  }

  std::mt19937_64& engine() { return eng_; }

 private:
  std::mt19937_64 eng_;
  std::normal_distribution<double> normal_{0.0, 1.0};
  std::uniform_real_distribution<double> real_{0.0, 1.0};
};

}  // namespace pcsbl
