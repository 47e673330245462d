#pragma once

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>

namespace doco {

/// xoshiro256** 1.0 (Blackman & Vigna), seeded by expanding a 64-bit seed
/// through splitmix64. All derived draws below are defined bit-for-bit so a
/// stream can be reproduced in another language:
///
///   uniform()      = (next() >> 11) * 2^-53                       in [0, 1)
///   sign()         = +1 if the top bit of next() is set, else -1
///   normal()       = Box-Muller, sqrt(-2 ln(1 - u1)) * cos(2 pi u2),
///                    one output per two uniforms (no caching)
///   split(k)       = Rng(next() ^ splitmix64(k)), an independent child stream
class Rng {
 public:
  explicit Rng(std::uint64_t seed) {
    std::uint64_t x = seed;
    for (auto& s : state_) s = splitmix64(x);
  }

  static std::uint64_t splitmix64(std::uint64_t& x) {
    std::uint64_t z = (x += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  std::uint64_t next() {
    const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
  }

  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  double sign() { return (next() >> 63) ? 1.0 : -1.0; }

  double normal() {
    const double u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(1.0 - u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

  Rng split(std::uint64_t key) {
    std::uint64_t k = key;
    return Rng(next() ^ splitmix64(k));
  }

  /// Uniform direction on the unit sphere in R^n.
  Eigen::VectorXd direction(Eigen::Index n) {
    Eigen::VectorXd v(n);
    double norm = 0.0;
    do {
      for (Eigen::Index i = 0; i < n; ++i) v[i] = normal();
      norm = v.norm();
    } while (norm == 0.0);
    return v / norm;
  }

  /// Uniform point in the ball of the given radius in R^n.
  Eigen::VectorXd in_ball(Eigen::Index n, double radius) {
    const Eigen::VectorXd d = direction(n);
    const double r = radius * std::pow(uniform(), 1.0 / static_cast<double>(n));
    return d * r;
  }

 private:
  static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

  std::array<std::uint64_t, 4> state_{};
};

}  // namespace doco
