#pragma once

#include "ginet/common.hpp"

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace ginet {

// splitmix64 step; used to derive independent child seeds from a parent seed.
inline std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9e3779b97f4a7c15ULL;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Child seed as a pure function of (parent seed, stream id).
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t s = seed ^ (0x2545f4914f6cdd1dULL * (stream + 1));
  return splitmix64(s);
}

// Deterministic generator. The raw mt19937_64 engine output is pinned by the
// standard, but the std::*_distribution adaptors are not, so all distribution
// sampling below is hand-rolled to keep artifacts bit-reproducible across
// toolchains.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed), seed_(seed) {}

  // Independent child generator for a distinct stream id (epoch index, node
  // index, ...). Depends only on the construction seed, not on draws consumed.
  Rng derive(std::uint64_t stream) const { return Rng(derive_seed(seed_, stream)); }

  // Uniform on [0, 1) with full 53-bit mantissa resolution.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  // Uniform on (0, 1); for draws that get passed through log().
  double uniform_pos() {
    double u;
    do {
      u = uniform();
    } while (u <= 0.0);
    return u;
  }

  // Uniform integer in [lo, hi] by rejection (unbiased).
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
    if (lo > hi) throw ParameterError("uniform_int: empty range");
    const std::uint64_t span = static_cast<std::uint64_t>(hi - lo) + 1;
    if (span == 0) return static_cast<std::int64_t>(engine_());  // full 64-bit range
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % span;
    std::uint64_t draw;
    do {
      draw = engine_();
    } while (draw >= limit);
    return lo + static_cast<std::int64_t>(draw % span);
  }

  // Standard normal via Box-Muller (pairs cached).
  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    const double u1 = uniform_pos();
    const double u2 = uniform();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * M_PI * u2;
    spare_ = radius * std::sin(angle);
    have_spare_ = true;
    return radius * std::cos(angle);
  }

  double normal(double mean, double stddev) { return mean + stddev * normal(); }

  // Standard Gumbel draw: -log(-log(U)), U ~ Uniform(0,1).
  double gumbel() { return -std::log(-std::log(uniform_pos())); }

  bool bernoulli(double p) { return uniform() < p; }

  // Fisher-Yates shuffle.
  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      const auto j = static_cast<std::size_t>(uniform_int(0, static_cast<std::int64_t>(i) - 1));
      std::swap(v[i - 1], v[j]);
    }
  }

  // Draws k distinct indices from [0, n), order randomized.
  std::vector<int> sample_without_replacement(int n, int k) {
    if (k < 0 || k > n) throw ParameterError("sample_without_replacement: k out of range");
    std::vector<int> all(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) all[static_cast<std::size_t>(i)] = i;
    // Partial Fisher-Yates: only the first k positions need to be finalized.
    for (int i = 0; i < k; ++i) {
      const auto j = static_cast<std::size_t>(uniform_int(i, n - 1));
      std::swap(all[static_cast<std::size_t>(i)], all[j]);
    }
    all.resize(static_cast<std::size_t>(k));
    return all;
  }

 private:
  std::mt19937_64 engine_;
  std::uint64_t seed_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

}  // namespace ginet
