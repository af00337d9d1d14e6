// rng.hpp - deterministic RNG. SplitMix64 core with hand-rolled
// distributions so sequences are identical on every platform (std::
// distributions are implementation-defined). All pipeline randomness flows
// through named streams derived from one global seed via fanout().
#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <string_view>
#include <vector>

#include "viprom/core/hash.hpp"

namespace viprom::core {

struct Rng {
  std::uint64_t state = 0x2545F4914F6CDD1Dull;

  Rng() = default;
  explicit Rng(std::uint64_t seed) : state(seed) {}

  std::uint64_t next_u64() {
    std::uint64_t z = (state += 0x9E3779B97F4A7C15ull);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }

  // [0,1)
  double unit() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double range(double lo, double hi) { return lo + (hi - lo) * unit(); }

  // Box-Muller; both uniforms drawn per call to keep the stream simple.
  double normal() {
    double u1 = 1.0 - unit();
    double u2 = unit();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

  // [0, n)
  int uniform_int(int n) { return static_cast<int>(next_u64() % static_cast<std::uint64_t>(n)); }

  bool bernoulli(double p) { return unit() < p; }

  // Fisher-Yates (std::shuffle order is implementation-defined).
  template <class T>
  void shuffle(std::vector<T>& v) {
    for (int i = static_cast<int>(v.size()) - 1; i > 0; --i) {
      int j = uniform_int(i + 1);
      std::swap(v[static_cast<std::size_t>(i)], v[static_cast<std::size_t>(j)]);
    }
  }

  std::vector<int> permutation(int n) {
    std::vector<int> p(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) p[static_cast<std::size_t>(i)] = i;
    shuffle(p);
    return p;
  }
};

// Seed fanout: component stream seed = splitmix(global_seed ^ fnv1a64(label)).
// Documented contract so components can be rerun in isolation reproducibly.
inline std::uint64_t fanout(std::uint64_t seed, std::string_view label) {
  Rng r(seed ^ fnv1a64(label));
  return r.next_u64();
}

inline std::uint64_t fanout(std::uint64_t seed, std::string_view label, std::uint64_t index) {
  Rng r(seed ^ fnv1a64(label) ^ (0x9E3779B97F4A7C15ull * (index + 1)));
  return r.next_u64();
}

}  // namespace viprom::core
