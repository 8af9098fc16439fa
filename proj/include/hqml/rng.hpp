#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <iterator>
#include <numbers>
#include <random>
#include <utility>

namespace hqml {

/// Seedable pseudo-random source shared by every stochastic routine.
///
/// The stream is fully specified so that results can be reproduced by other
/// implementations:
///   - engine: std::mt19937_64 seeded with the 64-bit seed (output sequence is
///     fixed by the C++ standard);
///   - uniform(): (draw >> 11) * 2^-53, on [0, 1);
///   - uniform_index(n): rejection sampling on raw draws below the largest
///     multiple of n, then draw % n;
///   - normal(): Box-Muller, sqrt(-2 ln(1 - u1)) * cos(2 pi u2), one normal
///     per two uniforms;
///   - sign(): +1 if the top bit of a draw is 0, else -1.
///
/// The standard library distributions are deliberately not used since their
/// algorithms are implementation-defined.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  std::uint64_t uniform_index(std::uint64_t n) {
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t draw = next();
    while (draw >= limit) draw = next();
    return draw % n;
  }

  double normal() {
    const double u1 = 1.0 - uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

  int sign() { return (next() >> 63) == 0 ? 1 : -1; }

  // Fisher-Yates, last position first.
  template <typename RandomIt>
  void shuffle(RandomIt first, RandomIt last) {
    auto n = static_cast<std::uint64_t>(std::distance(first, last));
    for (std::uint64_t i = n; i > 1; --i) {
      const auto j = uniform_index(i);
      using std::swap;
      swap(first[i - 1], first[j]);
    }
  }

 private:
  std::mt19937_64 engine_;
};

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Child seed for a position in a hierarchy, e.g. derive_seed(seed, {repeat})
/// or derive_seed(seed, {i, j}). Independent of evaluation order.
inline std::uint64_t derive_seed(std::uint64_t seed, std::initializer_list<std::uint64_t> path) {
  std::uint64_t h = splitmix64(seed);
  for (auto p : path) h = splitmix64(h ^ splitmix64(p + 0x632be59bd9b4e019ULL));
  return h;
}

}  // namespace hqml
