#pragma once

// Deterministic randomness. Every stochastic choice derives from one root
// seed through SplitMix64 stream keys feeding std::mt19937_64, whose output
// sequence is fixed by the C++ standard. Bounded integers use rejection
// sampling instead of std::uniform_int_distribution so permutations are
// identical across standard libraries.

#include <cstdint>
#include <limits>
#include <numeric>
#include <random>
#include <vector>

namespace budgetsvm {

inline std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// Engine for stream `stream` of root seed `seed`.
inline std::mt19937_64 make_engine(std::uint64_t seed, std::uint64_t stream) {
  return std::mt19937_64(splitmix64(splitmix64(seed) ^ splitmix64(stream + 0x632BE59BD9B4E019ULL)));
}

/// Uniform integer in [0, bound), bound >= 1.
inline std::uint64_t uniform_below(std::mt19937_64& engine, std::uint64_t bound) {
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % bound;
  std::uint64_t draw;
  do {
    draw = engine();
  } while (draw >= limit);
  return draw % bound;
}

/// Fisher-Yates permutation of 0..n-1, deterministic in (seed, stream).
inline std::vector<std::size_t> random_permutation(std::size_t n, std::uint64_t seed,
                                                   std::uint64_t stream) {
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  auto engine = make_engine(seed, stream);
  for (std::size_t k = n; k > 1; --k) {
    const auto j = static_cast<std::size_t>(uniform_below(engine, k));
    std::swap(perm[k - 1], perm[j]);
  }
  return perm;
}

}  // namespace budgetsvm
