#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>
#include <vector>

namespace vbqc {

using Rng = std::mt19937_64;

// Derive an independent generator from a master seed and a path of stream
// labels.  The same (seed, path) always yields the same sequence, so trial i
// of a Monte Carlo study can be replayed without running trials 0..i-1.
inline Rng make_stream(std::uint64_t seed, std::initializer_list<std::uint64_t> path = {}) {
  std::vector<std::uint32_t> words;
  words.reserve(2 + 2 * path.size());
  words.push_back(static_cast<std::uint32_t>(seed));
  words.push_back(static_cast<std::uint32_t>(seed >> 32));
  for (std::uint64_t p : path) {
    words.push_back(static_cast<std::uint32_t>(p));
    words.push_back(static_cast<std::uint32_t>(p >> 32));
  }
  std::seed_seq seq(words.begin(), words.end());
  return Rng(seq);
}

// Stream labels used across the library.
namespace stream {
constexpr std::uint64_t client = 0xC11E;
constexpr std::uint64_t world = 0x0B1D;
constexpr std::uint64_t trial = 0x7A1A;
}  // namespace stream

inline int bernoulli(Rng& rng, double p) { return std::bernoulli_distribution(p)(rng) ? 1 : 0; }
inline double uniform01(Rng& rng) { return std::uniform_real_distribution<double>(0.0, 1.0)(rng); }

}  // namespace vbqc
