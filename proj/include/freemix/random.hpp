#pragma once

#include <cstdint>
#include <random>

namespace freemix {

/// All sampling draws from std::mt19937_64. An engine is fully determined by
/// a (seed, stream) pair: both are mixed with SplitMix64 and fed through
/// std::seed_seq. Distinct streams give independent engines for parallel
/// workers; there is no global generator.
using Engine = std::mt19937_64;

constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

struct RngSeed {
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;

  /// Seed for the index-th independent sub-stream (one per Monte Carlo draw).
  constexpr RngSeed child(std::uint64_t index) const {
    return {splitmix64(seed ^ splitmix64(stream + 0x632BE59BD9B4E019ULL)), index};
  }

  friend constexpr bool operator==(const RngSeed&, const RngSeed&) = default;
};

inline Engine make_engine(RngSeed s) {
  const std::uint64_t a = splitmix64(s.seed);
  const std::uint64_t b = splitmix64(s.stream ^ 0xD1B54A32D192ED03ULL);
  std::seed_seq seq{static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(a >> 32),
                    static_cast<std::uint32_t>(b), static_cast<std::uint32_t>(b >> 32)};
  return Engine(seq);
}

}  // namespace freemix
