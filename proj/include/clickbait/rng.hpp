#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace clickbait {

using Generator = std::mt19937_64;

/// Derives an independent generator for one named consumer ("split", "init",
/// "shuffle", "dropout", "oov") from the single user-facing seed.
inline Generator make_generator(std::uint64_t seed, std::string_view stream) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : stream) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(h), static_cast<std::uint32_t>(h >> 32)};
  return Generator(seq);
}

/// Uniform double in [0, 1) from the top 53 bits of one draw.
inline double uniform01(Generator& gen) {
  return static_cast<double>(gen() >> 11) * 0x1.0p-53;
}

inline double uniform(Generator& gen, double lo, double hi) {
  return lo + (hi - lo) * uniform01(gen);
}

}  // namespace clickbait
