#ifndef SFMAB_RANDOM_HPP
#define SFMAB_RANDOM_HPP

#include <cstdint>
#include <random>

namespace sfmab {

using Rng = std::mt19937_64;

/// Generator for (seed, stream); distinct streams give unrelated sequences
/// for the same seed.
inline Rng make_rng(std::uint64_t seed, std::uint64_t stream = 0) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
  return Rng(seq);
}

/// Uniform double in [0, 1) from the top 53 bits of one draw.
inline double uniform01(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

}  // namespace sfmab

#endif  // SFMAB_RANDOM_HPP
