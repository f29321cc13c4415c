#pragma once

#include <cstdint>
#include <random>

namespace spraylab {

using Rng = std::mt19937_64;

/// Uniform double in [lo, hi) from the top 53 bits; identical across standard libraries.
inline double uniform(Rng& rng, double lo, double hi) {
  const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
  return lo + (hi - lo) * u;
}

inline std::size_t uniform_index(Rng& rng, std::size_t n) { return static_cast<std::size_t>(rng() % n); }

inline bool coin(Rng& rng) { return (rng() >> 63) != 0; }

}  // namespace spraylab
