// SPDX-License-Identifier: Apache-2.0
//
// Per-path random streams. Path i of a run with master seed s uses
//
//   seed_i = splitmix64(s + (i + 1) * 0x9E3779B97F4A7C15)
//
// as the seed of a std::mt19937_64 engine. The stream of a path therefore
// depends only on (s, i), never on scheduling.
#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace sticky_dbm {

using Engine = std::mt19937_64;

inline constexpr std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

inline constexpr std::uint64_t path_seed(std::uint64_t master, std::uint64_t index) {
  return splitmix64(master + (index + 1) * 0x9E3779B97F4A7C15ULL);
}

/// Uniform on [0, 1) with 53 random bits.
inline double uniform01(Engine& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

/// Uniform on (0, 1).
inline double uniform_open01(Engine& rng) { return (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53; }

/// Exp(1) by inversion; never returns 0.
inline double standard_exponential(Engine& rng) { return -std::log(uniform_open01(rng)); }

}  // namespace sticky_dbm
