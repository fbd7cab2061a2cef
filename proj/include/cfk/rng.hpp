#pragma once

// SplitMix64 streams with one independent substream per path, derived from
// the master seed and the path index alone. Draw order therefore never
// depends on the thread partition. Gaussians come from Box-Muller on the
// stream's uniforms; the transform choice is recorded in the config echo.

#include <cstdint>
#include <numbers>
#include <string_view>

#include "cfk/types.hpp"

namespace cfk {

inline std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

struct SplitMix64 {
  std::uint64_t state = 0;

  std::uint64_t next() {
    state += 0x9e3779b97f4a7c15ULL;
    return mix64(state);
  }
};

// Substream for path j of a batch seeded with `master`.
inline std::uint64_t substream_seed(std::uint64_t master, std::uint64_t index) {
  return mix64(master ^ mix64(index * 0x9e3779b97f4a7c15ULL + 0x632be59bd9b4e019ULL));
}

// Module/check-level substream: master seed plus a stable text label
// (FNV-1a), so harness runs can hand every check its own stream.
inline std::uint64_t derive_seed(std::uint64_t master, std::string_view label) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char ch : label) {
    h ^= static_cast<unsigned char>(ch);
    h *= 0x100000001b3ULL;
  }
  return mix64(master ^ h);
}

// 53-bit uniform in (0, 1]; the open lower end keeps log(u) finite.
inline double uniform_open(std::uint64_t bits) {
  return static_cast<double>((bits >> 11) + 1) * 0x1.0p-53;
}

struct GaussianPair {
  double z0;
  double z1;
};

inline GaussianPair box_muller(SplitMix64& gen) {
  const double u1 = uniform_open(gen.next());
  const double u2 = uniform_open(gen.next());
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * std::numbers::pi * u2;
  return {r * std::cos(angle), r * std::sin(angle)};
}

}  // namespace cfk
