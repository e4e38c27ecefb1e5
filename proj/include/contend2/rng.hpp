#pragma once

#include <cstdint>

namespace contend2 {

inline constexpr std::uint64_t kDefaultSeed = 20200715ULL;

/// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z += 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

/// Key of substream `index` under `seed`.
constexpr std::uint64_t substream(std::uint64_t seed, std::uint64_t index) {
  return mix64(mix64(seed) ^ mix64(index + 0x632BE59BD9B4E019ULL));
}

/// Top 53 bits mapped to [0, 1).
constexpr double to_unit(std::uint64_t bits) {
  return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

/// Counter-based uniform draw: a pure function of (stream, row, col).
constexpr double counter_uniform(std::uint64_t stream, std::uint64_t row, std::uint64_t col) {
  return to_unit(mix64(mix64(stream ^ mix64(row)) ^ (col * 0xD1B54A32D192ED03ULL)));
}

}  // namespace contend2
