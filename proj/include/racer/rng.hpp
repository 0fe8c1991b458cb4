#pragma once

// Counter-based deterministic randomness. Every draw is a pure function of
// (seed, label, counters), so results do not depend on iteration order or on
// how work is split across threads.

#include <cmath>
#include <cstdint>
#include <string_view>

namespace racer::rng {

constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// FNV-1a, 64 bit.
constexpr std::uint64_t hash_string(std::string_view s) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

constexpr std::uint64_t combine(std::uint64_t key, std::uint64_t value) noexcept {
  return splitmix64(key ^ splitmix64(value));
}

/// Sub-seed derived from a parent seed by a fixed label.
constexpr std::uint64_t derive_seed(std::uint64_t seed, std::string_view label) noexcept {
  return combine(splitmix64(seed), hash_string(label));
}

template <typename... Counters>
constexpr std::uint64_t key(std::uint64_t seed, Counters... counters) noexcept {
  std::uint64_t k = splitmix64(seed);
  ((k = combine(k, static_cast<std::uint64_t>(counters))), ...);
  return k;
}

/// Uniform double in [0, 1) with 53 random bits.
constexpr double to_unit(std::uint64_t bits) noexcept {
  return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

/// Uniform integer in [0, bound), bound > 0 (multiply-high reduction).
inline std::uint64_t to_index(std::uint64_t bits, std::uint64_t bound) noexcept {
  return static_cast<std::uint64_t>((static_cast<unsigned __int128>(bits) * bound) >> 64);
}

}  // namespace racer::rng
