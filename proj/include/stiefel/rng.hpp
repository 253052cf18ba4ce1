#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>
#include <string_view>

namespace stiefel {

using Rng = std::mt19937_64;

/// SplitMix64 finalizer; a bijection on 64-bit integers.
constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// Stream seed for chain `index` under `base`: splitmix64(base xor index * golden).
constexpr std::uint64_t chain_seed(std::uint64_t base, std::uint64_t index) noexcept {
  return splitmix64(base ^ (index * 0x9E3779B97F4A7C15ULL));
}

/// Fold several identifiers into one seed, left to right with chain_seed.
constexpr std::uint64_t mix_seed(std::uint64_t base, std::initializer_list<std::uint64_t> parts) noexcept {
  std::uint64_t s = splitmix64(base);
  for (std::uint64_t p : parts) s = chain_seed(s, p);
  return s;
}

/// 64-bit FNV-1a, used to turn names into seed components.
constexpr std::uint64_t fnv1a(std::string_view text) noexcept {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (char c : text) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001B3ULL;
  }
  return h;
}

}  // namespace stiefel
