#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace onnsim {

using Rng = std::mt19937_64;

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

// Derives an independent, reproducible child seed from a master seed and a
// purpose tag ("forming", "phase:2", ...). Experiments that run side by side
// get disjoint streams without coordinating.
inline std::uint64_t derive_seed(std::uint64_t seed, std::string_view tag) {
  return splitmix64(seed ^ fnv1a64(tag));
}

inline Rng make_rng(std::uint64_t seed, std::string_view tag) {
  return Rng{derive_seed(seed, tag)};
}

}  // namespace onnsim
