#pragma once

#include <cstdint>
#include <random>

namespace potkit {

// Deterministic sub-stream derivation: stream i of a seed never depends on
// how many threads consume the streams.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  return splitmix64(splitmix64(seed) ^ splitmix64(stream + 0x632be59bd9b4e019ULL));
}

using Rng = std::mt19937_64;

inline double uniform01(Rng& g) { return std::generate_canonical<double, 53>(g); }


}  // namespace potkit
