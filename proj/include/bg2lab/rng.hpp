#ifndef BG2LAB_RNG_HPP
#define BG2LAB_RNG_HPP

#include <cmath>
#include <cstdint>
#include <random>

namespace bg2lab {

using Rng = std::mt19937_64;

// splitmix64 finalizer; the replica-seed derivation below is documented in the
// README so that other tooling can reproduce the streams.
inline std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ull;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

/// Derives the seed of replica `index` from a 64-bit base seed.
/// seed(base, i) = splitmix64(base XOR splitmix64(i + 1)).
inline std::uint64_t seed_stream(std::uint64_t base_seed, std::uint64_t index) {
  return splitmix64(base_seed ^ splitmix64(index + 1));
}

inline Rng make_rng(std::uint64_t base_seed, std::uint64_t index) {
  return Rng(seed_stream(base_seed, index));
}

// Uniform in [0,1) built from the top 53 bits of the engine output.  The
// standard distributions are implementation-defined, these transforms are not.
inline double uniform_double(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline double exponential(Rng& rng, double rate) {
  // inverse CDF; 1-u is in (0,1] so the log is finite
  return -std::log(1.0 - uniform_double(rng)) / rate;
}

}  // namespace bg2lab

#endif
