#ifndef ADRMTL_RNG_HPP
#define ADRMTL_RNG_HPP

#include <cstdint>
#include <random>
#include <string_view>

namespace adrmtl {

// FNV-1a over a byte string; stable across platforms.
inline std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

// All randomness in a run flows from one seed through named substreams,
// so one module cannot perturb another module's stream.
inline std::mt19937_64 substream(std::uint64_t seed, std::string_view name) {
  std::seed_seq seq{seed, fnv1a(name)};
  return std::mt19937_64(seq);
}

}  // namespace adrmtl

#endif  // ADRMTL_RNG_HPP
