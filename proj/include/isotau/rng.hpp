#pragma once

#include <cstdint>
#include <string_view>

namespace isotau {

// splitmix64; every randomized check draws from its own stream
struct SplitMix64 {
  std::uint64_t state;

  explicit SplitMix64(std::uint64_t seed) : state(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state += 0x9E3779B97F4A7C15ull);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }

  // top 53 bits, [0, 1)
  double uniform() { return double(next() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
};

inline std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

// stream for a named check under a scenario seed
inline SplitMix64 stream_for(std::uint64_t seed, std::string_view name) {
  SplitMix64 g(seed ^ fnv1a(name));
  g.next();
  return g;
}

}  // namespace isotau
