#pragma once

#include <cstdint>

namespace floodiam {

/// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Counter-based random stream (SplitMix64). Streams are cheap values;
/// independent substreams are derived by keying a parent seed, so a draw
/// for one key never depends on which other keys were used.
class RngStream {
 public:
  constexpr explicit RngStream(std::uint64_t seed) : state_(mix64(seed ^ 0x6a09e667f3bcc909ULL)) {}

  /// Substream for (seed, key). Different keys give statistically
  /// independent streams.
  static RngStream keyed(std::uint64_t seed, std::uint64_t key);
  static RngStream keyed(std::uint64_t seed, std::uint64_t key_a, std::uint64_t key_b);

  std::uint64_t next_u64();
  /// Uniform on [0, 1) with 53 random bits.
  double uniform();
  /// Uniform on the open interval (0, 1).
  double uniform_open();
  /// Uniform integer on [0, n); n must be positive.
  std::uint64_t below(std::uint64_t n);

 private:
  std::uint64_t state_;
};

}  // namespace floodiam
