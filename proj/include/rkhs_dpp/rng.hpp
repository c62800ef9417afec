#pragma once

#include <cstdint>

namespace rdpp {

/// SplitMix64: 64-bit state advanced by a fixed odd increment, so stream i of a
/// seed is reachable in O(1) via `split`.
class SplitMix64 {
 public:
  static constexpr const char* kName = "splitmix64";

  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  /// Uniform in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  /// Independent generator for substream `index`.
  SplitMix64 split(std::uint64_t index) const {
    SplitMix64 g(state_ ^ (0xd1b54a32d192ed03ULL * (index + 1)));
    g.next();
    return g;
  }

 private:
  std::uint64_t state_;
};

}  // namespace rdpp
