#ifndef BNEM_RNG_HPP
#define BNEM_RNG_HPP

#include <cstdint>

namespace bnem {

/// splitmix64 generator. Pure 64-bit integer state, so sequences are
/// bit-identical across platforms and compilers. Substreams are derived
/// from (seed, stream_id); data generation and masking use one stream per
/// record index so draws do not depend on processing order.
///
/// stream(seed, id) state = mix(seed + 0x9E3779B97F4A7C15 * (id + 1))
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  static SplitMix64 stream(std::uint64_t seed, std::uint64_t stream_id) {
    return SplitMix64(mix(seed + kGamma * (stream_id + 1)));
  }

  std::uint64_t next() {
    state_ += kGamma;
    return mix(state_);
  }

  /// Uniform in [0, 1), 53 random mantissa bits.
  double next_unit() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  /// Uniform integer in [0, n), n >= 1. Modulo bias is irrelevant at the
  /// cardinalities used here (n far below 2^32).
  std::uint64_t next_below(std::uint64_t n) { return next() % n; }

 private:
  static constexpr std::uint64_t kGamma = 0x9E3779B97F4A7C15ull;

  static std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }

  std::uint64_t state_;
};

}  // namespace bnem

#endif  // BNEM_RNG_HPP
