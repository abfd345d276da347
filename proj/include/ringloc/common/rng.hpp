#ifndef RINGLOC_COMMON_RNG_HPP
#define RINGLOC_COMMON_RNG_HPP

#include <cstdint>
#include <random>

namespace ringloc {

/// Portable deterministic random source.
///
/// The engine is std::mt19937_64, whose output sequence is fixed by the C++
/// standard. The standard library distributions are implementation-defined,
/// so the variates are derived here instead:
///   uniform01: top 53 bits of one draw, scaled by 2^-53, in [0, 1)
///   normal:    Box-Muller on two uniform01 draws, cosine branch only
/// Any platform with IEEE doubles and the same libm sin/cos/log yields the
/// same streams.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  /// Integer in [0, n).
  std::uint64_t below(std::uint64_t n) { return n == 0 ? 0 : engine_() % n; }

  double normal(double mean = 0.0, double sigma = 1.0);

  bool bernoulli(double p) { return uniform01() < p; }

 private:
  std::mt19937_64 engine_;
};

/// SplitMix64 finalizer; used to derive independent per-item seeds so that
/// parallel workers never share a stream.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream);

}  // namespace ringloc

#endif  // RINGLOC_COMMON_RNG_HPP
