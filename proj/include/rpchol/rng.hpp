#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <initializer_list>

namespace rpchol {

/// Counter-based pseudorandom generator (SplitMix64).
///
/// The state advances by a fixed odd increment and every output is a bijective
/// finalizer of the state, so a stream is fully determined by its 64-bit seed.
/// Stream discipline used throughout this library:
///   - every randomized routine takes a `seed` and owns exactly one stream;
///   - one uniform is consumed per discrete draw (see sample_proportional);
///   - substreams for independent work units (e.g. benchmark trials) are
///     derived with derive_stream, never by sharing a generator.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  /// Uniform double in [0, 1) with 53 random bits.
  double next_double() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

 private:
  std::uint64_t state_;
};

/// Derives the seed of an independent substream from a base seed and tags.
inline std::uint64_t derive_stream(std::uint64_t seed,
                                   std::initializer_list<std::uint64_t> tags) {
  SplitMix64 h(seed);
  std::uint64_t out = h.next_u64();
  for (std::uint64_t t : tags) {
    SplitMix64 g(out ^ (t + 0x9e3779b97f4a7c15ULL));
    out = g.next_u64();
  }
  return out;
}

/// Standard normal deviate via Box-Muller; consumes exactly two uniforms.
double sample_normal(SplitMix64& rng);

/// Draws an index with probability weights[i] / total over nonnegative
/// weights, by inverse CDF over a linear scan. Consumes exactly one uniform.
/// Entries that are not strictly positive can never be selected.
Eigen::Index sample_proportional(const Eigen::VectorXd& weights, double total,
                                 SplitMix64& rng);

}  // namespace rpchol
