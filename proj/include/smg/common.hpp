#pragma once

#include <Eigen/Core>

#include <charconv>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace smg {

using Vector = Eigen::VectorXd;

// Deterministic 64-bit PRNG (splitmix64, Steele/Lea/Flood mixing constants).
// Chosen over std::mt19937_64 + std::uniform_int_distribution because the
// standard leaves distribution algorithms implementation-defined; this stream
// is identical on every platform, which the reproducibility contract needs.
struct SplitMix64 {
  std::uint64_t state = 0;

  explicit SplitMix64(std::uint64_t seed) : state(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // Unbiased integer in [0, bound) by rejection sampling.
  std::uint64_t below(std::uint64_t bound) {
    if (bound == 0) throw std::invalid_argument("below: bound must be positive");
    const std::uint64_t threshold = (0 - bound) % bound;
    for (;;) {
      const std::uint64_t r = next();
      if (r >= threshold) return r % bound;
    }
  }

  // Uniform double in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  // Standard normal via Box-Muller (no cached spare: stateless cross-platform).
  double normal() {
    double u1 = uniform();
    while (u1 == 0.0) u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
  }
};

// Derives an independent stream for (seed, tag, counter) so per-epoch draws do
// not depend on how many values earlier epochs consumed.
inline std::uint64_t derive_stream(std::uint64_t seed, std::uint64_t tag,
                                   std::uint64_t counter) {
  SplitMix64 g(seed ^ (tag * 0x9e3779b97f4a7c15ULL));
  g.state += counter * 0xda942042e4dd58b5ULL;
  return g.next();
}

// Stream tags so different consumers of the same run seed never collide.
inline constexpr std::uint64_t kStreamPermutation = 1;
inline constexpr std::uint64_t kStreamOutputDraw = 2;
inline constexpr std::uint64_t kStreamIidSampling = 3;
inline constexpr std::uint64_t kStreamSynthesis = 4;
inline constexpr std::uint64_t kStreamSplit = 5;

// Shortest round-trip decimal form; locale-free and byte-stable, used for all
// CSV/JSON numeric output.
inline std::string format_double(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

// log(1 + exp(z)) without overflow for large |z|.
inline double log1pexp(double z) {
  return std::max(z, 0.0) + std::log1p(std::exp(-std::abs(z)));
}

// 1 / (1 + exp(-z)), evaluated on the stable side.
inline double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

}  // namespace smg
