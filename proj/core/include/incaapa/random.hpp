#pragma once

#include <array>
#include <cstdint>
#include <limits>

#include "incaapa/linalg.hpp"

namespace incaapa {

/// One step of the splitmix64 sequence; advances `state`.
std::uint64_t splitmix64(std::uint64_t& state);

/// Deterministic child seed for (master, stream, index). Independent streams
/// (per trial, per node, signal vs. noise) are drawn from distinct tags.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream,
                          std::uint64_t index = 0);

/// Stream tags used with derive_seed().
namespace streams {
inline constexpr std::uint64_t kTrial = 0x7472'6961'6cULL;
inline constexpr std::uint64_t kSignal = 0x7369'676e'616cULL;
inline constexpr std::uint64_t kNoise = 0x6e6f'6973'65ULL;
inline constexpr std::uint64_t kProfile = 0x7072'6f66'696cULL;
inline constexpr std::uint64_t kMoments = 0x6d6f'6d65'6e74ULL;
}  // namespace streams

/// xoshiro256** (Blackman & Vigna), seeded by expanding a 64-bit seed with
/// splitmix64. Satisfies UniformRandomBitGenerator.
class Xoshiro256 {
 public:
  using result_type = std::uint64_t;

  explicit Xoshiro256(std::uint64_t seed);

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() {
    return std::numeric_limits<result_type>::max();
  }

  result_type operator()();

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform();

  /// Circular complex Gaussian with E[|z|²] = variance: Box–Muller on two
  /// uniforms gives independent real and imaginary parts, each with
  /// variance/2.
  cplx complex_gaussian(double variance);

 private:
  std::array<std::uint64_t, 4> s_{};
};

}  // namespace incaapa
