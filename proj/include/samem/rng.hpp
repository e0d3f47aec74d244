#pragma once

#include <cstdint>

namespace samem {

// SplitMix64. The exact recurrence (golden-ratio increment followed by two
// xor-shift-multiply mixes) is part of this project's reproducibility
// contract: synthetic traces and keyframe draws must be identical across
// platforms and languages, so no std:: engine is used for them.
class SplitMix64 {
 public:
  explicit constexpr SplitMix64(std::uint64_t seed) noexcept : state_(seed) {}

  constexpr std::uint64_t next() noexcept {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  // Uniform double in [0, 1) from the top 53 bits.
  double next_unit() noexcept {
    return static_cast<double>(next() >> 11) * 0x1.0p-53;
  }

  // Uniform double in [-1, 1).
  double next_symmetric() noexcept { return 2.0 * next_unit() - 1.0; }

  // Uniform integer in [0, n). n must be > 0. Plain modulo: the bias is
  // irrelevant at the scales used here and keeps the draw trivially
  // reproducible in other languages.
  std::uint64_t next_below(std::uint64_t n) noexcept { return next() % n; }

 private:
  std::uint64_t state_;
};

}  // namespace samem
