#pragma once

#include <cstdint>

namespace evea {

inline constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

// SplitMix64 output mixer; full 64-bit avalanche.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z ^= z >> 30;
  z *= 0xBF58476D1CE4E5B9ULL;
  z ^= z >> 27;
  z *= 0x94D049BB133111EBULL;
  z ^= z >> 31;
  return z;
}

// Deterministic sub-stream derivation: keys Monte Carlo replications,
// per-cell experiment seeds and per-generation evaluation seeds.
constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) noexcept {
  return mix64(seed + kGolden * (stream + 1));
}

// Order-independent hash of an index under a stream seed. Drives per-arc
// coin flips so cascade outcomes never depend on traversal order.
constexpr std::uint64_t hash_at(std::uint64_t seed, std::uint64_t index) noexcept {
  return mix64(seed ^ mix64(index + kGolden));
}

// Uniform double in [0, 1) from 64 random bits.
constexpr double unit_from_bits(std::uint64_t bits) noexcept {
  return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

// Counter-based SplitMix64 generator. Standard-library engines are avoided:
// every draw is specified bit-exactly, so runs replay across compilers.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) noexcept : state_(seed) {}

  std::uint64_t next_u64() noexcept {
    state_ += kGolden;
    return mix64(state_);
  }

  double next_unit() noexcept { return unit_from_bits(next_u64()); }

  bool next_bernoulli(double p) noexcept { return next_unit() < p; }

  // Unbiased draw in [0, n); n must be positive. Lemire multiply-shift.
  std::uint64_t next_below(std::uint64_t n) noexcept {
    unsigned __int128 m = static_cast<unsigned __int128>(next_u64()) * n;
    auto low = static_cast<std::uint64_t>(m);
    if (low < n) {
      const std::uint64_t threshold = (0 - n) % n;
      while (low < threshold) {
        m = static_cast<unsigned __int128>(next_u64()) * n;
        low = static_cast<std::uint64_t>(m);
      }
    }
    return static_cast<std::uint64_t>(m >> 64);
  }

  Rng split(std::uint64_t stream) noexcept { return Rng(derive_seed(next_u64(), stream)); }

 private:
  std::uint64_t state_;
};

}  // namespace evea
