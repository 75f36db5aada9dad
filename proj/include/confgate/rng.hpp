#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

namespace confgate {

// SplitMix64: a counter-based generator with a 64-bit state. Each output is a
// pure mix of seed + i*gamma, so the stream depends only on the seed and the
// call index, never on platform or library internals. All randomized results
// in this project flow through this generator so that a recorded seed
// reproduces them bit for bit.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // Uniform in [0, 1), 53 random bits.
  double next_double() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  // Uniform integer in [0, n), n >= 1. Multiply-shift; bias < n / 2^64.
  std::uint64_t next_below(std::uint64_t n) {
    return static_cast<std::uint64_t>(
        (static_cast<unsigned __int128>(next_u64()) * n) >> 64);
  }

  // Standard normal, Box-Muller cosine branch. Two uniforms per draw keeps
  // the stream position a fixed function of the number of calls.
  double next_gaussian() {
    double u1 = (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53;
    double u2 = next_double();
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(2.0 * std::numbers::pi * u2);
  }

 private:
  std::uint64_t state_;
};

// One SplitMix64 finalizer round; whitens seed material.
inline std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Derives the seed of an independent substream (per batch, per trial, ...)
// from a master seed. Deterministic, order-free: stream k can be opened
// without generating streams 0..k-1 first.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) {
  return mix64(master ^ mix64(stream + 0x9e3779b97f4a7c15ULL));
}

}  // namespace confgate
