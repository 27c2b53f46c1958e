#pragma once

#include <cstdint>
#include <initializer_list>

namespace steerlab {

// splitmix64 step; also used to expand seeds and to mix hash chains.
uint64_t splitmix64(uint64_t& state);

// FNV-1a 64-bit over a byte range.
uint64_t fnv1a64(const void* data, size_t len, uint64_t seed = 0xcbf29ce484222325ull);

// Derives an independent stream seed from a base seed and a list of
// integer coordinates (prompt index, lambda index, layer, ...). The fold is
// splitmix64-based, so nearby coordinates give unrelated streams.
uint64_t derive_seed(uint64_t base, std::initializer_list<uint64_t> parts);

// xoshiro256** seeded via splitmix64. Small state, portable, and the
// sequence depends only on the seed, never on platform or call site.
class RngState {
 public:
  explicit RngState(uint64_t seed = 0);

  uint64_t next_u64();

  // [0, 1) with 53 random bits.
  double next_double();
  // [0, 1) with 24 random bits.
  float next_float();

  // Uniform integer in [0, n), n >= 1. Multiply-shift (bias < 2^-32 for the
  // range sizes used here).
  uint64_t next_below(uint64_t n);

  // Uniform in [lo, hi).
  double uniform(double lo, double hi);

  // Standard normal via Box-Muller; the spare value is cached.
  double normal();

  uint64_t seed() const { return seed_; }

 private:
  uint64_t s_[4];
  uint64_t seed_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace steerlab
