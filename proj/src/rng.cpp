#include "steerlab/rng.hpp"

#include <cmath>
#include <cstring>

namespace steerlab {

uint64_t splitmix64(uint64_t& state) {
  uint64_t z = (state += 0x9e3779b97f4a7c15ull);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

uint64_t fnv1a64(const void* data, size_t len, uint64_t seed) {
  const unsigned char* p = static_cast<const unsigned char*>(data);
  uint64_t h = seed;
  for (size_t i = 0; i < len; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ull;
  }
  return h;
}

uint64_t derive_seed(uint64_t base, std::initializer_list<uint64_t> parts) {
  uint64_t h = base;
  (void)splitmix64(h);
  uint64_t acc = h;
  for (uint64_t part : parts) {
    uint64_t s = acc ^ (part + 0x9e3779b97f4a7c15ull);
    acc = splitmix64(s);
  }
  return acc;
}

namespace {
inline uint64_t rotl(uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }
}  // namespace

RngState::RngState(uint64_t seed) : seed_(seed) {
  uint64_t sm = seed;
  for (auto& s : s_) s = splitmix64(sm);
}

uint64_t RngState::next_u64() {
  const uint64_t result = rotl(s_[1] * 5, 7) * 9;
  const uint64_t t = s_[1] << 17;
  s_[2] ^= s_[0];
  s_[3] ^= s_[1];
  s_[1] ^= s_[2];
  s_[0] ^= s_[3];
  s_[2] ^= t;
  s_[3] = rotl(s_[3], 45);
  return result;
}

double RngState::next_double() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

float RngState::next_float() {
  return static_cast<float>(next_u64() >> 40) * 0x1.0p-24f;
}

uint64_t RngState::next_below(uint64_t n) {
  return static_cast<uint64_t>(
      (static_cast<unsigned __int128>(next_u64()) * n) >> 64);
}

double RngState::uniform(double lo, double hi) {
  return lo + (hi - lo) * next_double();
}

double RngState::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  double u1 = 0.0;
  do {
    u1 = next_double();
  } while (u1 <= 0.0);
  const double u2 = next_double();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double theta = 2.0 * M_PI * u2;
  spare_ = r * std::sin(theta);
  has_spare_ = true;
  return r * std::cos(theta);
}

}  // namespace steerlab
