#pragma once

#include <cmath>
#include <cstdint>

namespace qsn {

// Philox4x32-10 block function (Salmon et al., "Parallel random numbers:
// as easy as 1, 2, 3"). Pure function of (counter, key), which is what lets
// every (shot, slot, purpose) tuple own an independent stream with no state
// to hand around between workers.
namespace philox {

constexpr uint32_t kW32A = 0x9E3779B9u;
constexpr uint32_t kW32B = 0xBB67AE85u;
constexpr uint32_t kM4x32A = 0xD2511F53u;
constexpr uint32_t kM4x32B = 0xCD9E8D57u;

inline void round(uint32_t c[4], uint32_t k0, uint32_t k1) {
  const uint64_t p0 = static_cast<uint64_t>(kM4x32A) * c[0];
  const uint64_t p1 = static_cast<uint64_t>(kM4x32B) * c[2];
  const uint32_t hi0 = static_cast<uint32_t>(p0 >> 32);
  const uint32_t lo0 = static_cast<uint32_t>(p0);
  const uint32_t hi1 = static_cast<uint32_t>(p1 >> 32);
  const uint32_t lo1 = static_cast<uint32_t>(p1);
  c[0] = hi1 ^ c[1] ^ k0;
  c[1] = lo1;
  c[2] = hi0 ^ c[3] ^ k1;
  c[3] = lo0;
}

inline void block(const uint32_t ctr[4], uint32_t k0, uint32_t k1,
                  uint32_t out[4]) {
  out[0] = ctr[0];
  out[1] = ctr[1];
  out[2] = ctr[2];
  out[3] = ctr[3];
  for (int r = 0; r < 10; ++r) {
    if (r > 0) {
      k0 += kW32A;
      k1 += kW32B;
    }
    round(out, k0, k1);
  }
}

}  // namespace philox

// Stream purposes. Baked into the counter so that e.g. the error sampler and
// the twirl sampler of the same shot never collide.
enum class Stream : uint32_t {
  kError = 1,
  kTwirl = 2,
  kPecInverse = 3,
  kReadout = 4,
  kMonitorFlip = 5,
  kDrift = 6,
  kModulation = 7,
  kBootstrap = 8,
  kTheory = 9,
  kLandscape = 10,
  kRealize = 11,
};

// One logical random stream addressed by (seed, a, b, purpose). The 128-bit
// Philox counter is laid out [running, purpose, b, a]; the 64-bit seed is the
// key. Each stream yields 2^32 blocks of four 32-bit words.
class RngStream {
 public:
  RngStream(uint64_t seed, uint64_t a, uint32_t b, Stream purpose)
      : key0_(static_cast<uint32_t>(seed)),
        key1_(static_cast<uint32_t>(seed >> 32)) {
    // fold the high half of `a` into the purpose word so 64-bit shot indices
    // stay collision-free
    base_[0] = 0;
    base_[1] = static_cast<uint32_t>(purpose) ^
               (static_cast<uint32_t>(a >> 32) * 0x85EBCA6Bu);
    base_[2] = b;
    base_[3] = static_cast<uint32_t>(a);
    pos_ = 4;
    n_ = 0;
  }

  uint32_t next_u32() {
    if (pos_ == 4) {
      uint32_t ctr[4] = {n_++, base_[1], base_[2], base_[3]};
      philox::block(ctr, key0_, key1_, buf_);
      pos_ = 0;
    }
    return buf_[pos_++];
  }

  uint64_t next_u64() {
    const uint64_t hi = next_u32();
    return (hi << 32) | next_u32();
  }

  // uniform on [0,1) with 53 random bits
  double uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  bool bernoulli(double p) { return uniform() < p; }

  // single-word Bernoulli for tight loops; precompute the threshold once
  static uint64_t bernoulli_threshold(double p) {
    if (p <= 0.0) return 0;
    if (p >= 1.0) return uint64_t{1} << 32;
    return static_cast<uint64_t>(p * 0x1.0p32);
  }
  bool bernoulli_u32(uint64_t threshold) { return next_u32() < threshold; }

  // standard normal via Box-Muller; second member of each pair is cached
  double normal() {
    if (have_cached_) {
      have_cached_ = false;
      return cached_;
    }
    double u1 = uniform();
    const double u2 = uniform();
    if (u1 <= 0.0) u1 = 0x1.0p-53;
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double t = 6.283185307179586476925286766559 * u2;
    cached_ = r * std::sin(t);
    have_cached_ = true;
    return r * std::cos(t);
  }

  // integer uniform on [0, bound) via rejection, bound >= 1
  uint32_t below(uint32_t bound) {
    const uint32_t threshold = (0u - bound) % bound;
    for (;;) {
      const uint32_t r = next_u32();
      if (r >= threshold) return r % bound;
    }
  }

 private:
  uint32_t key0_, key1_;
  uint32_t base_[4];
  uint32_t buf_[4];
  uint32_t n_;
  int pos_;
  double cached_ = 0.0;
  bool have_cached_ = false;
};

}  // namespace qsn
