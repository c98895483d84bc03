#pragma once

#include <cmath>
#include <cstdint>

namespace rps {

// Philox4x32-10 counter-based generator (constants from Salmon et al.,
// "Parallel random numbers: as easy as 1, 2, 3"). A 128-bit counter and a
// 64-bit key map to four 32-bit words; distinct counters never collide, so
// draws can be evaluated in any order by any number of threads.
struct Philox4x32 {
  static constexpr uint32_t kMulA = 0xD2511F53u;
  static constexpr uint32_t kMulB = 0xCD9E8D57u;
  static constexpr uint32_t kWeylA = 0x9E3779B9u;
  static constexpr uint32_t kWeylB = 0xBB67AE85u;

  static void block(const uint32_t ctr[4], const uint32_t key[2], uint32_t out[4]) {
    uint32_t c0 = ctr[0], c1 = ctr[1], c2 = ctr[2], c3 = ctr[3];
    uint32_t k0 = key[0], k1 = key[1];
    for (int round = 0; round < 10; ++round) {
      if (round != 0) {
        k0 += kWeylA;
        k1 += kWeylB;
      }
      const uint64_t p0 = uint64_t(kMulA) * c0;
      const uint64_t p1 = uint64_t(kMulB) * c2;
      const uint32_t n0 = uint32_t(p1 >> 32) ^ c1 ^ k0;
      const uint32_t n1 = uint32_t(p1);
      const uint32_t n2 = uint32_t(p0 >> 32) ^ c3 ^ k1;
      const uint32_t n3 = uint32_t(p0);
      c0 = n0;
      c1 = n1;
      c2 = n2;
      c3 = n3;
    }
    out[0] = c0;
    out[1] = c1;
    out[2] = c2;
    out[3] = c3;
  }
};

// One standard normal draw keyed by (seed, stream, cell, component), via
// Box-Muller on the four Philox output words. u1 lies in (0,1], u2 in [0,1).
inline double keyed_standard_normal(uint64_t seed, uint32_t stream, int64_t cell,
                                    uint32_t component) {
  const uint64_t ucell = static_cast<uint64_t>(cell);  // two's complement for cell < 0
  const uint32_t ctr[4] = {uint32_t(ucell), uint32_t(ucell >> 32), stream, component};
  const uint32_t key[2] = {uint32_t(seed), uint32_t(seed >> 32)};
  uint32_t r[4];
  Philox4x32::block(ctr, key, r);
  const uint64_t a = (uint64_t(r[1]) << 32) | r[0];
  const uint64_t b = (uint64_t(r[3]) << 32) | r[2];
  const double u1 = (double(a >> 11) + 1.0) * 0x1.0p-53;
  const double u2 = double(b >> 11) * 0x1.0p-53;
  constexpr double two_pi = 6.283185307179586476925286766559;
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(two_pi * u2);
}

// Uniform in [0,1), same keying scheme. Used by deterministic probing code.
inline double keyed_uniform(uint64_t seed, uint32_t stream, int64_t cell, uint32_t component) {
  const uint64_t ucell = static_cast<uint64_t>(cell);
  const uint32_t ctr[4] = {uint32_t(ucell), uint32_t(ucell >> 32), stream, component};
  const uint32_t key[2] = {uint32_t(seed), uint32_t(seed >> 32)};
  uint32_t r[4];
  Philox4x32::block(ctr, key, r);
  const uint64_t a = (uint64_t(r[1]) << 32) | r[0];
  return double(a >> 11) * 0x1.0p-53;
}

}  // namespace rps
