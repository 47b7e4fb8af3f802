#pragma once

// Reproducible per-path random streams.
//
// Each trajectory gets its own generator keyed by (master seed, path id)
// through a SplitMix64 counter split, so ensemble output is independent of
// how paths are scheduled across worker threads.

#include <cstdint>
#include <cmath>

namespace saddle {

inline uint64_t splitmix64(uint64_t& state) {
  uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// xoshiro256++ seeded via SplitMix64 from a (seed, stream) pair.
class Rng {
 public:
  Rng(uint64_t seed, uint64_t stream) {
    uint64_t sm = seed ^ (0x6a09e667f3bcc909ULL + stream * 0x2545f4914f6cdd1dULL);
    for (auto& w : s_) w = splitmix64(sm);
  }

  uint64_t next_u64() {
    uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
    uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
  }

  /// Uniform on (0, 1]; never returns 0, so log() below is safe.
  double next_uniform() {
    return (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53;
  }

  /// One Box-Muller pair of independent standard normals. Exactly two
  /// uniforms are consumed per call, keeping draw counts step-aligned.
  void next_normal_pair(double& z1, double& z2) {
    double u1 = next_uniform();
    double u2 = next_uniform();
    double r = std::sqrt(-2.0 * std::log(u1));
    double phi = 6.283185307179586476925286766559 * u2;
    z1 = r * std::cos(phi);
    z2 = r * std::sin(phi);
  }

  double next_normal() {
    double z1, z2;
    next_normal_pair(z1, z2);
    return z1;
  }

 private:
  static uint64_t rotl(uint64_t v, int k) { return (v << k) | (v >> (64 - k)); }
  uint64_t s_[4];
};

/// Stream for simulation path `path_id` under master seed `seed`.
inline Rng path_stream(uint64_t seed, uint64_t path_id) {
  return Rng(seed, path_id);
}

/// Streams for limit-law sampling, kept disjoint from path streams.
inline Rng sampler_stream(uint64_t seed, uint64_t index) {
  return Rng(seed ^ 0xa5a5a5a5deadbeefULL, index);
}

}  // namespace saddle
