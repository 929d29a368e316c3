#pragma once

#include <cstdint>
#include <cmath>

namespace bhsim::rng {

// SplitMix64 step; also used as the mixing function when deriving substreams.
inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline std::uint64_t mix(std::uint64_t a, std::uint64_t b) {
  std::uint64_t s = a ^ (b + 0x9e3779b97f4a7c15ULL + (a << 6) + (a >> 2));
  return splitmix64(s);
}

// Counter-based stream with hand-rolled distributions so that sequences are
// bit-identical across standard library implementations.
class Stream {
 public:
  Stream() = default;
  explicit Stream(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() { return splitmix64(state_); }

  // Uniform in [0, 1) with 53-bit resolution.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n) { return next_u64() % n; }

  // Standard normal via Box-Muller; no caching so draw order stays simple.
  double gaussian() {
    double u1 = uniform();
    double u2 = uniform();
    if (u1 <= 0.0) u1 = 0x1.0p-53;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
  }

  double gaussian(double mean, double sigma) { return mean + sigma * gaussian(); }

 private:
  std::uint64_t state_ = 0;
};

// Derives an independent stream from a master seed and up to four tag values.
// Streams derived from distinct tag tuples are decorrelated, so per-UE and
// per-(UE, BS) randomness does not depend on iteration order.
inline Stream substream(std::uint64_t master, std::uint64_t a, std::uint64_t b = 0,
                        std::uint64_t c = 0, std::uint64_t d = 0) {
  std::uint64_t s = mix(master, a);
  s = mix(s, b);
  s = mix(s, c);
  s = mix(s, d);
  return Stream(s);
}

// One-shot standard normal keyed by a tag tuple; used for shadow-fading
// segments and per-frame perturbations so re-evaluation never consumes state.
inline double keyed_gaussian(std::uint64_t master, std::uint64_t a, std::uint64_t b,
                             std::uint64_t c, std::uint64_t d = 0) {
  Stream s = substream(master, a, b, c, d);
  return s.gaussian();
}

}  // namespace bhsim::rng
