#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <cstdint>

namespace memsim::rng {

// SplitMix64 finalizer, used for seeding and stream derivation.
constexpr std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// xoshiro256** with a Marsaglia polar Gaussian on top. Self-contained so
// results are identical regardless of the standard library in use.
class Stream {
 public:
  explicit Stream(std::uint64_t seed) {
    std::uint64_t s = seed;
    for (auto& w : state_) {
      s = mix64(s);
      w = s ? s : 0x6a09e667f3bcc909ULL;
    }
  }

  std::uint64_t next_u64() {
    const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
  }

  // Uniform in [0, 1).
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // Standard normal.
  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u, v, s;
    do {
      u = 2.0 * uniform() - 1.0;
      v = 2.0 * uniform() - 1.0;
      s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double f = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * f;
    have_spare_ = true;
    return u * f;
  }

  // Circular complex Gaussian with <|z|^2> = mean_sq, <z^2> = 0.
  std::complex<double> circular_normal(double mean_sq) {
    const double s = std::sqrt(0.5 * mean_sq);
    return {s * normal(), s * normal()};
  }

 private:
  static constexpr std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
  }
  std::array<std::uint64_t, 4> state_{};
  bool have_spare_ = false;
  double spare_ = 0.0;
};

// Stream splitting rule: the master seed is hashed once, the (index+1)-scaled
// golden ratio is added, and the result is hashed again to seed the stream.
// Streams for distinct indices are independent and order-free, so ensembles
// can run in parallel and still aggregate deterministically.
inline Stream substream(std::uint64_t master_seed, std::uint64_t index) {
  const std::uint64_t h = mix64(master_seed);
  return Stream(mix64(h + 0x9e3779b97f4a7c15ULL * (index + 1)));
}

}  // namespace memsim::rng
