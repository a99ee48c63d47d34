#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace taildep {

// splitmix64 step; also the seed scrambler for substreams.
inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Seed for logical substream `stream` of a run keyed by `seed`. Two scramble
// rounds keep nearby (seed, stream) pairs statistically unrelated.
inline std::uint64_t substream_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t s = seed;
  const std::uint64_t a = splitmix64(s);
  s = a ^ (stream * 0xd1342543de82ef95ULL + 0x2545f4914f6cdd1dULL);
  return splitmix64(s);
}

// Deterministic random stream: mt19937_64 with fixed bit-to-double
// conversions, so draws do not depend on libstdc++ distribution internals.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed) : eng_(seed) {}

  static RandomStream substream(std::uint64_t seed, std::uint64_t stream) {
    return RandomStream(substream_seed(seed, stream));
  }

  // Uniform on the open interval (0,1); never returns an endpoint.
  double uniform() { return (static_cast<double>(eng_() >> 11) + 0.5) * 0x1.0p-53; }

  // Uniform on [0,1).
  double uniform_halfopen() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

  // Exp(1).
  double exponential() { return -std::log(uniform()); }

  // Standard normal, Marsaglia polar method.
  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double v1, v2, s;
    do {
      v1 = 2.0 * uniform() - 1.0;
      v2 = 2.0 * uniform() - 1.0;
      s = v1 * v1 + v2 * v2;
    } while (s >= 1.0 || s == 0.0);
    const double fac = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v2 * fac;
    have_spare_ = true;
    return v1 * fac;
  }

 private:
  std::mt19937_64 eng_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

}  // namespace taildep
