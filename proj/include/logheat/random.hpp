#pragma once

#include <cmath>
#include <cstdint>

namespace logheat {

/// Counter-based generator: every draw is a pure function of
/// (seed, stream, counter), so parallel and serial runs agree bit for bit.
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t seed) : seed_(seed) {}

  std::uint64_t bits(std::uint64_t stream, std::uint64_t counter) const {
    std::uint64_t h = mix(seed_ ^ 0x9e3779b97f4a7c15ULL);
    h = mix(h ^ (stream * 0xd1b54a32d192ed03ULL));
    return mix(h ^ (counter * 0xaef17502108ef2d9ULL + 0x632be59bd9b4e019ULL));
  }

  /// Uniform on the open interval (0, 1).
  double uniform(std::uint64_t stream, std::uint64_t counter) const {
    return (static_cast<double>(bits(stream, counter) >> 11) + 0.5) * 0x1.0p-53;
  }

  /// Standard normal via Box–Muller on counters 2k and 2k+1.
  double normal(std::uint64_t stream, std::uint64_t k) const {
    const double u1 = uniform(stream, 2 * k);
    const double u2 = uniform(stream, 2 * k + 1);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
  }

 private:
  static std::uint64_t mix(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  std::uint64_t seed_;
};

}  // namespace logheat
