#pragma once

// Counter-based random streams. A stream is identified by (seed, stream id);
// the k-th output is a pure function of (seed, stream id, k), so replications
// can be evaluated in any order or on any thread with identical results.

#include <cmath>
#include <cstdint>
#include <numbers>

namespace qrlof {

inline std::uint64_t mix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

// Derives a child seed, e.g. (experiment seed, "bootstrap", replication).
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t tag,
                                 std::uint64_t index) noexcept {
  return mix64(mix64(seed ^ 0x6A09E667F3BCC909ULL) + mix64(tag + 0x3C6EF372FE94F82BULL) +
               index * 0x9E3779B97F4A7C15ULL);
}

class Stream {
 public:
  Stream(std::uint64_t seed, std::uint64_t stream_id) noexcept
      : key_(derive_seed(seed, 0x5EED, stream_id)) {}

  std::uint64_t next_u64() noexcept {
    ++counter_;
    return mix64(key_ + counter_ * 0x9E3779B97F4A7C15ULL);
  }

  // Uniform on [0, 1) with 53 random bits.
  double uniform() noexcept {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) noexcept {
    return lo + (hi - lo) * uniform();
  }

  // Box-Muller; the second variate of each pair is cached.
  double normal() noexcept {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double u1 = 1.0 - uniform();  // (0, 1]
    const double u2 = uniform();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    spare_ = radius * std::sin(angle);
    has_spare_ = true;
    return radius * std::cos(angle);
  }

  double exponential() noexcept { return -std::log(1.0 - uniform()); }

  // Marsaglia-Tsang; shape < 1 handled by the usual power boost.
  double gamma(double shape) noexcept {
    if (shape < 1.0) {
      const double boost = std::pow(1.0 - uniform(), 1.0 / shape);
      return gamma(shape + 1.0) * boost;
    }
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
      double x = 0.0;
      double v = 0.0;
      do {
        x = normal();
        v = 1.0 + c * x;
      } while (v <= 0.0);
      v = v * v * v;
      const double u = 1.0 - uniform();
      if (std::log(u) < 0.5 * x * x + d - d * v + d * std::log(v)) return d * v;
    }
  }

  double chi_squared(double df) noexcept { return 2.0 * gamma(0.5 * df); }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace qrlof
