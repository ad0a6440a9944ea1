#pragma once

#include <cmath>
#include <cstdint>

#include "qjump/errors.hpp"

namespace qjump {

// Deterministic random streams.
//
// Every stochastic routine in this library draws from Rng, a xoshiro256++
// generator whose four words of state are filled from one 64-bit seed by
// splitmix64. Both algorithms are fixed here, in plain integer arithmetic,
// so the (seed -> stream) mapping is part of the output contract: a given
// seed produces the same draws on any platform and in any future release.
// The standard <random> distributions are deliberately not used because
// their output sequences are implementation-defined.
//
// Draw mappings, in stream order:
//   next()            one raw 64-bit word
//   uniform01()       (next() >> 11) * 2^-53, in [0, 1)
//   exponential(r)    -log1p(-uniform01()) / r          (one word)
//   bernoulli(p)      uniform01() < p                   (one word)
//   poisson(m)        m < 10: Knuth product-of-uniforms (variable words)
//                     m >= 10: PTRS transformed rejection (variable words)
//
// The PTRS accept/reject comparisons involve log/lgamma, so draws on that
// path are bit-stable for a fixed libm; everything else is exact integer
// and IEEE arithmetic.
inline constexpr const char* kRngContract = "xoshiro256++(splitmix64)/v1";

class Rng {
public:
  explicit Rng(std::uint64_t seed) {
    std::uint64_t x = seed;
    for (auto& word : state_) {
      // splitmix64
      x += 0x9E3779B97F4A7C15ull;
      std::uint64_t z = x;
      z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
      z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
      word = z ^ (z >> 31);
    }
  }

  std::uint64_t next() {
    std::uint64_t* s = state_;
    const std::uint64_t result = rotl(s[0] + s[3], 23) + s[0];
    const std::uint64_t t = s[1] << 17;
    s[2] ^= s[0];
    s[3] ^= s[1];
    s[1] ^= s[2];
    s[0] ^= s[3];
    s[2] ^= t;
    s[3] = rotl(s[3], 45);
    return result;
  }

  // Uniform on [0, 1) with 53 random bits.
  double uniform01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  double exponential(double rate) {
    if (!(rate > 0.0)) throw InvalidRate("exponential rate must be > 0");
    return -std::log1p(-uniform01()) / rate;
  }

  bool bernoulli(double p) { return uniform01() < p; }

  std::uint64_t poisson(double mean) {
    if (mean < 0.0) throw InvalidRate("poisson mean must be >= 0");
    return mean < 10.0 ? poisson_knuth(mean) : poisson_ptrs(mean);
  }

private:
  static std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
  }

  std::uint64_t poisson_knuth(double mean) {
    const double limit = std::exp(-mean);
    double prod = 1.0;
    std::uint64_t k = 0;
    for (;;) {
      prod *= uniform01();
      if (prod <= limit) return k;
      ++k;
    }
  }

  // Hormann's PTRS rejection sampler; valid for mean >= 10.
  std::uint64_t poisson_ptrs(double mean) {
    const double log_mean = std::log(mean);
    const double b = 0.931 + 2.53 * std::sqrt(mean);
    const double a = -0.059 + 0.02483 * b;
    const double inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
    const double v_r = 0.9277 - 3.6224 / (b - 2.0);
    for (;;) {
      const double u = uniform01() - 0.5;
      const double v = uniform01();
      const double us = 0.5 - std::abs(u);
      const double kf = std::floor((2.0 * a / us + b) * u + mean + 0.43);
      if (us >= 0.07 && v <= v_r) return static_cast<std::uint64_t>(kf);
      if (kf < 0.0 || (us < 0.013 && v > us)) continue;
      if (std::log(v) + std::log(inv_alpha) - std::log(a / (us * us) + b) <=
          kf * log_mean - mean - std::lgamma(kf + 1.0)) {
        return static_cast<std::uint64_t>(kf);
      }
    }
  }

  std::uint64_t state_[4];
};

}  // namespace qjump
