#pragma once

// Philox4x32-10 counter-based generator (Salmon et al., SC'11), plus the
// small set of portable samplers the Monte Carlo needs. Standard library
// distributions are implementation-defined, so they are not used: the
// same (seed, stream) must give the same numbers with any toolchain.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>

#include "wvtilt/constants.hpp"

namespace wvtilt {

using philox_counter = std::array<std::uint32_t, 4>;
using philox_key = std::array<std::uint32_t, 2>;

inline philox_counter philox4x32_10(philox_counter ctr, philox_key key) {
  constexpr std::uint32_t m0 = 0xD2511F53u, m1 = 0xCD9E8D57u;
  constexpr std::uint32_t w0 = 0x9E3779B9u, w1 = 0xBB67AE85u;
  for (int round = 0; round < 10; ++round) {
    if (round > 0) {
      key[0] += w0;
      key[1] += w1;
    }
    const std::uint64_t p0 = static_cast<std::uint64_t>(m0) * ctr[0];
    const std::uint64_t p1 = static_cast<std::uint64_t>(m1) * ctr[2];
    ctr = {static_cast<std::uint32_t>(p1 >> 32) ^ ctr[1] ^ key[0], static_cast<std::uint32_t>(p1),
           static_cast<std::uint32_t>(p0 >> 32) ^ ctr[3] ^ key[1], static_cast<std::uint32_t>(p0)};
  }
  return ctr;
}

/// Sequential stream over one (seed, stream id) pair. Word j of the stream
/// comes from counter block (j / 4, stream_lo, stream_hi).
class PhiloxStream {
 public:
  PhiloxStream(std::uint64_t seed, std::uint64_t stream)
      : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
        stream_lo_(static_cast<std::uint32_t>(stream)),
        stream_hi_(static_cast<std::uint32_t>(stream >> 32)) {}

  std::uint32_t next_u32() {
    if (used_ == 4) {
      block_ = philox4x32_10({static_cast<std::uint32_t>(block_index_), static_cast<std::uint32_t>(block_index_ >> 32),
                              stream_lo_, stream_hi_},
                             key_);
      ++block_index_;
      used_ = 0;
    }
    return block_[used_++];
  }

  /// Uniform on the open interval (0, 1) with 53 random bits.
  double uniform() {
    const std::uint64_t hi = next_u32();
    const std::uint64_t lo = next_u32();
    const std::uint64_t bits = ((hi << 32) | lo) >> 11;
    return (static_cast<double>(bits) + 0.5) * 0x1.0p-53;
  }

  /// Standard normal by the Box-Muller transform; the second variate is cached.
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double r = std::sqrt(-2.0 * std::log(uniform()));
    const double t = 2.0 * constants::pi * uniform();
    spare_ = r * std::sin(t);
    has_spare_ = true;
    return r * std::cos(t);
  }

  /// Poisson variate returned as a double (counts can exceed 2^31).
  double poisson(double mean) {
    if (!(mean > 0.0)) return 0.0;
    if (mean < 10.0) {
      // multiplication method
      const double limit = std::exp(-mean);
      double p = 1.0;
      double k = 0.0;
      while (true) {
        p *= uniform();
        if (p <= limit) return k;
        k += 1.0;
      }
    }
    if (mean > 1e9) {
      // PTRS acceptance loses precision to cancellation up here; use the
      // Gaussian limit, whose skewness is below 3e-5 at these means.
      return std::max(0.0, std::floor(mean + std::sqrt(mean) * normal() + 0.5));
    }
    return poisson_ptrs(mean);
  }

 private:
  // Transformed rejection with squeeze (Hormann 1993).
  double poisson_ptrs(double mean) {
    const double slam = std::sqrt(mean);
    const double loglam = std::log(mean);
    const double b = 0.931 + 2.53 * slam;
    const double a = -0.059 + 0.02483 * b;
    const double inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
    const double vr = 0.9277 - 3.6224 / (b - 2.0);
    while (true) {
      const double u = uniform() - 0.5;
      const double v = uniform();
      const double us = 0.5 - std::abs(u);
      const double k = std::floor((2.0 * a / us + b) * u + mean + 0.43);
      if (us >= 0.07 && v <= vr) return k;
      if (k < 0.0 || (us < 0.013 && v > us)) continue;
      if (std::log(v) + std::log(inv_alpha) - std::log(a / (us * us) + b) <=
          -mean + k * loglam - std::lgamma(k + 1.0))
        return k;
    }
  }

  philox_key key_;
  std::uint32_t stream_lo_, stream_hi_;
  std::uint64_t block_index_ = 0;
  philox_counter block_{};
  int used_ = 4;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace wvtilt
