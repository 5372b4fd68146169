#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>

namespace jdrisk {

//! Philox4x32-10 counter-based generator (Salmon et al., SC'11).
class Philox4x32 {
 public:
  using Counter = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  static Counter apply(Counter ctr, Key key) {
    for (int round = 0; round < 10; ++round) {
      if (round > 0) {
        key[0] += 0x9E3779B9u;
        key[1] += 0xBB67AE85u;
      }
      const std::uint64_t p0 = std::uint64_t{0xD2511F53u} * ctr[0];
      const std::uint64_t p1 = std::uint64_t{0xCD9E8D57u} * ctr[2];
      ctr = {static_cast<std::uint32_t>(p1 >> 32) ^ ctr[1] ^ key[0], static_cast<std::uint32_t>(p1),
             static_cast<std::uint32_t>(p0 >> 32) ^ ctr[3] ^ key[1], static_cast<std::uint32_t>(p0)};
    }
    return ctr;
  }
};

// Uniform in the open interval (0, 1) from 64 random bits.
inline double to_unit_open(std::uint32_t hi, std::uint32_t lo) {
  const std::uint64_t bits = (std::uint64_t{hi} << 32 | lo) >> 11;
  return (static_cast<double>(bits) + 0.5) * 0x1.0p-53;
}

//! Random stream addressed by (seed, path, step, slot); any draw can be
//! regenerated independently of evaluation order.
class PathStream {
 public:
  PathStream(std::uint64_t seed, std::uint64_t path)
      : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
        path_lo_(static_cast<std::uint32_t>(path)),
        path_hi_(static_cast<std::uint32_t>(path >> 32)) {}

  // Two uniforms from one block.
  std::array<double, 2> uniforms(std::uint32_t step, std::uint32_t slot) const {
    const auto r = Philox4x32::apply({path_lo_, path_hi_, step, slot}, key_);
    return {to_unit_open(r[0], r[1]), to_unit_open(r[2], r[3])};
  }

  // Standard normal by Box-Muller on the block's two uniforms.
  double normal(std::uint32_t step, std::uint32_t slot) const {
    const auto u = uniforms(step, slot);
    return std::sqrt(-2.0 * std::log(u[0])) * std::cos(2.0 * std::numbers::pi * u[1]);
  }

 private:
  Philox4x32::Key key_;
  std::uint32_t path_lo_;
  std::uint32_t path_hi_;
};

}  // namespace jdrisk
