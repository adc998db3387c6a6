#pragma once

// Philox4x32-10 counter-based generator (Salmon et al., SC'11, Random123
// constants). Every draw is a pure function of (key, counter), which is what
// makes ensembles bit-identical for any number of worker threads.

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <utility>

namespace thermodiff::philox {

using Counter = std::array<std::uint32_t, 4>;
using Key = std::array<std::uint32_t, 2>;

namespace detail {

inline constexpr std::uint32_t kMul0 = 0xD2511F53u;
inline constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
inline constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
inline constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

constexpr std::pair<std::uint32_t, std::uint32_t> mulhilo(std::uint32_t a, std::uint32_t b) {
  const std::uint64_t product = static_cast<std::uint64_t>(a) * b;
  return {static_cast<std::uint32_t>(product >> 32), static_cast<std::uint32_t>(product)};
}

constexpr Counter round(const Counter& c, const Key& k) {
  const auto [hi0, lo0] = mulhilo(kMul0, c[0]);
  const auto [hi1, lo1] = mulhilo(kMul1, c[2]);
  return {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
}

}  // namespace detail

constexpr Counter philox4x32_10(Counter c, Key k) {
  for (int r = 0; r < 10; ++r) {
    if (r > 0) {
      k[0] += detail::kWeyl0;
      k[1] += detail::kWeyl1;
    }
    c = detail::round(c, k);
  }
  return c;
}

constexpr Key key_from_seed(std::uint64_t seed) {
  return {static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)};
}

/// Uniform in (0, 1] from two 32-bit words, 53 bits of resolution.
inline double to_unit_open_closed(std::uint32_t hi, std::uint32_t lo) {
  const std::uint64_t bits = ((static_cast<std::uint64_t>(hi) << 32) | lo) >> 11;
  return (static_cast<double>(bits) + 1.0) * 0x1.0p-53;
}

/// Two independent standard normals (Box-Muller) for one counter value.
inline std::pair<double, double> normal_pair(const Counter& counter, const Key& key) {
  const Counter r = philox4x32_10(counter, key);
  const double u1 = to_unit_open_closed(r[0], r[1]);
  const double u2 = to_unit_open_closed(r[2], r[3]);
  const double radius = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * std::numbers::pi * u2;
  return {radius * std::cos(angle), radius * std::sin(angle)};
}

/// Mixes a base seed with a stream label so that sibling runs get unrelated keys.
constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ull * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

}  // namespace thermodiff::philox
