#pragma once

#include <cstdint>
#include <initializer_list>

namespace gnull {

// Splitmix64 finalizer. Used both to key substreams and to seed engines.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
  x ^= x >> 30;
  x *= 0xbf58476d1ce4e5b9ULL;
  x ^= x >> 27;
  x *= 0x94d049bb133111ebULL;
  x ^= x >> 31;
  return x;
}

// Hash chain over (seed, path...). Every random draw in the library comes from
// an engine keyed this way, so results never depend on thread count or on the
// order in which independent units are processed.
inline std::uint64_t derive_seed(std::uint64_t seed,
                                 std::initializer_list<std::uint64_t> path) {
  std::uint64_t h = mix64(seed + 0x9e3779b97f4a7c15ULL);
  for (std::uint64_t v : path) {
    h = mix64(h ^ (v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2)));
  }
  return h;
}

// Tags that keep unrelated substreams of one master seed apart.
namespace stream {
inline constexpr std::uint64_t baseline_u = 1;
inline constexpr std::uint64_t covariate = 2;
inline constexpr std::uint64_t treatment = 3;
inline constexpr std::uint64_t outcome = 4;
inline constexpr std::uint64_t individual = 5;
inline constexpr std::uint64_t mc_unit = 6;
inline constexpr std::uint64_t bootstrap_rep = 7;
inline constexpr std::uint64_t study_data = 8;
inline constexpr std::uint64_t study_mc = 9;
inline constexpr std::uint64_t study_boot = 10;
}  // namespace stream

// xoshiro256++ with splitmix64 state expansion. Chosen over the stdlib
// engines because construction is a handful of arithmetic ops, and the
// library creates one engine per simulation unit.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) noexcept {
    std::uint64_t x = seed;
    for (auto& word : s_) {
      x += 0x9e3779b97f4a7c15ULL;
      word = mix64(x);
    }
  }

  std::uint64_t next_u64() noexcept {
    const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
  }

  // Uniform on [0, 1), 53-bit resolution.
  double uniform01() noexcept {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  // Uniform on the open interval (0, 1).
  double uniform_open01() noexcept {
    return (static_cast<double>(next_u64() >> 12) + 0.5) * 0x1.0p-52;
  }

  // Standard normal via Box-Muller; consumes two words per draw.
  double normal() noexcept;

  bool bernoulli(double p) noexcept { return uniform01() < p; }

  // Uniform integer on [0, n) by 128-bit multiply; n must be positive.
  std::size_t uniform_index(std::size_t n) noexcept {
    using u128 = unsigned __int128;
    return static_cast<std::size_t>(
        (static_cast<u128>(next_u64()) * static_cast<u128>(n)) >> 64);
  }

 private:
  static constexpr std::uint64_t rotl(std::uint64_t x, int k) noexcept {
    return (x << k) | (x >> (64 - k));
  }

  std::uint64_t s_[4];
};

// Standard normal CDF.
double norm_cdf(double x) noexcept;

// Standard normal quantile (Wichura's double-precision rational
// approximation). Requires 0 < p < 1.
double norm_ppf(double p);

}  // namespace gnull
