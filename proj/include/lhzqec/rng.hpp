#pragma once

#include <cstddef>
#include <cstdint>
#include <random>

namespace lhzqec {

/// SplitMix64 finalizer. Used to derive independent per-chain seeds from
/// (master seed, stream ids) so that chains never share generator state.
constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t a,
                                    std::uint64_t b = 0) noexcept {
  return splitmix64(splitmix64(splitmix64(master) ^ a) ^ b);
}

/// Deterministic generator used by every stochastic routine in the library.
///
/// The engine is std::mt19937_64, whose output sequence is fixed by the C++
/// standard. Distributions are derived here from raw 64-bit words instead
/// of std::*_distribution (whose algorithms are implementation-defined), so
/// a given seed reproduces bit-identical chains across standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0, std::uint64_t stream = 0)
      : engine_(derive_seed(seed, stream)) {}

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform on the open interval (0, 1); never returns 0 or 1.
  double uniform_open() {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
  }

  /// Uniform on [0, 1).
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  /// Uniform integer in [0, n) by 128-bit multiply-shift (bias < n / 2^64).
  std::size_t uniform_index(std::size_t n) {
    __extension__ using u128 = unsigned __int128;
    const u128 product = static_cast<u128>(next_u64()) * static_cast<u128>(n);
    return static_cast<std::size_t>(product >> 64);
  }

  /// Exponential variate with the given rate (mean 1/rate).
  double exponential(double rate);

  /// Uniformly random bipolar value.
  int spin() { return (next_u64() >> 63) ? 1 : -1; }

 private:
  std::mt19937_64 engine_;
};

}  // namespace lhzqec
