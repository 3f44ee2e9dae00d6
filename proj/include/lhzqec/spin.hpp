#pragma once

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

namespace lhzqec {

using Spin = std::int8_t;

/// Bipolar logical state (every entry exactly +1 or -1, nonempty).
class SpinVector {
 public:
  SpinVector() = default;
  explicit SpinVector(std::vector<Spin> values);
  SpinVector(std::initializer_list<int> values);

  /// Uniform state of length n with every entry equal to `value`.
  static SpinVector filled(std::size_t n, int value);

  /// State whose lexicographic rank (with -1 < +1, entry 0 most
  /// significant) is `rank`; rank 0 is all -1.
  static SpinVector from_rank(std::uint64_t rank, std::size_t n);
  std::uint64_t rank() const;

  std::size_t size() const noexcept { return values_.size(); }
  int operator[](std::size_t i) const { return values_[i]; }
  void flip(std::size_t i) { values_[i] = static_cast<Spin>(-values_[i]); }
  SpinVector negated() const;
  std::span<const Spin> values() const noexcept { return values_; }

  std::string to_string() const;

  friend bool operator==(const SpinVector&, const SpinVector&) = default;

 private:
  std::vector<Spin> values_;
};

/// Elementwise product; E_i = Z_i * ref_i marks disagreements with -1.
SpinVector error_pattern(const SpinVector& state, const SpinVector& reference);

/// Representative of the global-flip class: Z if Z_0 = +1, otherwise -Z.
SpinVector canonical_logical(const SpinVector& state);

}  // namespace lhzqec
