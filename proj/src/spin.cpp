#include "lhzqec/spin.hpp"

#include "lhzqec/error.hpp"

namespace lhzqec {

SpinVector::SpinVector(std::vector<Spin> values) : values_(std::move(values)) {
  require(!values_.empty(), "spin vector must be nonempty");
  for (Spin s : values_) require(s == 1 || s == -1, "spin entries must be +1 or -1");
}

SpinVector::SpinVector(std::initializer_list<int> values)
    : SpinVector(std::vector<Spin>(values.begin(), values.end())) {}

SpinVector SpinVector::filled(std::size_t n, int value) {
  return SpinVector(std::vector<Spin>(n, static_cast<Spin>(value)));
}

SpinVector SpinVector::from_rank(std::uint64_t rank, std::size_t n) {
  require(n > 0 && n <= 64, "rank encoding supports 1..64 spins");
  std::vector<Spin> v(n);
  for (std::size_t i = 0; i < n; ++i) {
    const bool up = (rank >> (n - 1 - i)) & 1U;
    v[i] = up ? Spin{1} : Spin{-1};
  }
  return SpinVector(std::move(v));
}

std::uint64_t SpinVector::rank() const {
  require(size() <= 64, "rank encoding supports at most 64 spins");
  std::uint64_t r = 0;
  for (Spin s : values_) r = (r << 1) | (s > 0 ? 1U : 0U);
  return r;
}

SpinVector SpinVector::negated() const {
  SpinVector out = *this;
  for (auto& s : out.values_) s = static_cast<Spin>(-s);
  return out;
}

std::string SpinVector::to_string() const {
  std::string out;
  out.reserve(values_.size());
  for (Spin s : values_) out.push_back(s > 0 ? '+' : '-');
  return out;
}

SpinVector error_pattern(const SpinVector& state, const SpinVector& reference) {
  require(state.size() == reference.size(), "error_pattern: length mismatch");
  std::vector<Spin> e(state.size());
  for (std::size_t i = 0; i < e.size(); ++i)
    e[i] = static_cast<Spin>(state[i] * reference[i]);
  return SpinVector(std::move(e));
}

SpinVector canonical_logical(const SpinVector& state) {
  require(state.size() > 0, "canonical_logical: empty state");
  return state[0] > 0 ? state : state.negated();
}

}  // namespace lhzqec
