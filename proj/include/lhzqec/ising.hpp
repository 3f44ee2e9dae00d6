#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "lhzqec/spin.hpp"

namespace lhzqec {

/// Logical Ising problem H(Z) = sum_{i<j} J_ij Z_i Z_j + sum_i h_i Z_i.
///
/// Couplings are stored as a dense symmetric K x K matrix with zero
/// diagonal. Every unordered pair is counted once in the energy.
class ProblemInstance {
 public:
  ProblemInstance(std::size_t size, std::vector<double> couplings,
                  std::vector<double> fields,
                  std::optional<std::int64_t> seed = std::nullopt);

  /// Instance with all-zero couplings and fields.
  static ProblemInstance empty(std::size_t size);

  std::size_t size() const noexcept { return size_; }
  double coupling(std::size_t i, std::size_t j) const { return couplings_[i * size_ + j]; }
  double field(std::size_t i) const { return fields_[i]; }
  std::span<const double> couplings() const noexcept { return couplings_; }
  std::span<const double> fields() const noexcept { return fields_; }
  std::optional<std::int64_t> seed() const noexcept { return seed_; }
  bool has_fields() const noexcept;

  /// Sum of |J_ij| (i<j) and |h_i|; a natural energy scale.
  double energy_scale() const noexcept;

  friend bool operator==(const ProblemInstance&, const ProblemInstance&) = default;

 private:
  std::size_t size_;
  std::vector<double> couplings_;
  std::vector<double> fields_;
  std::optional<std::int64_t> seed_;
};

double logical_energy(const SpinVector& state, const ProblemInstance& inst);

/// Random spin glass: J_ij (i<j) i.i.d. uniform on [-half_width, +half_width],
/// mirrored, zero diagonal, h = 0. Reproducible from `seed`.
ProblemInstance generate_instance(std::size_t size, std::uint64_t seed,
                                  double half_width);

/// J'_ij = J_ij r_i r_j, h'_i = h_i r_i. Maps `reference` to all +1 while
/// preserving the spectrum; an involution.
ProblemInstance gauge_transform(const ProblemInstance& inst,
                                const SpinVector& reference);

/// The 3-spin toy model: h = (2, 1, 0), J12 = 1, J13 = -1, J23 = -2. These
/// couplings reproduce the tabulated energies and both transition kernels.
ProblemInstance toy_instance();

struct GroundStateCertificate {
  SpinVector state;
  double energy = 0.0;
  std::uint64_t degeneracy = 0;
};

inline constexpr std::size_t kMaxOracleSize = 24;

/// Exhaustive 2^K scan. Reports the lexicographically smallest minimizer
/// and the number of states within 1e-9 * (1 + energy_scale) of the minimum.
GroundStateCertificate brute_force_ground_state(const ProblemInstance& inst);

void to_json(nlohmann::json& j, const ProblemInstance& inst);
ProblemInstance instance_from_json(const nlohmann::json& j);

}  // namespace lhzqec
