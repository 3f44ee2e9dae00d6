#pragma once

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "lhzqec/ising.hpp"
#include "lhzqec/parity.hpp"
#include "lhzqec/qac.hpp"
#include "lhzqec/spin.hpp"

namespace lhzqec {

enum class Vote { plus, minus, tie };

struct MajorityVerdict {
  Vote value = Vote::tie;
  double margin = 0.0;  ///< signed (weighted) vote sum

  bool is_tie() const noexcept { return value == Vote::tie; }
  /// +1 / -1, with ties mapped to `on_tie`.
  int resolve(int on_tie = 1) const noexcept {
    return value == Vote::plus ? 1 : value == Vote::minus ? -1 : on_tie;
  }
};

/// Sign of sum_i w_i y_i. Empty `weights` means unit weights.
MajorityVerdict majority(std::span<const int> values, std::span<const double> weights = {});

/// What an exact tie becomes: +1, or the value the spin held before the vote.
enum class TiePolicy { resolve_plus, hold_previous };

std::string_view to_string(TiePolicy policy);
TiePolicy tie_policy_from_string(std::string_view name);

/// Estimators of one error bit e_target. Each member lists the indices that
/// multiply e_target inside a parity check (the check with the target
/// removed). A member equal to {target} is the direct reading. Indices are
/// caller-defined flat positions.
struct OrthogonalEstimatorSet {
  std::size_t target = 0;
  std::vector<std::vector<std::size_t>> members;

  /// Target only in the direct-reading member; every other index in at most
  /// one member.
  bool is_orthogonal() const;
};

struct MvdWeights {
  double target = 0.0;           ///< w_m0 = log((1 - xi_m) / xi_m)
  std::vector<double> members;   ///< w_mi = log((1 - p_i) / p_i)
};

/// Log-likelihood vote weights from per-index flip probabilities `xi`
/// (indexed by the set's flat positions). xi = 0 is clamped to 1e-12;
/// xi = 1/2 gives weight 0; xi > 1/2 is rejected.
MvdWeights mvd_weights(std::span<const double> xi, const OrthogonalEstimatorSet& set);

/// Odd-parity probability of a member: p = (1 - prod(1 - 2 xi_j)) / 2.
double member_flip_probability(std::span<const double> xi, std::span<const std::size_t> member);

struct ChannelSpec {
  enum class Kind { binary_symmetric, gaussian };
  Kind kind = Kind::binary_symmetric;
  double p = 0.0;   ///< flip probability (binary symmetric)
  double v = 1.0;   ///< signal amplitude (gaussian)
  double w = 1.0;   ///< noise standard deviation (gaussian)

  static ChannelSpec binary_symmetric(double p);
  static ChannelSpec gaussian(double v, double w);
};

/// Extrinsic log-likelihood of one reading: (J/2) ln((1-p)/p) for the
/// binary symmetric channel, (v/w^2) J for the Gaussian channel.
double channel_llr(double reading, const ChannelSpec& spec);

/// Majority vote over repeated readings of one bit.
MajorityVerdict repetition_mvd(std::span<const int> readings);

struct QacDecode {
  SpinVector state;
  std::size_t ties = 0;
};

/// Row-wise majority over replicas; ties become +1.
QacDecode qac_mvd(const ReplicaMatrix& r);

/// Flat position a * dim + b (a < b) of the off-diagonal pair {a, b}.
std::size_t pe_flat_index(std::size_t a, std::size_t b, std::size_t dim);

/// Estimators for z_ij: the reading r_ij itself and, for every k != i, j,
/// the weight-two product r_jk r_ki. Indices are pe_flat_index positions.
OrthogonalEstimatorSet pe_orthogonal_sets(std::size_t i, std::size_t j, std::size_t dim);

/// Weight-three check r_ij r_jk r_ki.
int pe_syndrome_a(const PhysicalSpinMatrix& r, std::size_t i, std::size_t j, std::size_t k);

/// Plaquettes (a, b), i <= a < j <= b < k, whose product equals A_ijk for
/// i < j < k.
std::vector<SitePair> pe_plaquette_cover(std::size_t i, std::size_t j, std::size_t k);

struct Weight2Result {
  PhysicalSpinMatrix estimate;
  std::size_t ties = 0;
};

/// One step: z* = sgn[r (r - I)] with unit diagonal.
Weight2Result pe_mvd_weight2(const PhysicalSpinMatrix& r,
                             TiePolicy ties = TiePolicy::resolve_plus);

/// One step with log-likelihood weights from per-entry flip probabilities
/// `xi` (dim x dim, row-major, diagonal ignored).
Weight2Result pe_mvd_weighted(const PhysicalSpinMatrix& r, std::span<const double> xi,
                              TiePolicy ties = TiePolicy::resolve_plus);

struct IterateResult {
  PhysicalSpinMatrix estimate;
  std::size_t iterations = 0;
  std::size_t ties = 0;
  bool converged = false;  ///< stopped on a fixed point or a code state
};

/// Repeats pe_mvd_weight2 up to n_max times, re-signing between steps.
/// Every iterate is appended to `trace` when given.
IterateResult pe_mvd_iterated(const PhysicalSpinMatrix& r, std::size_t n_max = 10,
                              TiePolicy ties = TiePolicy::resolve_plus,
                              std::vector<PhysicalSpinMatrix>* trace = nullptr);

enum class ExtractionPolicy { code_row, energy_best_row, legacy_extra_vote };

std::string_view to_string(ExtractionPolicy policy);
ExtractionPolicy extraction_policy_from_string(std::string_view name);

/// Logical state from a decoded physical estimate. In the original layout
/// the result is canonicalized (first entry +1).
SpinVector extract_logical(const PhysicalSpinMatrix& z_star, const ProblemInstance& inst,
                           ExtractionPolicy policy);

struct DecodeResult {
  PhysicalSpinMatrix physical_estimate;
  SpinVector logical_estimate;
  std::size_t iterations_used = 0;
  std::size_t ties_encountered = 0;
  bool converged = false;
  ExtractionPolicy policy = ExtractionPolicy::energy_best_row;
};

/// Iterated decoding followed by logical extraction.
DecodeResult decode_pe(const PhysicalSpinMatrix& r, const ProblemInstance& inst,
                       ExtractionPolicy policy, std::size_t n_max = 10,
                       TiePolicy ties = TiePolicy::resolve_plus);

void to_json(nlohmann::json& j, const DecodeResult& result);

}  // namespace lhzqec
