#pragma once

#include <cstddef>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "lhzqec/ising.hpp"
#include "lhzqec/spin.hpp"

namespace lhzqec {

/// Original LHZ layout: a K x K matrix whose off-diagonal entries are the
/// physical spins z_ij = Z_i Z_j. Extended layout: a (K+1) x (K+1) matrix
/// whose extra row 0 holds the logical spins z_0i = Z_i. In both the
/// diagonal holds ancillas fixed to +1.
enum class Layout { original, extended };

std::string_view to_string(Layout layout);
Layout layout_from_string(std::string_view name);

/// Symmetric bipolar matrix with unit diagonal. Row/column indices are
/// zero-based positions in the stored matrix; in the extended layout index 0
/// is the logical row and logical spin m sits at index m + 1.
class PhysicalSpinMatrix {
 public:
  /// All-+1 matrix for `logical_size` logical spins.
  PhysicalSpinMatrix(std::size_t logical_size, Layout layout = Layout::original);

  /// Validates symmetry, unit diagonal and bipolarity of a dense dim x dim
  /// row-major array.
  static PhysicalSpinMatrix from_dense(std::vector<Spin> entries, std::size_t dim,
                                       Layout layout = Layout::original);

  std::size_t logical_size() const noexcept { return logical_size_; }
  std::size_t dim() const noexcept { return dim_; }
  Layout layout() const noexcept { return layout_; }

  int at(std::size_t i, std::size_t j) const { return entries_[i * dim_ + j]; }
  /// Writes both mirrored entries. The diagonal is not writable.
  void set(std::size_t i, std::size_t j, int value);
  void flip(std::size_t i, std::size_t j) { set(i, j, -at(i, j)); }

  std::span<const Spin> entries() const noexcept { return entries_; }

  friend bool operator==(const PhysicalSpinMatrix&, const PhysicalSpinMatrix&) = default;

 private:
  std::size_t logical_size_;
  std::size_t dim_;
  Layout layout_;
  std::vector<Spin> entries_;
};

/// One parity check: plaquette (i, j) covers entries (i,j), (i,j+1),
/// (i+1,j), (i+1,j+1) with 0 <= i < j <= dim-2. Weight-three checks reuse
/// the pair (i, j) for z_0i z_0j z_ij.
struct ParityCheck {
  std::size_t i = 0;
  std::size_t j = 0;
  int value = 1;

  friend bool operator==(const ParityCheck&, const ParityCheck&) = default;
};

struct SyndromePattern {
  std::vector<ParityCheck> checks;

  std::size_t violations() const noexcept;
  bool all_satisfied() const noexcept { return violations() == 0; }
};

using SitePair = std::pair<std::size_t, std::size_t>;

/// All plaquette (i, j) pairs for a matrix of size `dim`, ordered row-major.
std::vector<SitePair> plaquette_indices(std::size_t dim);
std::size_t plaquette_count(std::size_t dim);
/// Plaquettes whose four corners include the off-diagonal entry (a, b).
std::vector<SitePair> plaquettes_containing(std::size_t dim, std::size_t a, std::size_t b);
/// Upper-triangle physical sites (a < b), row-major; the flippable spins.
std::vector<SitePair> site_pairs(std::size_t dim);

/// S^4w of one plaquette.
int plaquette_value(const PhysicalSpinMatrix& z, std::size_t i, std::size_t j);

struct WeightParameters {
  double beta = 1.0;
  double gamma = 0.0;

  WeightParameters() = default;
  WeightParameters(double beta, double gamma);
};

PhysicalSpinMatrix encode_pe(const SpinVector& state, Layout layout = Layout::original);
SyndromePattern plaquette_syndromes(const PhysicalSpinMatrix& z);
SyndromePattern weight3_syndromes(const PhysicalSpinMatrix& z);
bool is_code_state(const PhysicalSpinMatrix& z);
/// Number of violated plaquettes.
std::size_t penalty_energy(const PhysicalSpinMatrix& z);
/// sum_{i<j} J_ij z_ij (+ sum_i h_i z_0i in the extended layout).
double local_energy(const PhysicalSpinMatrix& z, const ProblemInstance& inst);
/// beta * local_energy + gamma * penalty_energy.
double physical_energy(const PhysicalSpinMatrix& z, const ProblemInstance& inst,
                       const WeightParameters& w);
/// Elementwise product; -1 marks entries disagreeing with the reference.
PhysicalSpinMatrix error_pattern(const PhysicalSpinMatrix& z, const PhysicalSpinMatrix& reference);
std::size_t error_count(const PhysicalSpinMatrix& e);

/// Row `row` of the matrix read as a logical state. Original layout: the
/// entries z_row,m directly. Extended layout: z_row,0 * z_row,m for m >= 1,
/// which is sign-exact for code states.
SpinVector logical_line(const PhysicalSpinMatrix& z, std::size_t row);

void to_json(nlohmann::json& j, const PhysicalSpinMatrix& z);
PhysicalSpinMatrix physical_from_json(const nlohmann::json& j);
void to_json(nlohmann::json& j, const SyndromePattern& s);

}  // namespace lhzqec
