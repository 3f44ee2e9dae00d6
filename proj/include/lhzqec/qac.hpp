#pragma once

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "lhzqec/ising.hpp"
#include "lhzqec/spin.hpp"

namespace lhzqec {

/// N x K bipolar matrix: row i is the logical group of spin i, column k is
/// replica k.
class ReplicaMatrix {
 public:
  ReplicaMatrix(std::size_t logical_size, std::size_t replicas, int fill = 1);
  static ReplicaMatrix from_rows(const std::vector<std::vector<int>>& rows);

  std::size_t logical_size() const noexcept { return rows_; }
  std::size_t replicas() const noexcept { return cols_; }
  int at(std::size_t i, std::size_t k) const { return entries_[i * cols_ + k]; }
  void set(std::size_t i, std::size_t k, int value);
  void flip(std::size_t i, std::size_t k) { set(i, k, -at(i, k)); }

  SpinVector column(std::size_t k) const;
  std::span<const Spin> entries() const noexcept { return entries_; }

  friend bool operator==(const ReplicaMatrix&, const ReplicaMatrix&) = default;

 private:
  std::size_t rows_;
  std::size_t cols_;
  std::vector<Spin> entries_;
};

/// Stabilizers within a logical group: star S_ik = z_i1 z_i,k+1, chain
/// S_ik = z_ik z_i,k+1 (k = 1..K-1). Both span the same code space.
enum class ChainStyle { star, chain };

std::string_view to_string(ChainStyle style);
ChainStyle chain_style_from_string(std::string_view name);

struct QacWeights {
  double beta = 1.0;
  double gamma = 0.0;

  QacWeights() = default;
  QacWeights(double beta, double gamma);
};

ReplicaMatrix encode_qac(const SpinVector& state, std::size_t replicas);
std::size_t qac_penalty(const ReplicaMatrix& z, ChainStyle style);
double qac_energy(const ReplicaMatrix& z, const ProblemInstance& inst, const QacWeights& w,
                  ChainStyle style);

struct ReplicaEnergies {
  std::vector<double> energies;
  std::size_t best = 0;  ///< lowest logical energy, smallest index on ties
};

/// Per-column logical energies and the best-replica choice.
ReplicaEnergies strategy_energies(const ReplicaMatrix& r, const ProblemInstance& inst);

void to_json(nlohmann::json& j, const ReplicaMatrix& z);
ReplicaMatrix replica_from_json(const nlohmann::json& j);

}  // namespace lhzqec
