#include "lhzqec/qac.hpp"

#include <cmath>
#include <string>

#include <nlohmann/json.hpp>

#include "lhzqec/error.hpp"

namespace lhzqec {

ReplicaMatrix::ReplicaMatrix(std::size_t logical_size, std::size_t replicas, int fill)
    : rows_(logical_size), cols_(replicas), entries_(logical_size * replicas, static_cast<Spin>(fill)) {
  require(rows_ >= 1 && cols_ >= 1, "replica matrix needs N >= 1 and K >= 1");
  require(fill == 1 || fill == -1, "replica entries must be +1 or -1");
}

ReplicaMatrix ReplicaMatrix::from_rows(const std::vector<std::vector<int>>& rows) {
  require(!rows.empty() && !rows.front().empty(), "replica matrix needs N >= 1 and K >= 1");
  ReplicaMatrix z(rows.size(), rows.front().size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    require(rows[i].size() == z.cols_, "replica matrix rows must have equal length");
    for (std::size_t k = 0; k < z.cols_; ++k) z.set(i, k, rows[i][k]);
  }
  return z;
}

void ReplicaMatrix::set(std::size_t i, std::size_t k, int value) {
  require(i < rows_ && k < cols_, "replica index out of range");
  require(value == 1 || value == -1, "replica entries must be +1 or -1");
  entries_[i * cols_ + k] = static_cast<Spin>(value);
}

SpinVector ReplicaMatrix::column(std::size_t k) const {
  require(k < cols_, "replica column out of range");
  std::vector<Spin> v(rows_);
  for (std::size_t i = 0; i < rows_; ++i) v[i] = entries_[i * cols_ + k];
  return SpinVector(std::move(v));
}

std::string_view to_string(ChainStyle style) { return style == ChainStyle::star ? "star" : "chain"; }

ChainStyle chain_style_from_string(std::string_view name) {
  if (name == "star") return ChainStyle::star;
  if (name == "chain") return ChainStyle::chain;
  throw InvalidInput("unknown chain style \"" + std::string(name) + "\"");
}

QacWeights::QacWeights(double b, double g) : beta(b), gamma(g) {
  require(std::isfinite(beta) && beta > 0.0, "beta must be positive");
  require(std::isfinite(gamma) && gamma >= 0.0, "gamma must be non-negative");
}

ReplicaMatrix encode_qac(const SpinVector& state, std::size_t replicas) {
  require(replicas >= 1, "encode_qac: need at least one replica");
  ReplicaMatrix z(state.size(), replicas);
  for (std::size_t i = 0; i < state.size(); ++i)
    for (std::size_t k = 0; k < replicas; ++k) z.set(i, k, state[i]);
  return z;
}

std::size_t qac_penalty(const ReplicaMatrix& z, ChainStyle style) {
  require(z.replicas() >= 2, "qac_penalty: stabilizers need at least two replicas");
  std::size_t n = 0;
  for (std::size_t i = 0; i < z.logical_size(); ++i)
    for (std::size_t k = 0; k + 1 < z.replicas(); ++k) {
      const int left = style == ChainStyle::star ? z.at(i, 0) : z.at(i, k);
      n += left * z.at(i, k + 1) < 0 ? 1 : 0;
    }
  return n;
}

double qac_energy(const ReplicaMatrix& z, const ProblemInstance& inst, const QacWeights& w,
                  ChainStyle style) {
  require(inst.size() == z.logical_size(), "qac_energy: instance size does not match N");
  double enc = 0.0;
  for (std::size_t k = 0; k < z.replicas(); ++k) enc += logical_energy(z.column(k), inst);
  const double pen = z.replicas() >= 2 ? static_cast<double>(qac_penalty(z, style)) : 0.0;
  return w.beta * enc + w.gamma * pen;
}

ReplicaEnergies strategy_energies(const ReplicaMatrix& r, const ProblemInstance& inst) {
  require(inst.size() == r.logical_size(), "strategy_energies: instance size does not match N");
  ReplicaEnergies out;
  out.energies.reserve(r.replicas());
  for (std::size_t k = 0; k < r.replicas(); ++k) {
    out.energies.push_back(logical_energy(r.column(k), inst));
    if (out.energies[k] < out.energies[out.best]) out.best = k;
  }
  return out;
}

void to_json(nlohmann::json& j, const ReplicaMatrix& z) {
  nlohmann::json rows = nlohmann::json::array();
  for (std::size_t i = 0; i < z.logical_size(); ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (std::size_t k = 0; k < z.replicas(); ++k) row.push_back(z.at(i, k));
    rows.push_back(std::move(row));
  }
  j = nlohmann::json{{"N", z.logical_size()}, {"K", z.replicas()}, {"rows", std::move(rows)}};
}

ReplicaMatrix replica_from_json(const nlohmann::json& j) {
  require(j.is_object() && j.contains("rows") && j["rows"].is_array(),
          "replica document needs \"rows\"");
  const auto rows = j["rows"].get<std::vector<std::vector<int>>>();
  ReplicaMatrix z = ReplicaMatrix::from_rows(rows);
  if (j.contains("N")) require(j["N"].get<std::size_t>() == z.logical_size(), "replica \"N\" mismatch");
  if (j.contains("K")) require(j["K"].get<std::size_t>() == z.replicas(), "replica \"K\" mismatch");
  return z;
}

}  // namespace lhzqec
