#include "lhzqec/parity.hpp"

#include <cmath>
#include <string>

#include <nlohmann/json.hpp>

#include "lhzqec/error.hpp"

namespace lhzqec {

namespace {

std::size_t dim_for(std::size_t logical_size, Layout layout) {
  return layout == Layout::extended ? logical_size + 1 : logical_size;
}

}  // namespace

std::string_view to_string(Layout layout) {
  return layout == Layout::extended ? "extended" : "original";
}

Layout layout_from_string(std::string_view name) {
  if (name == "original") return Layout::original;
  if (name == "extended") return Layout::extended;
  throw InvalidInput("unknown layout \"" + std::string(name) + "\"");
}

PhysicalSpinMatrix::PhysicalSpinMatrix(std::size_t logical_size, Layout layout)
    : logical_size_(logical_size),
      dim_(dim_for(logical_size, layout)),
      layout_(layout),
      entries_(dim_ * dim_, Spin{1}) {
  require(logical_size_ >= 1, "physical spin matrix needs at least one logical spin");
}

PhysicalSpinMatrix PhysicalSpinMatrix::from_dense(std::vector<Spin> entries, std::size_t dim,
                                                  Layout layout) {
  require(dim >= 1 && entries.size() == dim * dim, "dense matrix must be dim x dim");
  const std::size_t logical = layout == Layout::extended ? dim - 1 : dim;
  require(logical >= 1, "extended layout needs at least one logical spin");
  PhysicalSpinMatrix z(logical, layout);
  for (std::size_t i = 0; i < dim; ++i) {
    require(entries[i * dim + i] == 1, "physical spin matrix diagonal must be +1");
    for (std::size_t j = i + 1; j < dim; ++j) {
      const Spin v = entries[i * dim + j];
      require(v == 1 || v == -1, "physical spins must be +1 or -1");
      require(v == entries[j * dim + i], "physical spin matrix must be symmetric");
    }
  }
  z.entries_ = std::move(entries);
  return z;
}

void PhysicalSpinMatrix::set(std::size_t i, std::size_t j, int value) {
  require(i < dim_ && j < dim_, "physical spin index out of range");
  require(i != j, "ancilla diagonal is fixed to +1");
  require(value == 1 || value == -1, "physical spins must be +1 or -1");
  entries_[i * dim_ + j] = static_cast<Spin>(value);
  entries_[j * dim_ + i] = static_cast<Spin>(value);
}

std::size_t SyndromePattern::violations() const noexcept {
  std::size_t n = 0;
  for (const auto& c : checks) n += c.value < 0 ? 1 : 0;
  return n;
}

std::vector<SitePair> plaquette_indices(std::size_t dim) {
  std::vector<SitePair> out;
  if (dim < 3) return out;
  out.reserve(plaquette_count(dim));
  for (std::size_t i = 0; i + 2 < dim; ++i)
    for (std::size_t j = i + 1; j + 1 < dim; ++j) out.emplace_back(i, j);
  return out;
}

std::size_t plaquette_count(std::size_t dim) {
  return dim < 3 ? 0 : (dim - 1) * (dim - 2) / 2;
}

std::vector<SitePair> plaquettes_containing(std::size_t dim, std::size_t a, std::size_t b) {
  require(a != b && a < dim && b < dim, "plaquettes_containing: need an off-diagonal entry");
  if (a > b) std::swap(a, b);
  // Plaquette (i, j) touches rows {i, i+1} and columns {j, j+1} of the upper
  // triangle, where every corner (r, c) with r <= c is read mirrored.
  std::vector<SitePair> out;
  for (const auto& [i, j] : plaquette_indices(dim)) {
    const std::size_t rows[2] = {i, i + 1};
    const std::size_t cols[2] = {j, j + 1};
    bool hit = false;
    for (std::size_t r : rows)
      for (std::size_t c : cols) {
        const std::size_t lo = r < c ? r : c;
        const std::size_t hi = r < c ? c : r;
        hit = hit || (lo == a && hi == b);
      }
    if (hit) out.emplace_back(i, j);
  }
  return out;
}

std::vector<SitePair> site_pairs(std::size_t dim) {
  std::vector<SitePair> out;
  out.reserve(dim * (dim - 1) / 2);
  for (std::size_t a = 0; a < dim; ++a)
    for (std::size_t b = a + 1; b < dim; ++b) out.emplace_back(a, b);
  return out;
}

int plaquette_value(const PhysicalSpinMatrix& z, std::size_t i, std::size_t j) {
  return z.at(i, j) * z.at(i, j + 1) * z.at(i + 1, j) * z.at(i + 1, j + 1);
}

WeightParameters::WeightParameters(double b, double g) : beta(b), gamma(g) {
  require(std::isfinite(beta) && beta > 0.0, "beta must be positive");
  require(std::isfinite(gamma) && gamma >= 0.0, "gamma must be non-negative");
}

PhysicalSpinMatrix encode_pe(const SpinVector& state, Layout layout) {
  const std::size_t k = state.size();
  require(layout == Layout::extended ? k >= 2 : k >= 3,
          "encode_pe: too few logical spins for any plaquette");
  PhysicalSpinMatrix z(k, layout);
  const std::size_t off = layout == Layout::extended ? 1 : 0;
  for (std::size_t a = 0; a < k; ++a) {
    if (layout == Layout::extended) z.set(0, a + 1, state[a]);
    for (std::size_t b = a + 1; b < k; ++b) z.set(a + off, b + off, state[a] * state[b]);
  }
  return z;
}

SyndromePattern plaquette_syndromes(const PhysicalSpinMatrix& z) {
  SyndromePattern s;
  for (const auto& [i, j] : plaquette_indices(z.dim()))
    s.checks.push_back({i, j, plaquette_value(z, i, j)});
  return s;
}

SyndromePattern weight3_syndromes(const PhysicalSpinMatrix& z) {
  require(z.layout() == Layout::extended,
          "weight-three syndromes need the extended layout (logical row 0)");
  SyndromePattern s;
  for (std::size_t i = 1; i < z.dim(); ++i)
    for (std::size_t j = i + 1; j < z.dim(); ++j)
      s.checks.push_back({i, j, z.at(0, i) * z.at(0, j) * z.at(i, j)});
  return s;
}

bool is_code_state(const PhysicalSpinMatrix& z) { return penalty_energy(z) == 0; }

std::size_t penalty_energy(const PhysicalSpinMatrix& z) {
  std::size_t n = 0;
  for (const auto& [i, j] : plaquette_indices(z.dim())) n += plaquette_value(z, i, j) < 0 ? 1 : 0;
  return n;
}

double local_energy(const PhysicalSpinMatrix& z, const ProblemInstance& inst) {
  const std::size_t k = z.logical_size();
  require(inst.size() == k, "instance size does not match physical spin matrix");
  const std::size_t off = z.layout() == Layout::extended ? 1 : 0;
  if (z.layout() == Layout::original)
    require(!inst.has_fields(), "original layout cannot represent local fields h");
  // Grouped by row like logical_energy, so a code state Z (x) Z reproduces
  // H^logi(Z) bit for bit.
  double e = 0.0;
  for (std::size_t a = 0; a < k; ++a) {
    if (off) e += inst.field(a) * z.at(0, a + 1);
    double row = 0.0;
    for (std::size_t b = a + 1; b < k; ++b) row += inst.coupling(a, b) * z.at(a + off, b + off);
    e += row;
  }
  return e;
}

double physical_energy(const PhysicalSpinMatrix& z, const ProblemInstance& inst,
                       const WeightParameters& w) {
  return w.beta * local_energy(z, inst) + w.gamma * static_cast<double>(penalty_energy(z));
}

PhysicalSpinMatrix error_pattern(const PhysicalSpinMatrix& z, const PhysicalSpinMatrix& reference) {
  require(z.dim() == reference.dim() && z.layout() == reference.layout(),
          "error_pattern: matrices differ in size or layout");
  PhysicalSpinMatrix e(z.logical_size(), z.layout());
  for (std::size_t a = 0; a < z.dim(); ++a)
    for (std::size_t b = a + 1; b < z.dim(); ++b) e.set(a, b, z.at(a, b) * reference.at(a, b));
  return e;
}

std::size_t error_count(const PhysicalSpinMatrix& e) {
  std::size_t n = 0;
  for (std::size_t a = 0; a < e.dim(); ++a)
    for (std::size_t b = a + 1; b < e.dim(); ++b) n += e.at(a, b) < 0 ? 1 : 0;
  return n;
}

SpinVector logical_line(const PhysicalSpinMatrix& z, std::size_t row) {
  require(row < z.dim(), "logical_line: row out of range");
  std::vector<Spin> v(z.logical_size());
  if (z.layout() == Layout::original) {
    for (std::size_t m = 0; m < z.dim(); ++m) v[m] = static_cast<Spin>(z.at(row, m));
  } else {
    const int sign = z.at(row, 0);
    for (std::size_t m = 1; m < z.dim(); ++m) v[m - 1] = static_cast<Spin>(sign * z.at(row, m));
  }
  return SpinVector(std::move(v));
}

void to_json(nlohmann::json& j, const PhysicalSpinMatrix& z) {
  std::vector<int> upper;
  upper.reserve(z.dim() * (z.dim() - 1) / 2);
  for (std::size_t a = 0; a < z.dim(); ++a)
    for (std::size_t b = a + 1; b < z.dim(); ++b) upper.push_back(z.at(a, b));
  j = nlohmann::json{{"K", z.logical_size()},
                     {"layout", std::string(to_string(z.layout()))},
                     {"upper", std::move(upper)}};
}

PhysicalSpinMatrix physical_from_json(const nlohmann::json& j) {
  require(j.is_object() && j.contains("K") && j["K"].is_number_integer(),
          "physical matrix document needs integer \"K\"");
  const auto k = j["K"].get<std::int64_t>();
  require(k >= 1, "physical matrix \"K\" must be positive");
  const Layout layout =
      j.contains("layout") ? layout_from_string(j["layout"].get<std::string>()) : Layout::original;
  PhysicalSpinMatrix z(static_cast<std::size_t>(k), layout);
  const std::size_t d = z.dim();
  require(j.contains("upper") && j["upper"].is_array() && j["upper"].size() == d * (d - 1) / 2,
          "physical matrix \"upper\" must hold the strict upper triangle");
  std::size_t idx = 0;
  for (std::size_t a = 0; a < d; ++a)
    for (std::size_t b = a + 1; b < d; ++b) {
      const auto& v = j["upper"][idx++];
      require(v.is_number_integer(), "physical matrix entries must be +1 or -1");
      z.set(a, b, v.get<int>());
    }
  return z;
}

void to_json(nlohmann::json& j, const SyndromePattern& s) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& c : s.checks) arr.push_back({{"i", c.i}, {"j", c.j}, {"s", c.value}});
  j = nlohmann::json{{"plaquettes", std::move(arr)}};
}

}  // namespace lhzqec
