#include "lhzqec/ising.hpp"

#include <bit>
#include <cmath>

#include <nlohmann/json.hpp>

#include "lhzqec/error.hpp"
#include "lhzqec/rng.hpp"

namespace lhzqec {

ProblemInstance::ProblemInstance(std::size_t size, std::vector<double> couplings,
                                 std::vector<double> fields,
                                 std::optional<std::int64_t> seed)
    : size_(size),
      couplings_(std::move(couplings)),
      fields_(std::move(fields)),
      seed_(seed) {
  require(size_ > 0, "problem instance must have at least one spin");
  require(couplings_.size() == size_ * size_, "coupling matrix must be K x K");
  require(fields_.size() == size_, "field vector must have length K");
  for (std::size_t i = 0; i < size_; ++i) {
    require(std::isfinite(fields_[i]), "fields must be finite");
    require(couplings_[i * size_ + i] == 0.0, "coupling diagonal must be zero");
    for (std::size_t j = i + 1; j < size_; ++j) {
      const double a = couplings_[i * size_ + j];
      require(std::isfinite(a), "couplings must be finite");
      require(a == couplings_[j * size_ + i], "coupling matrix must be symmetric");
    }
  }
}

ProblemInstance ProblemInstance::empty(std::size_t size) {
  return ProblemInstance(size, std::vector<double>(size * size, 0.0),
                         std::vector<double>(size, 0.0));
}

bool ProblemInstance::has_fields() const noexcept {
  for (double h : fields_)
    if (h != 0.0) return true;
  return false;
}

double ProblemInstance::energy_scale() const noexcept {
  double s = 0.0;
  for (std::size_t i = 0; i < size_; ++i) {
    s += std::abs(fields_[i]);
    for (std::size_t j = i + 1; j < size_; ++j) s += std::abs(coupling(i, j));
  }
  return s;
}

double logical_energy(const SpinVector& state, const ProblemInstance& inst) {
  const std::size_t k = inst.size();
  require(state.size() == k, "logical_energy: state length does not match instance size");
  double e = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    const int zi = state[i];
    e += inst.field(i) * zi;
    double row = 0.0;
    for (std::size_t j = i + 1; j < k; ++j) row += inst.coupling(i, j) * state[j];
    e += zi * row;
  }
  return e;
}

ProblemInstance generate_instance(std::size_t size, std::uint64_t seed,
                                  double half_width) {
  require(size >= 2, "generate_instance: K must be at least 2");
  require(half_width > 0.0 && std::isfinite(half_width),
          "generate_instance: half_width must be positive");
  Rng rng(seed, /*stream=*/0x1a57a11cULL);
  std::vector<double> j(size * size, 0.0);
  for (std::size_t a = 0; a < size; ++a) {
    for (std::size_t b = a + 1; b < size; ++b) {
      const double v = -half_width + 2.0 * half_width * rng.uniform();
      j[a * size + b] = v;
      j[b * size + a] = v;
    }
  }
  return ProblemInstance(size, std::move(j), std::vector<double>(size, 0.0),
                         static_cast<std::int64_t>(seed));
}

ProblemInstance gauge_transform(const ProblemInstance& inst,
                                const SpinVector& reference) {
  const std::size_t k = inst.size();
  require(reference.size() == k, "gauge_transform: reference length mismatch");
  std::vector<double> j(inst.couplings().begin(), inst.couplings().end());
  std::vector<double> h(inst.fields().begin(), inst.fields().end());
  for (std::size_t a = 0; a < k; ++a) {
    h[a] *= reference[a];
    for (std::size_t b = 0; b < k; ++b) j[a * k + b] *= reference[a] * reference[b];
  }
  return ProblemInstance(k, std::move(j), std::move(h), inst.seed());
}

ProblemInstance toy_instance() {
  std::vector<double> j = {0, 1, -1,  //
                           1, 0, -2,  //
                           -1, -2, 0};
  return ProblemInstance(3, std::move(j), {2, 1, 0});
}

GroundStateCertificate brute_force_ground_state(const ProblemInstance& inst) {
  const std::size_t k = inst.size();
  require(k <= kMaxOracleSize, "brute_force_ground_state: instance exceeds the exhaustive-scan cap");

  // Gray-code walk starting from all -1 (rank 0). Bit b of the Gray word is
  // spin k-1-b, so the Gray word is also the lexicographic rank.
  std::vector<int> s(k, -1);
  std::vector<double> local(k);  // h_i + sum_j J_ij s_j
  for (std::size_t i = 0; i < k; ++i) {
    double f = inst.field(i);
    for (std::size_t j = 0; j < k; ++j) f += inst.coupling(i, j) * s[j];
    local[i] = f;
  }
  double energy = logical_energy(SpinVector::filled(k, -1), inst);

  const double tol = 1e-9 * (1.0 + inst.energy_scale());
  double best = energy;
  std::uint64_t best_rank = 0;
  std::uint64_t degeneracy = 1;

  const std::uint64_t total = std::uint64_t{1} << k;
  std::uint64_t gray = 0;
  for (std::uint64_t t = 1; t < total; ++t) {
    const unsigned bit = static_cast<unsigned>(std::countr_zero(t));
    const std::size_t i = k - 1 - bit;
    energy += -2.0 * s[i] * local[i];
    s[i] = -s[i];
    for (std::size_t j = 0; j < k; ++j) local[j] += 2.0 * inst.coupling(j, i) * s[i];
    gray ^= std::uint64_t{1} << bit;

    if (energy < best - tol) {
      best = energy;
      best_rank = gray;
      degeneracy = 1;
    } else if (energy <= best + tol) {
      ++degeneracy;
      if (gray < best_rank) best_rank = gray;
    }
  }

  GroundStateCertificate cert;
  cert.state = SpinVector::from_rank(best_rank, k);
  cert.energy = logical_energy(cert.state, inst);
  cert.degeneracy = degeneracy;
  return cert;
}

void to_json(nlohmann::json& j, const ProblemInstance& inst) {
  const std::size_t k = inst.size();
  nlohmann::json rows = nlohmann::json::array();
  for (std::size_t a = 0; a < k; ++a) {
    nlohmann::json row = nlohmann::json::array();
    for (std::size_t b = 0; b < k; ++b) row.push_back(inst.coupling(a, b));
    rows.push_back(std::move(row));
  }
  j = nlohmann::json{{"K", k},
                     {"J", std::move(rows)},
                     {"h", std::vector<double>(inst.fields().begin(), inst.fields().end())}};
  if (inst.seed())
    j["seed"] = *inst.seed();
  else
    j["seed"] = nullptr;
}

ProblemInstance instance_from_json(const nlohmann::json& j) {
  require(j.is_object(), "instance document must be a JSON object");
  require(j.contains("K") && j["K"].is_number_integer(), "instance document needs integer \"K\"");
  const auto k = j["K"].get<std::int64_t>();
  require(k > 0, "instance \"K\" must be positive");
  const auto n = static_cast<std::size_t>(k);
  require(j.contains("J") && j["J"].is_array() && j["J"].size() == n,
          "instance \"J\" must be a K x K array");
  std::vector<double> couplings;
  couplings.reserve(n * n);
  for (const auto& row : j["J"]) {
    require(row.is_array() && row.size() == n, "instance \"J\" rows must have length K");
    for (const auto& v : row) {
      require(v.is_number(), "instance \"J\" entries must be numbers");
      couplings.push_back(v.get<double>());
    }
  }
  std::vector<double> fields(n, 0.0);
  if (j.contains("h") && !j["h"].is_null()) {
    require(j["h"].is_array() && j["h"].size() == n, "instance \"h\" must have length K");
    for (std::size_t i = 0; i < n; ++i) {
      require(j["h"][i].is_number(), "instance \"h\" entries must be numbers");
      fields[i] = j["h"][i].get<double>();
    }
  }
  std::optional<std::int64_t> seed;
  if (j.contains("seed") && !j["seed"].is_null()) seed = j["seed"].get<std::int64_t>();
  return ProblemInstance(n, std::move(couplings), std::move(fields), seed);
}

}  // namespace lhzqec
