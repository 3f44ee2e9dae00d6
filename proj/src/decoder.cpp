#include "lhzqec/decoder.hpp"

#include <cmath>
#include <limits>
#include <string>

#include <nlohmann/json.hpp>

#include "lhzqec/error.hpp"

namespace lhzqec {

namespace {

constexpr double kXiFloor = 1e-12;

double clamp_xi(double xi) {
  require(std::isfinite(xi) && xi >= 0.0, "flip probabilities must be non-negative");
  require(xi <= 0.5, "flip probabilities above 1/2 make vote weights negative");
  return xi < kXiFloor ? kXiFloor : xi;
}

double log_odds(double p) { return std::log((1.0 - p) / p); }

int sign_or(long sum, int on_tie) { return sum > 0 ? 1 : sum < 0 ? -1 : on_tie; }

}  // namespace

MajorityVerdict majority(std::span<const int> values, std::span<const double> weights) {
  require(!values.empty(), "majority: no votes");
  require(weights.empty() || weights.size() == values.size(),
          "majority: weight count does not match vote count");
  MajorityVerdict v;
  for (std::size_t i = 0; i < values.size(); ++i) {
    require(values[i] == 1 || values[i] == -1, "majority: votes must be +1 or -1");
    v.margin += (weights.empty() ? 1.0 : weights[i]) * values[i];
  }
  v.value = v.margin > 0.0 ? Vote::plus : v.margin < 0.0 ? Vote::minus : Vote::tie;
  return v;
}

std::string_view to_string(TiePolicy policy) {
  return policy == TiePolicy::hold_previous ? "hold_previous" : "resolve_plus";
}

TiePolicy tie_policy_from_string(std::string_view name) {
  if (name == "resolve_plus") return TiePolicy::resolve_plus;
  if (name == "hold_previous") return TiePolicy::hold_previous;
  throw InvalidInput("unknown tie policy \"" + std::string(name) + "\"");
}

bool OrthogonalEstimatorSet::is_orthogonal() const {
  std::vector<std::size_t> seen;
  for (const auto& m : members) {
    const bool direct = m.size() == 1 && m[0] == target;
    for (std::size_t idx : m) {
      if (idx == target) {
        if (!direct) return false;
        continue;
      }
      for (std::size_t s : seen)
        if (s == idx) return false;
      seen.push_back(idx);
    }
  }
  return true;
}

double member_flip_probability(std::span<const double> xi, std::span<const std::size_t> member) {
  double prod = 1.0;
  for (std::size_t idx : member) {
    require(idx < xi.size(), "member index outside the probability vector");
    prod *= 1.0 - 2.0 * clamp_xi(xi[idx]);
  }
  return 0.5 * (1.0 - prod);
}

MvdWeights mvd_weights(std::span<const double> xi, const OrthogonalEstimatorSet& set) {
  require(set.target < xi.size(), "target index outside the probability vector");
  MvdWeights w;
  w.target = log_odds(clamp_xi(xi[set.target]));
  w.members.reserve(set.members.size());
  for (const auto& m : set.members) {
    const double p = member_flip_probability(xi, m);
    w.members.push_back(p >= 0.5 ? 0.0 : log_odds(p));
  }
  return w;
}

ChannelSpec ChannelSpec::binary_symmetric(double p) {
  require(std::isfinite(p) && p >= 0.0 && p <= 0.5, "binary symmetric p must lie in [0, 1/2]");
  ChannelSpec s;
  s.kind = Kind::binary_symmetric;
  s.p = p;
  return s;
}

ChannelSpec ChannelSpec::gaussian(double v, double w) {
  require(std::isfinite(v) && std::isfinite(w) && w > 0.0, "gaussian channel needs finite v and w > 0");
  ChannelSpec s;
  s.kind = Kind::gaussian;
  s.v = v;
  s.w = w;
  return s;
}

double channel_llr(double reading, const ChannelSpec& spec) {
  if (spec.kind == ChannelSpec::Kind::gaussian) return spec.v / (spec.w * spec.w) * reading;
  const double p = clamp_xi(spec.p);
  return 0.5 * reading * log_odds(p);
}

MajorityVerdict repetition_mvd(std::span<const int> readings) { return majority(readings); }

QacDecode qac_mvd(const ReplicaMatrix& r) {
  QacDecode out;
  std::vector<Spin> z(r.logical_size());
  for (std::size_t i = 0; i < r.logical_size(); ++i) {
    long sum = 0;
    for (std::size_t k = 0; k < r.replicas(); ++k) sum += r.at(i, k);
    if (sum == 0) ++out.ties;
    z[i] = static_cast<Spin>(sign_or(sum, 1));
  }
  out.state = SpinVector(std::move(z));
  return out;
}

std::size_t pe_flat_index(std::size_t a, std::size_t b, std::size_t dim) {
  require(a != b && a < dim && b < dim, "pe_flat_index: need an off-diagonal pair");
  return a < b ? a * dim + b : b * dim + a;
}

OrthogonalEstimatorSet pe_orthogonal_sets(std::size_t i, std::size_t j, std::size_t dim) {
  require(i != j, "pe_orthogonal_sets: target must be off-diagonal");
  require(i < dim && j < dim, "pe_orthogonal_sets: index out of range");
  OrthogonalEstimatorSet set;
  set.target = pe_flat_index(i, j, dim);
  set.members.push_back({set.target});
  for (std::size_t k = 0; k < dim; ++k)
    if (k != i && k != j) set.members.push_back({pe_flat_index(j, k, dim), pe_flat_index(k, i, dim)});
  return set;
}

int pe_syndrome_a(const PhysicalSpinMatrix& r, std::size_t i, std::size_t j, std::size_t k) {
  require(i < r.dim() && j < r.dim() && k < r.dim(), "pe_syndrome_a: index out of range");
  return r.at(i, j) * r.at(j, k) * r.at(k, i);
}

std::vector<SitePair> pe_plaquette_cover(std::size_t i, std::size_t j, std::size_t k) {
  require(i < j && j < k, "pe_plaquette_cover: need i < j < k");
  std::vector<SitePair> out;
  for (std::size_t a = i; a < j; ++a)
    for (std::size_t b = j; b < k; ++b) out.emplace_back(a, b);
  return out;
}

Weight2Result pe_mvd_weight2(const PhysicalSpinMatrix& r, TiePolicy ties) {
  const std::size_t d = r.dim();
  Weight2Result out{r, 0};
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = i + 1; j < d; ++j) {
      // (r (r - I))_ij: the k = i term is r_ij itself, k = j is removed.
      long sum = 0;
      for (std::size_t k = 0; k < d; ++k)
        if (k != j) sum += r.at(i, k) * r.at(k, j);
      if (sum == 0) ++out.ties;
      const int keep = ties == TiePolicy::hold_previous ? r.at(i, j) : 1;
      out.estimate.set(i, j, sign_or(sum, keep));
    }
  return out;
}

Weight2Result pe_mvd_weighted(const PhysicalSpinMatrix& r, std::span<const double> xi,
                              TiePolicy ties) {
  const std::size_t d = r.dim();
  require(xi.size() == d * d, "pe_mvd_weighted: xi must be dim x dim");
  Weight2Result out{r, 0};
  std::vector<int> votes;
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = i + 1; j < d; ++j) {
      const auto set = pe_orthogonal_sets(i, j, d);
      const auto w = mvd_weights(xi, set);
      votes.clear();
      votes.push_back(r.at(i, j));
      for (std::size_t k = 0; k < d; ++k)
        if (k != i && k != j) votes.push_back(r.at(j, k) * r.at(k, i));
      const auto verdict = majority(votes, w.members);
      if (verdict.is_tie()) ++out.ties;
      out.estimate.set(i, j, verdict.resolve(ties == TiePolicy::hold_previous ? r.at(i, j) : 1));
    }
  return out;
}

IterateResult pe_mvd_iterated(const PhysicalSpinMatrix& r, std::size_t n_max, TiePolicy ties,
                              std::vector<PhysicalSpinMatrix>* trace) {
  require(n_max >= 1, "pe_mvd_iterated: n_max must be at least 1");
  IterateResult out{r, 0, 0, false};
  for (std::size_t n = 1; n <= n_max; ++n) {
    Weight2Result step = pe_mvd_weight2(out.estimate, ties);
    out.iterations = n;
    out.ties += step.ties;
    if (trace) trace->push_back(step.estimate);
    const bool fixed = step.estimate == out.estimate;
    out.estimate = std::move(step.estimate);
    if (fixed || is_code_state(out.estimate)) {
      out.converged = true;
      break;
    }
  }
  return out;
}

std::string_view to_string(ExtractionPolicy policy) {
  switch (policy) {
    case ExtractionPolicy::code_row:
      return "code_row";
    case ExtractionPolicy::energy_best_row:
      return "energy_best_row";
    case ExtractionPolicy::legacy_extra_vote:
      return "legacy_extra_vote";
  }
  return "unknown";
}

ExtractionPolicy extraction_policy_from_string(std::string_view name) {
  if (name == "code_row") return ExtractionPolicy::code_row;
  if (name == "energy_best_row") return ExtractionPolicy::energy_best_row;
  if (name == "legacy_extra_vote") return ExtractionPolicy::legacy_extra_vote;
  throw InvalidInput("unknown extraction policy \"" + std::string(name) + "\"");
}

SpinVector extract_logical(const PhysicalSpinMatrix& z, const ProblemInstance& inst,
                           ExtractionPolicy policy) {
  require(inst.size() == z.logical_size(), "extract_logical: instance size mismatch");
  const bool original = z.layout() == Layout::original;
  const auto finish = [&](SpinVector v) { return original ? canonical_logical(v) : v; };

  switch (policy) {
    case ExtractionPolicy::code_row:
      require(is_code_state(z), "code_row extraction needs a code state");
      return finish(logical_line(z, 0));

    case ExtractionPolicy::energy_best_row: {
      SpinVector best;
      double best_e = std::numeric_limits<double>::infinity();
      for (std::size_t row = 0; row < z.dim(); ++row) {
        SpinVector line = logical_line(z, row);
        const double e = logical_energy(line, inst);
        if (e < best_e) {
          best_e = e;
          best = std::move(line);
        }
      }
      return finish(best);
    }

    case ExtractionPolicy::legacy_extra_vote: {
      // Z_m = sgn[(z z)_{0m}] against row 0, with the row-0 spin fixed to +1
      // in the original layout.
      const std::size_t d = z.dim();
      const std::size_t first = original ? 0 : 1;
      std::vector<Spin> out;
      for (std::size_t m = first; m < d; ++m) {
        if (original && m == 0) {
          out.push_back(1);
          continue;
        }
        long sum = 0;
        for (std::size_t k = 0; k < d; ++k) sum += z.at(0, k) * z.at(k, m);
        out.push_back(static_cast<Spin>(sign_or(sum, 1)));
      }
      return SpinVector(std::move(out));
    }
  }
  throw std::logic_error("unhandled extraction policy");
}

DecodeResult decode_pe(const PhysicalSpinMatrix& r, const ProblemInstance& inst,
                       ExtractionPolicy policy, std::size_t n_max, TiePolicy ties) {
  IterateResult it = pe_mvd_iterated(r, n_max, ties);
  DecodeResult out{std::move(it.estimate), SpinVector{}, it.iterations, it.ties, it.converged, policy};
  out.logical_estimate = extract_logical(out.physical_estimate, inst, policy);
  return out;
}

void to_json(nlohmann::json& j, const DecodeResult& r) {
  nlohmann::json z;
  to_json(z, r.physical_estimate);
  std::vector<int> logical(r.logical_estimate.values().begin(), r.logical_estimate.values().end());
  j = nlohmann::json{{"z_star", std::move(z)},
                     {"Z_star", std::move(logical)},
                     {"iters", r.iterations_used},
                     {"ties", r.ties_encountered},
                     {"converged", r.converged},
                     {"policy", std::string(to_string(r.policy))}};
}

}  // namespace lhzqec
