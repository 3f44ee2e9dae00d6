#include <gtest/gtest.h>

#include <cmath>
#include <set>

#include <nlohmann/json.hpp>

#include "lhzqec/error.hpp"
#include "lhzqec/parity.hpp"
#include "lhzqec/rng.hpp"

using namespace lhzqec;

namespace {

PhysicalSpinMatrix random_matrix(std::size_t k, Layout layout, Rng& rng) {
  PhysicalSpinMatrix z(k, layout);
  for (std::size_t a = 0; a < z.dim(); ++a)
    for (std::size_t b = a + 1; b < z.dim(); ++b) z.set(a, b, rng.spin());
  return z;
}

}  // namespace

TEST(Parity, EncodingIsOuterProduct) {
  const SpinVector z{1, -1, -1, 1, -1};
  const PhysicalSpinMatrix r = encode_pe(z);
  EXPECT_EQ(r.dim(), 5u);
  for (std::size_t a = 0; a < 5; ++a)
    for (std::size_t b = 0; b < 5; ++b) EXPECT_EQ(r.at(a, b), a == b ? 1 : z[a] * z[b]);
  EXPECT_TRUE(is_code_state(r));
  EXPECT_EQ(encode_pe(z.negated()), r);
}

TEST(Parity, ExtendedLayoutCarriesLogicalRow) {
  const SpinVector z{-1, 1, 1, -1};
  const PhysicalSpinMatrix r = encode_pe(z, Layout::extended);
  EXPECT_EQ(r.dim(), 5u);
  for (std::size_t a = 0; a < 4; ++a) EXPECT_EQ(r.at(0, a + 1), z[a]);
  EXPECT_TRUE(is_code_state(r));
  EXPECT_EQ(logical_line(r, 0), z);
  EXPECT_TRUE(weight3_syndromes(r).all_satisfied());
}

TEST(Parity, PlaquetteCount) {
  for (std::size_t d = 3; d < 12; ++d) {
    EXPECT_EQ(plaquette_indices(d).size(), (d - 1) * (d - 2) / 2);
    EXPECT_EQ(plaquette_count(d), (d - 1) * (d - 2) / 2);
  }
  EXPECT_EQ(plaquette_count(2), 0u);
}

TEST(Parity, SingleFlipViolatesOnlyTouchingPlaquettes) {
  const PhysicalSpinMatrix code = encode_pe(SpinVector::filled(7, 1));
  for (const auto& [a, b] : site_pairs(7)) {
    PhysicalSpinMatrix r = code;
    r.flip(a, b);
    const auto touching = plaquettes_containing(7, a, b);
    std::set<SitePair> expected(touching.begin(), touching.end());
    std::set<SitePair> violated;
    for (const auto& c : plaquette_syndromes(r).checks)
      if (c.value < 0) violated.emplace(c.i, c.j);
    EXPECT_EQ(violated, expected) << a << "," << b;
    EXPECT_GE(expected.size(), 1u);
    EXPECT_LE(expected.size(), 4u);
  }
}

TEST(Parity, PlaquettesAreProductsOfWeightThreeChecks) {
  // In the extended layout every 4-body check at (i, j) equals the product
  // of the weight-3 checks on its two diagonals' rows.
  Rng rng(31, 0);
  for (int t = 0; t < 50; ++t) {
    const PhysicalSpinMatrix r = random_matrix(6, Layout::extended, rng);
    const auto w3 = [&](std::size_t a, std::size_t b) {
      if (a == b) return 1;
      if (a > b) std::swap(a, b);
      return r.at(0, a) * r.at(0, b) * r.at(a, b);
    };
    for (const auto& [i, j] : plaquette_indices(r.dim())) {
      if (i == 0) continue;  // touches the logical row directly
      const int prod = w3(i, j) * w3(i, j + 1) * w3(i + 1, j) * w3(i + 1, j + 1);
      EXPECT_EQ(plaquette_value(r, i, j), prod);
    }
  }
}

TEST(Parity, CodeStatesNumberTwoToTheK) {
  // Original layout, K = 4: 6 physical spins, 64 configurations, 2^K / 2
  // code states (Z and -Z coincide).
  std::size_t code = 0;
  const auto sites = site_pairs(4);
  for (unsigned mask = 0; mask < (1U << sites.size()); ++mask) {
    PhysicalSpinMatrix r(4);
    for (std::size_t s = 0; s < sites.size(); ++s)
      if (mask >> s & 1U) r.flip(sites[s].first, sites[s].second);
    code += is_code_state(r);
  }
  EXPECT_EQ(code, 8u);
}

TEST(Parity, EnergiesOnCodeStates) {
  const ProblemInstance inst = generate_instance(6, 12, 0.25);
  const WeightParameters w(2.0, 0.5);
  for (std::uint64_t rank = 0; rank < 64; ++rank) {
    const SpinVector z = SpinVector::from_rank(rank, 6);
    const PhysicalSpinMatrix r = encode_pe(z);
    EXPECT_EQ(local_energy(r, inst), logical_energy(z, inst));
    EXPECT_EQ(penalty_energy(r), 0u);
    EXPECT_DOUBLE_EQ(physical_energy(r, inst, w), 2.0 * logical_energy(z, inst));
  }
}

TEST(Parity, PenaltyCountsViolations) {
  Rng rng(2, 2);
  for (int t = 0; t < 30; ++t) {
    const PhysicalSpinMatrix r = random_matrix(7, Layout::original, rng);
    EXPECT_EQ(penalty_energy(r), plaquette_syndromes(r).violations());
    const ProblemInstance inst = generate_instance(7, 1, 0.25);
    EXPECT_NEAR(physical_energy(r, inst, {1.5, 0.25}),
                1.5 * local_energy(r, inst) + 0.25 * static_cast<double>(penalty_energy(r)), 1e-12);
  }
}

TEST(Parity, ErrorPatternAndLines) {
  const SpinVector z{1, -1, 1, 1};
  const PhysicalSpinMatrix code = encode_pe(z);
  PhysicalSpinMatrix r = code;
  r.flip(0, 2);
  r.flip(1, 3);
  EXPECT_EQ(error_count(error_pattern(r, code)), 2u);
  for (std::size_t row = 0; row < 4; ++row) {
    const SpinVector line = logical_line(code, row);
    EXPECT_TRUE(line == z || line == z.negated());
  }
}

TEST(Parity, JsonRoundTrip) {
  Rng rng(8, 1);
  const PhysicalSpinMatrix r = random_matrix(5, Layout::extended, rng);
  nlohmann::json j;
  to_json(j, r);
  EXPECT_EQ(physical_from_json(nlohmann::json::parse(j.dump())), r);
}

TEST(Parity, RejectsBadInput) {
  EXPECT_THROW(encode_pe(SpinVector{1, 1}), InvalidInput);
  EXPECT_THROW(WeightParameters(0.0, 1.0), InvalidInput);
  EXPECT_THROW(WeightParameters(1.0, -1.0), InvalidInput);
  PhysicalSpinMatrix r(4);
  EXPECT_THROW(r.set(1, 2, 0), InvalidInput);
  EXPECT_THROW(weight3_syndromes(r), InvalidInput);
  ProblemInstance with_field(3, std::vector<double>(9, 0.0), {1.0, 0.0, 0.0});
  EXPECT_THROW(local_energy(PhysicalSpinMatrix(3), with_field), InvalidInput);
}
