#include <gtest/gtest.h>

#include <bit>
#include <cmath>

#include <nlohmann/json.hpp>

#include "lhzqec/decoder.hpp"
#include "lhzqec/error.hpp"
#include "lhzqec/rng.hpp"

using namespace lhzqec;

namespace {

SpinVector random_state(std::size_t k, Rng& rng) {
  std::vector<Spin> v(k);
  for (auto& s : v) s = static_cast<Spin>(rng.spin());
  return SpinVector(std::move(v));
}

PhysicalSpinMatrix hadamard(const PhysicalSpinMatrix& a, const PhysicalSpinMatrix& b) {
  PhysicalSpinMatrix out(a.logical_size(), a.layout());
  for (std::size_t i = 0; i < a.dim(); ++i)
    for (std::size_t j = i + 1; j < a.dim(); ++j) out.set(i, j, a.at(i, j) * b.at(i, j));
  return out;
}

PhysicalSpinMatrix random_errors(std::size_t k, double q, Rng& rng) {
  PhysicalSpinMatrix e(k);
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = i + 1; j < k; ++j)
      if (rng.uniform() < q) e.set(i, j, -1);
  return e;
}

}  // namespace

TEST(Majority, Examples) {
  const std::vector<int> a{1, 1, -1};
  EXPECT_EQ(majority(a).value, Vote::plus);
  const std::vector<int> b{1, -1};
  const std::vector<double> w{3, 1};
  const auto v = majority(b, w);
  EXPECT_EQ(v.value, Vote::plus);
  EXPECT_DOUBLE_EQ(v.margin, 2.0);
  EXPECT_TRUE(majority(b).is_tie());
  EXPECT_EQ(majority(b).resolve(-1), -1);
  EXPECT_THROW(majority(std::vector<int>{}), InvalidInput);
  EXPECT_THROW(majority(b, std::vector<double>{1.0}), InvalidInput);
}

TEST(MvdWeights, FlipProbabilities) {
  const std::vector<double> xi{0.1, 0.2, 0.5};
  OrthogonalEstimatorSet set{0, {{0}, {1, 0}, {0, 2}}};
  const std::vector<std::size_t> pair{0, 1};
  EXPECT_NEAR(member_flip_probability(xi, pair), 0.26, 1e-12);
  const MvdWeights w = mvd_weights(xi, set);
  EXPECT_NEAR(w.target, std::log(9.0), 1e-12);
  EXPECT_NEAR(w.members[0], std::log(9.0), 1e-12);
  EXPECT_NEAR(w.members[1], std::log(0.74 / 0.26), 1e-12);
  EXPECT_EQ(w.members[2], 0.0);
  for (double m : w.members) EXPECT_LE(m, w.target + 1e-12);
  EXPECT_THROW(mvd_weights(std::vector<double>{0.6}, OrthogonalEstimatorSet{0, {{0}}}), InvalidInput);
  EXPECT_TRUE(std::isfinite(mvd_weights(std::vector<double>{0.0}, OrthogonalEstimatorSet{0, {{0}}}).target));
}

TEST(Channel, LogLikelihoodRatios) {
  EXPECT_EQ(channel_llr(1.0, ChannelSpec::binary_symmetric(0.5)), 0.0);
  EXPECT_NEAR(channel_llr(0.7, ChannelSpec::gaussian(1, 1)), 0.7, 1e-15);
  const double p = 1.0 / (1.0 + std::exp(2.0));
  EXPECT_NEAR(channel_llr(1.0, ChannelSpec::binary_symmetric(p)), 1.0, 1e-12);
  EXPECT_THROW(ChannelSpec::gaussian(1, 0), InvalidInput);
  EXPECT_THROW(ChannelSpec::binary_symmetric(0.7), InvalidInput);
}

TEST(Repetition, CorrectsUpToHalf) {
  for (int n = 1; n <= 9; ++n)
    for (unsigned mask = 0; mask < (1U << n); ++mask) {
      std::vector<int> r(n, 1);
      int weight = 0;
      for (int i = 0; i < n; ++i)
        if (mask >> i & 1U) r[i] = -1, ++weight;
      const auto v = repetition_mvd(r);
      if (2 * weight < n) EXPECT_EQ(v.value, Vote::plus);
      if (2 * weight > n) EXPECT_EQ(v.value, Vote::minus);
      if (2 * weight == n) EXPECT_TRUE(v.is_tie());
    }
}

TEST(Qac, MajorityPerRow) {
  const SpinVector z{1, -1, 1};
  EXPECT_EQ(qac_mvd(encode_qac(z, 4)).state, z);
  // N = 3, K = 5: every placement of up to two errors per row.
  for (unsigned m0 = 0; m0 < 32; ++m0)
    for (unsigned m1 : {0u, 3u, 9u, 24u}) {
      if (std::popcount(m0) > 2) continue;
      ReplicaMatrix r = encode_qac(z, 5);
      for (std::size_t k = 0; k < 5; ++k) {
        if (m0 >> k & 1U) r.flip(0, k);
        if (m1 >> k & 1U) r.flip(1, k);
      }
      const QacDecode d = qac_mvd(r);
      EXPECT_EQ(d.state, z);
      EXPECT_EQ(d.ties, 0u);
    }
  const ReplicaMatrix tie = ReplicaMatrix::from_rows({{1, -1}, {-1, -1}});
  const QacDecode d = qac_mvd(tie);
  EXPECT_EQ(d.ties, 1u);
  EXPECT_EQ(d.state, (SpinVector{1, -1}));
}

TEST(OrthogonalSets, EnumerationAndOrthogonality) {
  const auto s = pe_orthogonal_sets(0, 1, 4);
  const auto f = [](std::size_t a, std::size_t b) { return pe_flat_index(a, b, 4); };
  ASSERT_EQ(s.members.size(), 3u);
  EXPECT_EQ(s.members[0], (std::vector<std::size_t>{f(0, 1)}));
  EXPECT_EQ(s.members[1], (std::vector<std::size_t>{f(1, 2), f(2, 0)}));
  EXPECT_EQ(s.members[2], (std::vector<std::size_t>{f(1, 3), f(3, 0)}));
  for (std::size_t k = 3; k <= 20; ++k)
    for (std::size_t i = 0; i < k; ++i)
      for (std::size_t j = i + 1; j < k; ++j) {
        const auto set = pe_orthogonal_sets(i, j, k);
        EXPECT_EQ(set.members.size(), k - 1);
        EXPECT_TRUE(set.is_orthogonal());
      }
  EXPECT_THROW(pe_orthogonal_sets(2, 2, 4), InvalidInput);
}

TEST(Syndromes, A247IsProductOfSixPlaquettes) {
  // 1-based A_247 is (1, 3, 6) here; its cover is rows {1, 2} x cols {3, 4, 5}.
  const auto cover = pe_plaquette_cover(1, 3, 6);
  EXPECT_EQ(cover, (std::vector<SitePair>{{1, 3}, {1, 4}, {1, 5}, {2, 3}, {2, 4}, {2, 5}}));
  Rng rng(47, 0);
  for (int t = 0; t < 200; ++t) {
    const PhysicalSpinMatrix r = hadamard(encode_pe(random_state(7, rng)), random_errors(7, 0.3, rng));
    int prod = 1;
    for (const auto& [a, b] : cover) prod *= plaquette_value(r, a, b);
    EXPECT_EQ(pe_syndrome_a(r, 1, 3, 6), prod);
  }
}

TEST(Syndromes, DependOnlyOnErrors) {
  const auto pairs = site_pairs(5);
  Rng rng(3, 9);
  for (int t = 0; t < 4; ++t) {
    const PhysicalSpinMatrix code = encode_pe(random_state(5, rng));
    for (unsigned mask = 0; mask < (1U << pairs.size()); ++mask) {
      PhysicalSpinMatrix e(5);
      for (std::size_t s = 0; s < pairs.size(); ++s)
        if (mask >> s & 1U) e.set(pairs[s].first, pairs[s].second, -1);
      const PhysicalSpinMatrix r = hadamard(code, e);
      for (std::size_t i = 0; i < 5; ++i)
        for (std::size_t j = i + 1; j < 5; ++j)
          for (std::size_t k = j + 1; k < 5; ++k) ASSERT_EQ(pe_syndrome_a(r, i, j, k), pe_syndrome_a(e, i, j, k));
    }
  }
}

TEST(Weight2, CodeStatesAreFixedPoints) {
  Rng rng(1, 4);
  for (std::size_t k = 3; k <= 14; ++k) {
    const PhysicalSpinMatrix code = encode_pe(random_state(k, rng));
    const auto out = pe_mvd_weight2(code);
    EXPECT_EQ(out.estimate, code);
    EXPECT_EQ(pe_mvd_iterated(code).iterations, 1u);
  }
}

TEST(Weight2, SingleErrorsCorrected) {
  Rng rng(2, 5);
  for (std::size_t k = 5; k <= 14; ++k) {
    const PhysicalSpinMatrix code = encode_pe(random_state(k, rng));
    for (const auto& [a, b] : site_pairs(k)) {
      PhysicalSpinMatrix r = code;
      r.flip(a, b);
      EXPECT_EQ(pe_mvd_weight2(r).estimate, code) << "K=" << k << " (" << a << "," << b << ")";
    }
  }
}

TEST(Weight2, MatchesMatrixProductOracle) {
  Rng rng(8, 8);
  for (int t = 0; t < 20; ++t) {
    const std::size_t k = 6 + t % 3;
    const PhysicalSpinMatrix r = hadamard(encode_pe(random_state(k, rng)), random_errors(k, 0.2, rng));
    const auto out = pe_mvd_weight2(r);
    for (std::size_t i = 0; i < k; ++i)
      for (std::size_t j = i + 1; j < k; ++j) {
        long prod = 0;  // (r (r - I))_ij
        for (std::size_t m = 0; m < k; ++m) prod += r.at(i, m) * (r.at(m, j) - (m == j ? 1 : 0));
        EXPECT_EQ(out.estimate.at(i, j), prod > 0 ? 1 : prod < 0 ? -1 : 1);
      }
  }
}

TEST(Weighted, UniformXiMatchesUnweighted) {
  Rng rng(4, 4);
  const std::size_t k = 8;
  const std::vector<double> xi(k * k, 0.1);
  for (int t = 0; t < 20; ++t) {
    const PhysicalSpinMatrix r = hadamard(encode_pe(random_state(k, rng)), random_errors(k, 0.1, rng));
    EXPECT_EQ(pe_mvd_weighted(r, xi).estimate, pe_mvd_weight2(r).estimate);
  }
}

TEST(Iterated, GaugeCovariance) {
  Rng rng(5, 5);
  for (int t = 0; t < 60; ++t) {
    // Even K gives an odd vote count, so ties cannot break the symmetry.
    const std::size_t k = 8 + 2 * (t % 3);
    const PhysicalSpinMatrix e = random_errors(k, 0.15, rng);
    const PhysicalSpinMatrix code = encode_pe(random_state(k, rng));
    const auto direct = pe_mvd_iterated(hadamard(e, code), 10);
    const auto gauged = pe_mvd_iterated(e, 10);
    EXPECT_EQ(direct.estimate, hadamard(gauged.estimate, code));
    EXPECT_EQ(direct.iterations, gauged.iterations);
  }
}

TEST(Iterated, ErrorsShrinkAndTraceIsRecorded) {
  Rng rng(6, 6);
  const SpinVector z = random_state(14, rng);
  const PhysicalSpinMatrix code = encode_pe(z);
  PhysicalSpinMatrix r = code;
  for (std::size_t a = 0; a < 14; ++a) r.flip(a, (a + 3) % 14);  // two errors per row
  std::vector<PhysicalSpinMatrix> trace;
  const auto out = pe_mvd_iterated(r, 10, TiePolicy::resolve_plus, &trace);
  EXPECT_EQ(trace.size(), out.iterations);
  EXPECT_EQ(out.estimate, code);
  EXPECT_TRUE(out.converged);
  EXPECT_LT(error_count(error_pattern(trace.front(), code)), error_count(error_pattern(r, code)));
  EXPECT_THROW(pe_mvd_iterated(r, 0), InvalidInput);
}

TEST(Extraction, PoliciesOnCodeStates) {
  const ProblemInstance inst = generate_instance(6, 3, 0.25);
  const SpinVector z{-1, 1, 1, -1, 1, -1};
  const PhysicalSpinMatrix code = encode_pe(z);
  for (ExtractionPolicy p :
       {ExtractionPolicy::code_row, ExtractionPolicy::energy_best_row, ExtractionPolicy::legacy_extra_vote})
    EXPECT_EQ(canonical_logical(extract_logical(code, inst, p)), canonical_logical(z));
  PhysicalSpinMatrix broken = code;
  broken.flip(2, 4);
  EXPECT_THROW(extract_logical(broken, inst, ExtractionPolicy::code_row), InvalidInput);
  EXPECT_EQ(extraction_policy_from_string("energy_best_row"), ExtractionPolicy::energy_best_row);
  EXPECT_THROW(extraction_policy_from_string("best"), InvalidInput);
}

TEST(Extraction, BestRowRecoversGroundStateFromCleanRows) {
  const ProblemInstance inst = generate_instance(8, 14, 0.25);
  const auto cert = brute_force_ground_state(inst);
  PhysicalSpinMatrix z = encode_pe(cert.state);
  z.flip(3, 5);
  z.flip(4, 7);
  z.flip(2, 6);
  ASSERT_FALSE(is_code_state(z));
  EXPECT_EQ(extract_logical(z, inst, ExtractionPolicy::energy_best_row), canonical_logical(cert.state));
}

TEST(Extraction, DecodeResultJson) {
  const ProblemInstance inst = generate_instance(5, 1, 0.25);
  const DecodeResult d = decode_pe(encode_pe(SpinVector{1, -1, 1, 1, -1}), inst, ExtractionPolicy::energy_best_row);
  nlohmann::json j = d;
  EXPECT_EQ(j["Z_star"], (std::vector<int>{1, -1, 1, 1, -1}));
  EXPECT_EQ(j["iters"], 1);
  EXPECT_EQ(j["converged"], true);
  EXPECT_EQ(j["policy"], "energy_best_row");
}

TEST(Ties, PolicyNames) {
  EXPECT_EQ(tie_policy_from_string(to_string(TiePolicy::hold_previous)), TiePolicy::hold_previous);
  EXPECT_THROW(tie_policy_from_string("coin"), InvalidInput);
}
