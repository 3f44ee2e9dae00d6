#include <gtest/gtest.h>

#include <limits>

#include <nlohmann/json.hpp>

#include "lhzqec/error.hpp"
#include "lhzqec/qac.hpp"

using namespace lhzqec;

TEST(Qac, EncodingRepeatsColumns) {
  const SpinVector z{1, -1, -1};
  const ReplicaMatrix r = encode_qac(z, 4);
  for (std::size_t k = 0; k < 4; ++k) EXPECT_EQ(r.column(k), z);
  EXPECT_EQ(qac_penalty(r, ChainStyle::star), 0u);
  EXPECT_EQ(qac_penalty(r, ChainStyle::chain), 0u);
}

TEST(Qac, StarAndChainPenaltiesDiffer) {
  // Row (+, -, +, -): star compares against replica 0, chain against the neighbor.
  const ReplicaMatrix r = ReplicaMatrix::from_rows({{1, -1, 1, -1}, {1, 1, 1, 1}});
  EXPECT_EQ(qac_penalty(r, ChainStyle::star), 2u);
  EXPECT_EQ(qac_penalty(r, ChainStyle::chain), 3u);
  const ReplicaMatrix s = ReplicaMatrix::from_rows({{-1, 1, 1, 1}});
  EXPECT_EQ(qac_penalty(s, ChainStyle::star), 3u);
  EXPECT_EQ(qac_penalty(s, ChainStyle::chain), 1u);
}

TEST(Qac, EnergyIsWeightedSumOverReplicas) {
  const ProblemInstance inst = generate_instance(5, 3, 0.25);
  const ReplicaMatrix r =
      ReplicaMatrix::from_rows({{1, -1, 1}, {1, 1, -1}, {-1, -1, -1}, {1, 1, 1}, {-1, 1, 1}});
  double sum = 0.0;
  for (std::size_t k = 0; k < 3; ++k) sum += logical_energy(r.column(k), inst);
  const QacWeights w(3.0, 0.7);
  EXPECT_NEAR(qac_energy(r, inst, w, ChainStyle::star),
              3.0 * sum + 0.7 * static_cast<double>(qac_penalty(r, ChainStyle::star)), 1e-12);
}

TEST(Qac, GroundStateIsEncodedLogicalGround) {
  // Exhaustive over N = 3, K = 3 (512 configurations) with a positive penalty.
  const ProblemInstance inst = generate_instance(3, 17, 0.25);
  const auto cert = brute_force_ground_state(inst);
  const QacWeights w(1.0, 0.3);
  double best = std::numeric_limits<double>::infinity();
  for (unsigned mask = 0; mask < 512; ++mask) {
    ReplicaMatrix r(3, 3);
    for (std::size_t s = 0; s < 9; ++s)
      if (mask >> s & 1U) r.flip(s / 3, s % 3);
    best = std::min(best, qac_energy(r, inst, w, ChainStyle::chain));
  }
  EXPECT_NEAR(best, qac_energy(encode_qac(cert.state, 3), inst, w, ChainStyle::chain), 1e-12);
  EXPECT_NEAR(best, 3.0 * cert.energy, 1e-12);
}

TEST(Qac, BestReplicaPicksLowestEnergyFirstOnTies) {
  const ProblemInstance inst = toy_instance();
  // Columns: (+++) -> 1, (---) -> -5, (---) -> -5.
  const ReplicaMatrix r = ReplicaMatrix::from_rows({{1, -1, -1}, {1, -1, -1}, {1, -1, -1}});
  const ReplicaEnergies e = strategy_energies(r, inst);
  ASSERT_EQ(e.energies.size(), 3u);
  EXPECT_DOUBLE_EQ(e.energies[0], 1.0);
  EXPECT_DOUBLE_EQ(e.energies[1], -5.0);
  EXPECT_EQ(e.best, 1u);
}

TEST(Qac, JsonRoundTripAndErrors) {
  const ReplicaMatrix r = ReplicaMatrix::from_rows({{1, -1}, {-1, -1}, {1, 1}});
  nlohmann::json j;
  to_json(j, r);
  EXPECT_EQ(replica_from_json(nlohmann::json::parse(j.dump())), r);
  EXPECT_THROW(ReplicaMatrix::from_rows({{1, -1}, {1}}), InvalidInput);
  EXPECT_THROW(qac_penalty(ReplicaMatrix(3, 1), ChainStyle::star), InvalidInput);
  EXPECT_THROW(chain_style_from_string("ring"), InvalidInput);
  EXPECT_THROW(QacWeights(1.0, -0.1), InvalidInput);
}
