#include <gtest/gtest.h>

#include <cmath>
#include <memory>
#include <sstream>

#include "lhzqec/error.hpp"
#include "lhzqec/mcmc.hpp"

using namespace lhzqec;

namespace {

std::vector<std::unique_ptr<EnergyModel>> small_models() {
  std::vector<std::unique_ptr<EnergyModel>> out;
  out.push_back(std::make_unique<IsingModel>(toy_instance(), std::log(2.0)));
  out.push_back(std::make_unique<ParityModel>(generate_instance(4, 3, 0.25), WeightParameters(2.0, 0.3)));
  out.push_back(std::make_unique<ParityModel>(generate_instance(3, 5, 0.25), WeightParameters(1.0, 0.2),
                                              Layout::extended));
  out.push_back(std::make_unique<QacModel>(generate_instance(3, 8, 0.25), 3, QacWeights(2.0, 0.4),
                                           ChainStyle::chain));
  return out;
}

std::vector<Spin> random_spins(std::size_t n, Rng& rng) {
  std::vector<Spin> s(n);
  for (auto& v : s) v = static_cast<Spin>(rng.spin());
  return s;
}

}  // namespace

TEST(Mcmc, FlipDeltaMatchesEnergyDifference) {
  Rng rng(1, 1);
  for (const auto& model : small_models())
    for (int t = 0; t < 20; ++t) {
      auto s = random_spins(model->site_count(), rng);
      for (std::size_t i = 0; i < s.size(); ++i) {
        const double before = model->energy(s);
        const double delta = model->flip_delta(s, i);
        s[i] = static_cast<Spin>(-s[i]);
        EXPECT_NEAR(model->energy(s) - before, delta, 1e-12);
        s[i] = static_cast<Spin>(-s[i]);
      }
    }
}

TEST(Mcmc, PartsAddUpForParityModel) {
  const ProblemInstance inst = generate_instance(5, 9, 0.25);
  const ParityModel model(inst, WeightParameters(1.5, 0.4));
  Rng rng(2, 0);
  const auto s = random_spins(model.site_count(), rng);
  const EnergyParts p = model.parts(s);
  const PhysicalSpinMatrix z = model.to_matrix(s);
  EXPECT_NEAR(p.local, local_energy(z, inst), 1e-12);
  EXPECT_EQ(p.penalty, static_cast<double>(penalty_energy(z)));
  EXPECT_NEAR(p.total, 1.5 * p.local + 0.4 * p.penalty, 1e-12);
  EXPECT_EQ(model.from_matrix(z), s);
}

TEST(Mcmc, IncrementalEnergyStaysExact) {
  for (const auto& model : small_models())
    for (ChainMode mode : {ChainMode::standard, ChainMode::rejection_discarded, ChainMode::rejection_free}) {
      RunConfig cfg;
      cfg.mode = mode;
      cfg.steps = 3000;
      cfg.seed = 4;
      const RunSummary s = run_chain(*model, cfg, {});
      EXPECT_NEAR(s.final_energy, s.final_energy_recomputed, 1e-9);
      EXPECT_EQ(s.records, 3000u);
    }
}

TEST(Mcmc, KernelRowsAreStochasticAndBalanced) {
  for (const auto& model : small_models()) {
    const ExactKernels k = exact_kernels(*model);
    std::vector<double> pi(k.states);
    double z = 0.0;
    for (std::size_t r = 0; r < k.states; ++r) z += pi[r] = std::exp(-model->energy(state_from_rank(r, model->site_count())));
    for (double& p : pi) p /= z;
    for (std::size_t r = 0; r < k.states; ++r) {
      double row_std = 0.0, row_rf = 0.0;
      for (std::size_t c = 0; c < k.states; ++c) {
        row_std += k.standard[r * k.states + c];
        row_rf += k.rejection_free[r * k.states + c];
        EXPECT_NEAR(pi[r] * k.standard[r * k.states + c], pi[c] * k.standard[c * k.states + r], 1e-14);
      }
      EXPECT_NEAR(row_std, 1.0, 1e-12);
      EXPECT_NEAR(row_rf, 1.0, 1e-12);
      EXPECT_EQ(k.rejection_free[r * k.states + r], 0.0);
    }
    // pi * alpha is stationary for the rejection-free kernel.
    std::vector<double> tilde(k.states);
    double n = 0.0;
    for (std::size_t r = 0; r < k.states; ++r) n += tilde[r] = pi[r] * k.escape[r];
    for (std::size_t c = 0; c < k.states; ++c) {
      double flow = 0.0;
      for (std::size_t r = 0; r < k.states; ++r) flow += tilde[r] * k.rejection_free[r * k.states + c];
      EXPECT_NEAR(flow / n, tilde[c] / n, 1e-12);
    }
  }
}

TEST(Mcmc, ToyEscapeProbability) {
  const IsingModel model(toy_instance(), std::log(2.0));
  ChainState s(model, {-1, -1, -1}, Rng(0));
  const double k = 0.25;
  EXPECT_NEAR(escape_probability(s, model), (k * k * k + 2 * k * k) / 3.0, 1e-12);
}

TEST(Mcmc, MultiplicityIsGeometric) {
  Rng rng(3, 3);
  const double alpha = 0.3;
  constexpr int n = 200000;
  std::vector<double> counts(8, 0.0);
  double mean = 0.0;
  for (int t = 0; t < n; ++t) {
    const std::uint64_t m = multiplicity_sample(alpha, rng);
    ASSERT_GE(m, 1u);
    mean += static_cast<double>(m);
    counts[std::min<std::uint64_t>(m, 8) - 1] += 1;
  }
  EXPECT_NEAR(mean / n, 1.0 / alpha, 0.02);
  // Pearson chi-square over {1..7, >= 8}; 7 dof, 99.9% quantile ~24.3.
  double chi2 = 0.0;
  for (int m = 1; m <= 8; ++m) {
    const double p = m < 8 ? alpha * std::pow(1 - alpha, m - 1) : std::pow(1 - alpha, 7);
    chi2 += std::pow(counts[m - 1] - n * p, 2) / (n * p);
  }
  EXPECT_LT(chi2, 24.3);
  EXPECT_EQ(multiplicity_sample(1.0, rng), 1u);
  EXPECT_THROW(multiplicity_sample(0.0, rng), InvalidInput);
}

TEST(Mcmc, RejectionFreeNeverRepeats) {
  const ParityModel model(generate_instance(5, 2, 0.25), WeightParameters(4.0, 1.0));
  SeriesRecorder rec;
  SampleSink* sinks[] = {&rec};
  RunConfig cfg;
  cfg.steps = 2000;
  cfg.seed = 12;
  run_chain(model, cfg, sinks);
  const auto& r = rec.records();
  ASSERT_EQ(r.size(), 2000u);
  for (std::size_t t = 1; t < r.size(); ++t) {
    EXPECT_NE(r[t].spins, r[t - 1].spins);
    std::size_t diff = 0;
    for (std::size_t i = 0; i < r[t].spins.size(); ++i) diff += r[t].spins[i] != r[t - 1].spins[i];
    EXPECT_EQ(diff, 1u);
  }
}

TEST(Mcmc, RecoveredHistogramWeighsByMultiplicity) {
  std::vector<SampleRecord> s(3);
  s[0].spins = {1, 1};
  s[0].multiplicity = 3;
  s[1].spins = {-1, 1};
  s[1].multiplicity = 1;
  s[2].spins = {1, 1};
  s[2].multiplicity = 4;
  const auto w = recover_mb(s);
  const auto u = unweighted_histogram(s);
  EXPECT_DOUBLE_EQ(w.probability({1, 1}), 7.0 / 8.0);
  EXPECT_DOUBLE_EQ(u.probability({1, 1}), 2.0 / 3.0);
  EXPECT_DOUBLE_EQ(w.probability({-1, -1}), 0.0);
}

TEST(Mcmc, StepsCountsRecordsAfterBurnIn) {
  const IsingModel model(toy_instance(), 1.0);
  for (ChainMode mode : {ChainMode::standard, ChainMode::rejection_discarded, ChainMode::rejection_free}) {
    SeriesRecorder rec;
    SampleSink* sinks[] = {&rec};
    RunConfig cfg;
    cfg.mode = mode;
    cfg.steps = 1;
    cfg.burn_in = 10;
    cfg.seed = 5;
    const RunSummary s = run_chain(model, cfg, sinks);
    EXPECT_EQ(rec.records().size(), 1u);
    EXPECT_EQ(s.burn_in, 10u);
  }
}

TEST(Mcmc, SameSeedSameChain) {
  const ParityModel model(generate_instance(5, 1, 0.25), WeightParameters(1.0, 0.1));
  const auto run = [&](std::uint64_t seed) {
    SeriesRecorder rec;
    SampleSink* sinks[] = {&rec};
    RunConfig cfg;
    cfg.steps = 200;
    cfg.seed = seed;
    run_chain(model, cfg, sinks);
    std::vector<std::vector<Spin>> out;
    for (const auto& r : rec.records()) out.push_back(r.spins);
    return out;
  };
  EXPECT_EQ(run(7), run(7));
  EXPECT_NE(run(7), run(8));
}

TEST(Mcmc, PackedStateRoundTrip) {
  Rng rng(6, 0);
  for (std::size_t n : {1u, 4u, 5u, 21u, 91u}) {
    const auto s = random_spins(n, rng);
    EXPECT_EQ(unpack_state(pack_state(s), n), s);
  }
  EXPECT_EQ(pack_state(std::vector<Spin>{1, -1, -1, -1, 1}), "11");
}

TEST(Mcmc, CsvSinkWritesHeaderAndRows) {
  std::ostringstream out;
  CsvSeriesSink sink(out, true, R"({"k":1})");
  SampleRecord r;
  r.spins = {1, -1};
  r.energy = 0.5;
  r.sweep_index = 3;
  sink.consume(r);
  sink.finish();
  std::istringstream in(out.str());
  std::string meta, header, row;
  std::getline(in, meta);
  std::getline(in, header);
  std::getline(in, row);
  EXPECT_EQ(meta, R"(# {"k":1})");
  EXPECT_EQ(header, "sweep_index,energy_phys,energy_local,energy_pen,multiplicity,state_hash,state");
  EXPECT_EQ(row.rfind("3,0.5,", 0), 0u);
}

TEST(Mcmc, ModeNamesRoundTrip) {
  for (ChainMode m : {ChainMode::standard, ChainMode::rejection_discarded, ChainMode::rejection_free})
    EXPECT_EQ(chain_mode_from_string(to_string(m)), m);
  EXPECT_THROW(chain_mode_from_string("gibbs"), InvalidInput);
}
