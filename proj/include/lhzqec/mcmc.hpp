#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "lhzqec/ising.hpp"
#include "lhzqec/parity.hpp"
#include "lhzqec/qac.hpp"
#include "lhzqec/rng.hpp"
#include "lhzqec/spin.hpp"

namespace lhzqec {

struct EnergyParts {
  double total = 0.0;
  double local = 0.0;
  double penalty = 0.0;
};

/// Energy function over M flippable bipolar sites. Inverse temperature is
/// folded into the model weights, so acceptance uses exp(-delta) directly.
class EnergyModel {
 public:
  virtual ~EnergyModel() = default;

  virtual std::size_t site_count() const = 0;
  virtual double energy(std::span<const Spin> spins) const = 0;
  /// energy(spins with `site` flipped) - energy(spins).
  virtual double flip_delta(std::span<const Spin> spins, std::size_t site) const = 0;
  /// Decomposition into local and penalty terms (unweighted); defaults to
  /// a pure local model.
  virtual EnergyParts parts(std::span<const Spin> spins) const;

  void neighbor_deltas(std::span<const Spin> spins, std::span<double> out) const;
};

/// scale * H^logi(Z); one site per logical spin.
class IsingModel final : public EnergyModel {
 public:
  explicit IsingModel(ProblemInstance inst, double scale = 1.0);

  std::size_t site_count() const override { return inst_.size(); }
  double energy(std::span<const Spin> spins) const override;
  double flip_delta(std::span<const Spin> spins, std::size_t site) const override;
  const ProblemInstance& instance() const noexcept { return inst_; }

 private:
  ProblemInstance inst_;
  double scale_;
};

/// beta * H^loc(z) + gamma * H^pen(z) over the upper-triangle physical sites
/// of a PhysicalSpinMatrix (ordered as site_pairs(dim)).
class ParityModel final : public EnergyModel {
 public:
  ParityModel(ProblemInstance inst, WeightParameters weights, Layout layout = Layout::original);

  std::size_t site_count() const override { return sites_.size(); }
  double energy(std::span<const Spin> spins) const override;
  double flip_delta(std::span<const Spin> spins, std::size_t site) const override;
  EnergyParts parts(std::span<const Spin> spins) const override;

  PhysicalSpinMatrix to_matrix(std::span<const Spin> spins) const;
  std::vector<Spin> from_matrix(const PhysicalSpinMatrix& z) const;

  const ProblemInstance& instance() const noexcept { return inst_; }
  const WeightParameters& weights() const noexcept { return weights_; }
  Layout layout() const noexcept { return layout_; }
  std::size_t dim() const noexcept { return dim_; }

 private:
  int plaquette_sign(std::span<const Spin> spins, std::size_t p) const;

  ProblemInstance inst_;
  WeightParameters weights_;
  Layout layout_;
  std::size_t dim_;
  std::vector<SitePair> sites_;
  std::vector<double> site_coupling_;
  std::vector<std::vector<std::size_t>> plaquette_sites_;  // off-diagonal corners
  std::vector<std::vector<std::size_t>> site_plaquettes_;
};

/// beta * sum_k H^logi(column k) + gamma * H^pen; site = i * K + k.
class QacModel final : public EnergyModel {
 public:
  QacModel(ProblemInstance inst, std::size_t replicas, QacWeights weights, ChainStyle style);

  std::size_t site_count() const override { return inst_.size() * replicas_; }
  double energy(std::span<const Spin> spins) const override;
  double flip_delta(std::span<const Spin> spins, std::size_t site) const override;
  EnergyParts parts(std::span<const Spin> spins) const override;

  ReplicaMatrix to_matrix(std::span<const Spin> spins) const;
  std::size_t replicas() const noexcept { return replicas_; }
  const ProblemInstance& instance() const noexcept { return inst_; }

 private:
  ProblemInstance inst_;
  std::size_t replicas_;
  QacWeights weights_;
  ChainStyle style_;
};

/// Chain position with cached energy and its own generator. The neighbor
/// delta cache is filled lazily and invalidated by every move.
class ChainState {
 public:
  ChainState(const EnergyModel& model, std::vector<Spin> spins, Rng rng);
  /// Uniformly random initial configuration drawn from `rng`.
  static ChainState random(const EnergyModel& model, Rng rng);

  std::span<const Spin> spins() const noexcept { return spins_; }
  double energy() const noexcept { return energy_; }
  Rng& rng() noexcept { return rng_; }

  void apply_flip(std::size_t site, double delta);
  std::span<const double> deltas(const EnergyModel& model);

 private:
  std::vector<Spin> spins_;
  double energy_;
  Rng rng_;
  std::vector<double> deltas_;
  bool deltas_valid_ = false;
};

struct StepOutcome {
  std::size_t site = 0;
  bool accepted = false;
  double delta = 0.0;
};

/// One Metropolis attempt: uniform site, accept with min{1, exp(-delta)}.
StepOutcome metropolis_step(ChainState& state, const EnergyModel& model);

/// alpha_0 = (1/M) sum_i min{1, exp(-delta_i)}.
double escape_probability(ChainState& state, const EnergyModel& model);

/// Embedded-chain move: exponential holding time per neighbor with rate
/// p_0i, the smallest wins. Always changes the state.
StepOutcome rejection_free_step(ChainState& state, const EnergyModel& model);

/// Self-loop count of the standard chain at escape probability alpha:
/// floor(ln U / ln(1 - alpha)) + 1, always 1 when alpha == 1.
std::uint64_t multiplicity_sample(double alpha, Rng& rng);

struct SampleRecord {
  std::vector<Spin> spins;
  double energy = 0.0;
  double energy_local = 0.0;
  double energy_penalty = 0.0;
  std::uint64_t multiplicity = 1;
  std::uint64_t sweep_index = 0;
};

std::uint64_t state_hash(std::span<const Spin> spins);
/// Site k -> bit k (1 for +1), hex encoded, least significant nibble first.
std::string pack_state(std::span<const Spin> spins);
std::vector<Spin> unpack_state(std::string_view packed, std::size_t sites);

/// Empirical distribution over states (or over energy bins).
template <typename Key>
struct Histogram {
  std::map<Key, double> weight;
  double total = 0.0;

  void add(const Key& key, double w) {
    weight[key] += w;
    total += w;
  }
  double probability(const Key& key) const {
    const auto it = weight.find(key);
    return it == weight.end() || total == 0.0 ? 0.0 : it->second / total;
  }
};

using StationaryHistogram = Histogram<std::vector<Spin>>;
using EnergyHistogram = Histogram<std::int64_t>;

/// Multiplicity-weighted histogram: each record counts M_k times, which
/// undoes the self-loop removal of the rejection-free chain.
StationaryHistogram recover_mb(std::span<const SampleRecord> samples);
/// Every record counts once.
StationaryHistogram unweighted_histogram(std::span<const SampleRecord> samples);
/// Energy-binned variant (bin = floor(energy / width)) for larger systems.
EnergyHistogram energy_histogram(std::span<const SampleRecord> samples, double bin_width,
                                 bool weighted);

class SampleSink {
 public:
  virtual ~SampleSink() = default;
  virtual void consume(const SampleRecord& record) = 0;
  virtual void finish() {}
};

class SeriesRecorder final : public SampleSink {
 public:
  void consume(const SampleRecord& record) override { records_.push_back(record); }
  const std::vector<SampleRecord>& records() const noexcept { return records_; }
  std::vector<SampleRecord> take() { return std::move(records_); }

 private:
  std::vector<SampleRecord> records_;
};

class HistogramAccumulator final : public SampleSink {
 public:
  void consume(const SampleRecord& record) override;
  const StationaryHistogram& unweighted() const noexcept { return unweighted_; }
  const StationaryHistogram& weighted() const noexcept { return weighted_; }

 private:
  StationaryHistogram unweighted_;
  StationaryHistogram weighted_;
};

/// Lowest-score bookkeeping. The default score is the record energy; a
/// custom scorer may decode the sample and return nullopt to skip it.
class BestTracker final : public SampleSink {
 public:
  using Scorer = std::function<std::optional<double>(const SampleRecord&)>;

  BestTracker() = default;
  explicit BestTracker(Scorer scorer) : scorer_(std::move(scorer)) {}

  void consume(const SampleRecord& record) override;

  bool has_best() const noexcept { return best_.has_value(); }
  const SampleRecord& best() const { return *best_; }
  double best_score() const noexcept { return best_score_; }
  /// Sweep index at which the current best was first seen.
  std::uint64_t first_hit() const noexcept { return first_hit_; }
  /// Best score after each consumed record.
  const std::vector<double>& trajectory() const noexcept { return trajectory_; }
  void keep_trajectory(bool on) { keep_trajectory_ = on; }

 private:
  Scorer scorer_;
  std::optional<SampleRecord> best_;
  double best_score_ = 0.0;
  std::uint64_t first_hit_ = 0;
  bool keep_trajectory_ = false;
  std::vector<double> trajectory_;
};

/// Streams records as CSV: sweep_index, energy_phys, energy_local,
/// energy_pen, multiplicity, state_hash[, state].
class CsvSeriesSink final : public SampleSink {
 public:
  CsvSeriesSink(std::ostream& out, bool include_state, std::string metadata = {});
  void consume(const SampleRecord& record) override;
  void finish() override { out_.flush(); }

 private:
  std::ostream& out_;
  bool include_state_;
};

enum class ChainMode { standard, rejection_discarded, rejection_free };

std::string_view to_string(ChainMode mode);
ChainMode chain_mode_from_string(std::string_view name);

struct RunConfig {
  ChainMode mode = ChainMode::rejection_free;
  /// Records delivered to sinks (after burn-in).
  std::uint64_t steps = 1;
  /// Leading records discarded.
  std::uint64_t burn_in = 50;
  std::uint64_t seed = 0;
  std::uint64_t chain_id = 0;
  std::optional<std::vector<Spin>> initial;
  /// Guard on Metropolis attempts for the rejection-discarded mode
  /// (0 = 1000 * (steps + burn_in) * M).
  std::uint64_t max_attempts = 0;
};

struct RunSummary {
  ChainMode mode = ChainMode::rejection_free;
  std::uint64_t records = 0;
  std::uint64_t attempts = 0;
  std::uint64_t accepted = 0;
  std::uint64_t burn_in = 0;
  SampleRecord best;
  double final_energy = 0.0;
  double final_energy_recomputed = 0.0;
};

/// Drives one chain and feeds every post-burn-in record to `sinks`.
/// Standard mode records each attempt (multiplicity 1). The
/// rejection-discarded mode records accepted states with their observed
/// dwell count. The rejection-free mode records each post-move state with
/// a sampled geometric multiplicity.
RunSummary run_chain(const EnergyModel& model, const RunConfig& config,
                     std::span<SampleSink* const> sinks);

void to_json(nlohmann::json& j, const RunSummary& summary);

/// Dense standard (Metropolis) and rejection-free kernels, indexed by the
/// lexicographic state rank. For exhaustive checks on small models.
struct ExactKernels {
  std::size_t states = 0;
  std::vector<double> standard;
  std::vector<double> rejection_free;
  std::vector<double> escape;  ///< alpha_i per state
};
ExactKernels exact_kernels(const EnergyModel& model);

std::uint64_t state_rank(std::span<const Spin> spins);
std::vector<Spin> state_from_rank(std::uint64_t rank, std::size_t sites);

}  // namespace lhzqec
