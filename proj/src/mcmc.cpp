#include "lhzqec/mcmc.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "lhzqec/error.hpp"

namespace lhzqec {

namespace {

double metropolis_rate(double delta) { return delta <= 0.0 ? 1.0 : std::exp(-delta); }

void check_spins(std::span<const Spin> spins, std::size_t sites) {
  require(spins.size() == sites, "chain state length does not match the model site count");
  for (Spin s : spins) require(s == 1 || s == -1, "chain state entries must be +1 or -1");
}

}  // namespace

// ---------------------------------------------------------------------------
// Models

EnergyParts EnergyModel::parts(std::span<const Spin> spins) const {
  const double e = energy(spins);
  return {e, e, 0.0};
}

void EnergyModel::neighbor_deltas(std::span<const Spin> spins, std::span<double> out) const {
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = flip_delta(spins, i);
}

IsingModel::IsingModel(ProblemInstance inst, double scale) : inst_(std::move(inst)), scale_(scale) {
  require(std::isfinite(scale_) && scale_ > 0.0, "IsingModel scale must be positive");
}

double IsingModel::energy(std::span<const Spin> spins) const {
  const std::size_t k = inst_.size();
  double e = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    e += inst_.field(i) * spins[i];
    for (std::size_t j = i + 1; j < k; ++j) e += inst_.coupling(i, j) * spins[i] * spins[j];
  }
  return scale_ * e;
}

double IsingModel::flip_delta(std::span<const Spin> spins, std::size_t site) const {
  double f = inst_.field(site);
  for (std::size_t j = 0; j < inst_.size(); ++j) f += inst_.coupling(site, j) * spins[j];
  return -2.0 * scale_ * spins[site] * f;
}

ParityModel::ParityModel(ProblemInstance inst, WeightParameters weights, Layout layout)
    : inst_(std::move(inst)),
      weights_(weights),
      layout_(layout),
      dim_(layout == Layout::extended ? inst_.size() + 1 : inst_.size()),
      sites_(site_pairs(dim_)) {
  require(dim_ >= 3, "ParityModel needs at least one plaquette");
  if (layout_ == Layout::original)
    require(!inst_.has_fields(), "original layout cannot represent local fields h");
  std::vector<std::size_t> index(dim_ * dim_, std::numeric_limits<std::size_t>::max());
  site_coupling_.reserve(sites_.size());
  for (std::size_t s = 0; s < sites_.size(); ++s) {
    const auto [a, b] = sites_[s];
    index[a * dim_ + b] = s;
    index[b * dim_ + a] = s;
    if (layout_ == Layout::original)
      site_coupling_.push_back(inst_.coupling(a, b));
    else if (a == 0)
      site_coupling_.push_back(inst_.field(b - 1));
    else
      site_coupling_.push_back(inst_.coupling(a - 1, b - 1));
  }
  site_plaquettes_.resize(sites_.size());
  for (const auto& [i, j] : plaquette_indices(dim_)) {
    std::vector<std::size_t> corners;
    const std::size_t cells[4][2] = {{i, j}, {i, j + 1}, {i + 1, j}, {i + 1, j + 1}};
    for (const auto& c : cells)
      if (c[0] != c[1]) corners.push_back(index[c[0] * dim_ + c[1]]);
    for (std::size_t s : corners) site_plaquettes_[s].push_back(plaquette_sites_.size());
    plaquette_sites_.push_back(std::move(corners));
  }
}

int ParityModel::plaquette_sign(std::span<const Spin> spins, std::size_t p) const {
  int v = 1;
  for (std::size_t s : plaquette_sites_[p]) v *= spins[s];
  return v;
}

EnergyParts ParityModel::parts(std::span<const Spin> spins) const {
  EnergyParts out;
  for (std::size_t s = 0; s < sites_.size(); ++s) out.local += site_coupling_[s] * spins[s];
  std::size_t violated = 0;
  for (std::size_t p = 0; p < plaquette_sites_.size(); ++p)
    violated += plaquette_sign(spins, p) < 0 ? 1 : 0;
  out.penalty = static_cast<double>(violated);
  out.total = weights_.beta * out.local + weights_.gamma * out.penalty;
  return out;
}

double ParityModel::energy(std::span<const Spin> spins) const { return parts(spins).total; }

double ParityModel::flip_delta(std::span<const Spin> spins, std::size_t site) const {
  // A flipped plaquette goes from (1 - S)/2 to (1 + S)/2: the penalty
  // changes by S per touched plaquette.
  int pen = 0;
  for (std::size_t p : site_plaquettes_[site]) pen += plaquette_sign(spins, p);
  return -2.0 * weights_.beta * site_coupling_[site] * spins[site] + weights_.gamma * pen;
}

PhysicalSpinMatrix ParityModel::to_matrix(std::span<const Spin> spins) const {
  PhysicalSpinMatrix z(inst_.size(), layout_);
  for (std::size_t s = 0; s < sites_.size(); ++s) z.set(sites_[s].first, sites_[s].second, spins[s]);
  return z;
}

std::vector<Spin> ParityModel::from_matrix(const PhysicalSpinMatrix& z) const {
  require(z.dim() == dim_ && z.layout() == layout_, "matrix does not match the parity model");
  std::vector<Spin> spins(sites_.size());
  for (std::size_t s = 0; s < sites_.size(); ++s)
    spins[s] = static_cast<Spin>(z.at(sites_[s].first, sites_[s].second));
  return spins;
}

QacModel::QacModel(ProblemInstance inst, std::size_t replicas, QacWeights weights, ChainStyle style)
    : inst_(std::move(inst)), replicas_(replicas), weights_(weights), style_(style) {
  require(replicas_ >= 1, "QacModel needs at least one replica");
}

EnergyParts QacModel::parts(std::span<const Spin> spins) const {
  const ReplicaMatrix z = to_matrix(spins);
  EnergyParts out;
  for (std::size_t k = 0; k < replicas_; ++k) out.local += logical_energy(z.column(k), inst_);
  out.penalty = replicas_ >= 2 ? static_cast<double>(qac_penalty(z, style_)) : 0.0;
  out.total = weights_.beta * out.local + weights_.gamma * out.penalty;
  return out;
}

double QacModel::energy(std::span<const Spin> spins) const { return parts(spins).total; }

double QacModel::flip_delta(std::span<const Spin> spins, std::size_t site) const {
  const std::size_t n = inst_.size();
  const std::size_t kk = replicas_;
  const std::size_t i = site / kk;
  const std::size_t k = site % kk;
  const auto at = [&](std::size_t row, std::size_t col) { return spins[row * kk + col]; };

  double f = inst_.field(i);
  for (std::size_t j = 0; j < n; ++j) f += inst_.coupling(i, j) * at(j, k);
  const double local = -2.0 * at(i, k) * f;

  int pen = 0;
  if (kk >= 2) {
    if (style_ == ChainStyle::star) {
      if (k == 0)
        for (std::size_t c = 1; c < kk; ++c) pen += at(i, 0) * at(i, c);
      else
        pen += at(i, 0) * at(i, k);
    } else {
      if (k > 0) pen += at(i, k - 1) * at(i, k);
      if (k + 1 < kk) pen += at(i, k) * at(i, k + 1);
    }
  }
  return weights_.beta * local + weights_.gamma * pen;
}

ReplicaMatrix QacModel::to_matrix(std::span<const Spin> spins) const {
  ReplicaMatrix z(inst_.size(), replicas_);
  for (std::size_t i = 0; i < inst_.size(); ++i)
    for (std::size_t k = 0; k < replicas_; ++k) z.set(i, k, spins[i * replicas_ + k]);
  return z;
}

// ---------------------------------------------------------------------------
// Chain state and steppers

ChainState::ChainState(const EnergyModel& model, std::vector<Spin> spins, Rng rng)
    : spins_(std::move(spins)), energy_(0.0), rng_(rng), deltas_(model.site_count()) {
  check_spins(spins_, model.site_count());
  require(!spins_.empty(), "chain state needs at least one site");
  energy_ = model.energy(spins_);
}

ChainState ChainState::random(const EnergyModel& model, Rng rng) {
  std::vector<Spin> spins(model.site_count());
  for (auto& s : spins) s = static_cast<Spin>(rng.spin());
  return ChainState(model, std::move(spins), rng);
}

void ChainState::apply_flip(std::size_t site, double delta) {
  spins_[site] = static_cast<Spin>(-spins_[site]);
  energy_ += delta;
  deltas_valid_ = false;
}

std::span<const double> ChainState::deltas(const EnergyModel& model) {
  if (!deltas_valid_) {
    model.neighbor_deltas(spins_, deltas_);
    deltas_valid_ = true;
  }
  return deltas_;
}

StepOutcome metropolis_step(ChainState& state, const EnergyModel& model) {
  StepOutcome out;
  out.site = state.rng().uniform_index(model.site_count());
  out.delta = model.flip_delta(state.spins(), out.site);
  // delta < -ln U  <=>  U < exp(-delta)
  out.accepted = out.delta <= 0.0 || out.delta < -std::log(state.rng().uniform_open());
  if (out.accepted) state.apply_flip(out.site, out.delta);
  return out;
}

double escape_probability(ChainState& state, const EnergyModel& model) {
  const auto deltas = state.deltas(model);
  double sum = 0.0;
  for (double d : deltas) sum += metropolis_rate(d);
  return sum / static_cast<double>(deltas.size());
}

StepOutcome rejection_free_step(ChainState& state, const EnergyModel& model) {
  const auto deltas = state.deltas(model);
  const double inv_m = 1.0 / static_cast<double>(deltas.size());
  double best_time = std::numeric_limits<double>::infinity();
  StepOutcome out;
  bool found = false;
  for (std::size_t i = 0; i < deltas.size(); ++i) {
    const double rate = metropolis_rate(deltas[i]) * inv_m;
    if (rate <= 0.0) continue;
    const double tau = state.rng().exponential(rate);
    if (!found || tau < best_time) {
      best_time = tau;
      out.site = i;
      out.delta = deltas[i];
      found = true;
    }
  }
  if (!found) throw std::logic_error("rejection_free_step: every transition rate vanished");
  out.accepted = true;
  state.apply_flip(out.site, out.delta);
  return out;
}

std::uint64_t multiplicity_sample(double alpha, Rng& rng) {
  require(alpha > 0.0 && alpha <= 1.0, "multiplicity_sample: alpha must lie in (0, 1]");
  if (alpha == 1.0) return 1;
  const double steps = std::floor(std::log(rng.uniform_open()) / std::log1p(-alpha));
  constexpr double cap = 1e18;
  return static_cast<std::uint64_t>(std::min(steps, cap)) + 1;
}

// ---------------------------------------------------------------------------
// Records and histograms

std::uint64_t state_hash(std::span<const Spin> spins) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (Spin s : spins) {
    h ^= static_cast<std::uint8_t>(s);
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string pack_state(std::span<const Spin> spins) {
  static constexpr char digits[] = "0123456789abcdef";
  std::string out((spins.size() + 3) / 4, '0');
  for (std::size_t i = 0; i < spins.size(); ++i)
    if (spins[i] > 0) {
      const std::size_t nib = i / 4;
      const int value = (out[nib] <= '9' ? out[nib] - '0' : out[nib] - 'a' + 10) | (1 << (i % 4));
      out[nib] = digits[value];
    }
  return out;
}

std::vector<Spin> unpack_state(std::string_view packed, std::size_t sites) {
  require(packed.size() == (sites + 3) / 4, "packed state has the wrong length");
  std::vector<Spin> spins(sites);
  for (std::size_t i = 0; i < sites; ++i) {
    const char c = packed[i / 4];
    int v = 0;
    if (c >= '0' && c <= '9')
      v = c - '0';
    else if (c >= 'a' && c <= 'f')
      v = c - 'a' + 10;
    else
      throw InvalidInput("packed state contains a non-hex character");
    spins[i] = (v >> (i % 4)) & 1 ? Spin{1} : Spin{-1};
  }
  return spins;
}

StationaryHistogram recover_mb(std::span<const SampleRecord> samples) {
  require(!samples.empty(), "recover_mb: no samples");
  StationaryHistogram h;
  for (const auto& r : samples) h.add(r.spins, static_cast<double>(r.multiplicity));
  return h;
}

StationaryHistogram unweighted_histogram(std::span<const SampleRecord> samples) {
  require(!samples.empty(), "unweighted_histogram: no samples");
  StationaryHistogram h;
  for (const auto& r : samples) h.add(r.spins, 1.0);
  return h;
}

EnergyHistogram energy_histogram(std::span<const SampleRecord> samples, double bin_width,
                                 bool weighted) {
  require(!samples.empty(), "energy_histogram: no samples");
  require(bin_width > 0.0, "energy_histogram: bin width must be positive");
  EnergyHistogram h;
  for (const auto& r : samples)
    h.add(static_cast<std::int64_t>(std::floor(r.energy / bin_width)),
          weighted ? static_cast<double>(r.multiplicity) : 1.0);
  return h;
}

void HistogramAccumulator::consume(const SampleRecord& record) {
  unweighted_.add(record.spins, 1.0);
  weighted_.add(record.spins, static_cast<double>(record.multiplicity));
}

void BestTracker::consume(const SampleRecord& record) {
  const std::optional<double> score = scorer_ ? scorer_(record) : std::optional<double>(record.energy);
  if (score && (!best_ || *score < best_score_)) {
    best_ = record;
    best_score_ = *score;
    first_hit_ = record.sweep_index;
  }
  if (keep_trajectory_)
    trajectory_.push_back(best_ ? best_score_ : std::numeric_limits<double>::infinity());
}

CsvSeriesSink::CsvSeriesSink(std::ostream& out, bool include_state, std::string metadata)
    : out_(out), include_state_(include_state) {
  if (!metadata.empty()) out_ << "# " << metadata << '\n';
  out_ << "sweep_index,energy_phys,energy_local,energy_pen,multiplicity,state_hash";
  if (include_state_) out_ << ",state";
  out_ << '\n';
  out_.precision(17);
}

void CsvSeriesSink::consume(const SampleRecord& r) {
  out_ << r.sweep_index << ',' << r.energy << ',' << r.energy_local << ',' << r.energy_penalty << ','
       << r.multiplicity << ',' << std::hex << state_hash(r.spins) << std::dec;
  if (include_state_) out_ << ',' << pack_state(r.spins);
  out_ << '\n';
}

// ---------------------------------------------------------------------------
// Driver

std::string_view to_string(ChainMode mode) {
  switch (mode) {
    case ChainMode::standard:
      return "standard";
    case ChainMode::rejection_discarded:
      return "rejection_discarded";
    case ChainMode::rejection_free:
      return "rejection_free";
  }
  return "unknown";
}

ChainMode chain_mode_from_string(std::string_view name) {
  if (name == "standard") return ChainMode::standard;
  if (name == "rejection_discarded") return ChainMode::rejection_discarded;
  if (name == "rejection_free") return ChainMode::rejection_free;
  throw InvalidInput("unknown chain mode \"" + std::string(name) + "\"");
}

RunSummary run_chain(const EnergyModel& model, const RunConfig& config,
                     std::span<SampleSink* const> sinks) {
  require(config.steps >= 1, "run_chain: steps must be at least 1");
  require(model.site_count() >= 1, "run_chain: model has no sites");
  if (config.initial) check_spins(*config.initial, model.site_count());
  for (auto* sink : sinks) require(sink != nullptr, "run_chain: null sink");

  Rng rng(config.seed, config.chain_id);
  ChainState state = config.initial ? ChainState(model, *config.initial, rng)
                                    : ChainState::random(model, rng);

  RunSummary summary;
  summary.mode = config.mode;
  summary.burn_in = config.burn_in;
  const std::uint64_t wanted = config.burn_in + config.steps;
  std::uint64_t produced = 0;
  bool have_best = false;

  const auto snapshot = [&](std::uint64_t sweep, std::uint64_t multiplicity) {
    SampleRecord r;
    r.spins.assign(state.spins().begin(), state.spins().end());
    const EnergyParts p = model.parts(state.spins());
    r.energy = state.energy();
    r.energy_local = p.local;
    r.energy_penalty = p.penalty;
    r.multiplicity = multiplicity;
    r.sweep_index = sweep;
    return r;
  };
  const auto emit = [&](const SampleRecord& r) {
    ++produced;
    if (produced <= config.burn_in) return;
    ++summary.records;
    if (!have_best || r.energy < summary.best.energy) {
      summary.best = r;
      have_best = true;
    }
    for (auto* sink : sinks) sink->consume(r);
  };

  switch (config.mode) {
    case ChainMode::standard:
      while (produced < wanted) {
        const StepOutcome o = metropolis_step(state, model);
        ++summary.attempts;
        summary.accepted += o.accepted ? 1 : 0;
        emit(snapshot(summary.attempts, 1));
      }
      break;

    case ChainMode::rejection_discarded: {
      const std::uint64_t cap =
          config.max_attempts ? config.max_attempts : 1000 * wanted * model.site_count();
      std::optional<SampleRecord> pending;
      while (produced < wanted) {
        if (summary.attempts >= cap)
          throw std::runtime_error("run_chain: rejection-discarded attempt cap reached");
        const StepOutcome o = metropolis_step(state, model);
        ++summary.attempts;
        if (o.accepted) {
          ++summary.accepted;
          if (pending) emit(*pending);
          pending = snapshot(summary.attempts, 1);
        } else if (pending) {
          ++pending->multiplicity;
        }
      }
      break;
    }

    case ChainMode::rejection_free:
      while (produced < wanted) {
        rejection_free_step(state, model);
        ++summary.attempts;
        ++summary.accepted;
        const double alpha = escape_probability(state, model);
        emit(snapshot(summary.attempts, multiplicity_sample(alpha, state.rng())));
      }
      break;
  }

  for (auto* sink : sinks) sink->finish();
  summary.final_energy = state.energy();
  summary.final_energy_recomputed = model.energy(state.spins());
  return summary;
}

void to_json(nlohmann::json& j, const RunSummary& s) {
  j = nlohmann::json{{"mode", std::string(to_string(s.mode))},
                     {"records", s.records},
                     {"attempts", s.attempts},
                     {"accepted", s.accepted},
                     {"burn_in", s.burn_in},
                     {"best_energy", s.best.energy},
                     {"best_sweep", s.best.sweep_index},
                     {"best_state", pack_state(s.best.spins)},
                     {"final_energy", s.final_energy},
                     {"final_energy_recomputed", s.final_energy_recomputed}};
}

std::uint64_t state_rank(std::span<const Spin> spins) {
  require(spins.size() <= 64, "state_rank supports at most 64 sites");
  std::uint64_t r = 0;
  for (Spin s : spins) r = (r << 1) | (s > 0 ? 1U : 0U);
  return r;
}

std::vector<Spin> state_from_rank(std::uint64_t rank, std::size_t sites) {
  std::vector<Spin> spins(sites);
  for (std::size_t i = 0; i < sites; ++i)
    spins[i] = (rank >> (sites - 1 - i)) & 1U ? Spin{1} : Spin{-1};
  return spins;
}

ExactKernels exact_kernels(const EnergyModel& model) {
  const std::size_t m = model.site_count();
  require(m >= 1 && m <= 14, "exact_kernels: supports 1..14 sites");
  ExactKernels k;
  k.states = std::size_t{1} << m;
  k.standard.assign(k.states * k.states, 0.0);
  k.rejection_free.assign(k.states * k.states, 0.0);
  k.escape.assign(k.states, 0.0);
  std::vector<double> deltas(m);
  for (std::size_t r = 0; r < k.states; ++r) {
    const auto spins = state_from_rank(r, m);
    model.neighbor_deltas(spins, deltas);
    double alpha = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      const std::size_t to = r ^ (std::size_t{1} << (m - 1 - i));
      const double p = metropolis_rate(deltas[i]) / static_cast<double>(m);
      k.standard[r * k.states + to] += p;
      alpha += p;
    }
    k.standard[r * k.states + r] += 1.0 - alpha;
    k.escape[r] = alpha;
    for (std::size_t i = 0; i < m; ++i) {
      const std::size_t to = r ^ (std::size_t{1} << (m - 1 - i));
      k.rejection_free[r * k.states + to] = k.standard[r * k.states + to] / alpha;
    }
  }
  return k;
}

}  // namespace lhzqec
