#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "lhzqec/decoder.hpp"
#include "lhzqec/ising.hpp"
#include "lhzqec/mcmc.hpp"
#include "lhzqec/parity.hpp"

namespace lhzqec {

// ---------------------------------------------------------------------------
// Configuration

struct InstanceSource {
  enum class Kind { none, inline_json, file, generator };
  Kind kind = Kind::none;
  nlohmann::json document;     // inline_json
  std::filesystem::path path;  // file
  std::size_t size = 0;        // generator
  std::uint64_t seed = 0;
  double half_width = 0.25;
};

struct DecoderOptions {
  ExtractionPolicy policy = ExtractionPolicy::energy_best_row;
  std::size_t n_max = 1;
  TiePolicy ties = TiePolicy::resolve_plus;
};

struct ExperimentConfig {
  std::string mode;
  InstanceSource instance;
  std::optional<SpinVector> reference;
  Layout layout = Layout::original;

  std::vector<std::pair<double, double>> grid;  // (beta, gamma)
  double beta = 1.0;
  double gamma = 0.1;

  std::size_t repetitions = 50;
  ChainMode chain_mode = ChainMode::rejection_free;
  std::uint64_t steps = 0;  // 0 = mode default
  std::uint64_t burn_in = 50;
  std::uint64_t seed = 1;
  DecoderOptions decoder;
  std::size_t threads = 0;  // 0 = hardware concurrency

  std::filesystem::path out_dir = ".";
  std::filesystem::path series;        // spectra output / decode_series input
  std::vector<std::uint64_t> trace;    // sample ordinals to dump per iteration
};

/// Parses a config document. Relative paths resolve against `base_dir`.
/// Throws InvalidInput on malformed or inconsistent settings.
ExperimentConfig config_from_json(const nlohmann::json& j,
                                  const std::filesystem::path& base_dir = ".");
ExperimentConfig load_config(const std::filesystem::path& path);
nlohmann::json to_json(const ExperimentConfig& config);

ProblemInstance resolve_instance(const InstanceSource& source);

/// Log-spaced beta x gamma grid used when a sweep config gives none.
std::vector<std::pair<double, double>> default_grid();

/// Reference logical ground state: the supplied one, else the exhaustive
/// oracle. Throws when neither is available.
SpinVector reference_state(const ProblemInstance& inst, const std::optional<SpinVector>& supplied);

// ---------------------------------------------------------------------------
// Toy-model validation

struct CheckResult {
  std::string name;
  bool passed = false;
  double measured = 0.0;
  double threshold = 0.0;
  std::string detail;
};

struct ToyReport {
  std::vector<CheckResult> checks;
  bool passed() const;
};

/// The eight toy states in table order: (---), (--+), (-+-), (+--), (-++),
/// (+-+), (++-), (+++).
std::vector<SpinVector> toy_states();
/// Toy inverse temperature: exp(-2 beta) = 1/4.
double toy_beta();
/// Closed-form stationary laws of the standard and rejection-free chains.
std::vector<double> toy_boltzmann(double k);
std::vector<double> toy_rejection_free(double k);

double total_variation(const std::vector<double>& p, const std::vector<double>& q);
/// Probabilities of `states` under `h`, in the given order.
std::vector<double> histogram_over(const StationaryHistogram& h, const std::vector<SpinVector>& states);

ToyReport toy_validate(std::uint64_t seed, std::uint64_t steps = 1'000'000);
nlohmann::json to_json(const ToyReport& report);

// ---------------------------------------------------------------------------
// (beta, gamma) sweeps

struct SweepOptions {
  std::vector<std::pair<double, double>> grid;
  std::size_t repetitions = 50;
  ChainMode chain_mode = ChainMode::rejection_free;
  std::uint64_t steps = 2000;
  std::uint64_t burn_in = 50;
  std::uint64_t seed = 1;
  DecoderOptions decoder;
  Layout layout = Layout::original;
  std::size_t threads = 0;
};

/// Outcome of one chain.
struct RunOutcome {
  bool sampled_code = false;
  bool map_hit = false;
  bool mvd_hit = false;
  std::uint64_t map_first_hit = 0;  // record ordinal (1-based) of the first target hit
  std::uint64_t mvd_first_hit = 0;
  std::uint64_t decoded = 0;
  std::uint64_t decode_iterations = 0;
};

struct SweepCell {
  double beta = 0.0;
  double gamma = 0.0;
  std::size_t reps = 0;
  std::size_t code_runs = 0;
  std::size_t map_hits = 0;
  std::size_t mvd_hits = 0;
  std::uint64_t decoded = 0;
  std::uint64_t decode_iterations = 0;
  double map_first_hit_sum = 0.0;
  double mvd_first_hit_sum = 0.0;

  double p_code() const { return reps ? static_cast<double>(code_runs) / reps : 0.0; }
  double p_target_map() const { return reps ? static_cast<double>(map_hits) / reps : 0.0; }
  double p_target_mvd() const { return reps ? static_cast<double>(mvd_hits) / reps : 0.0; }
  double mean_iters_mvd() const {
    return decoded ? static_cast<double>(decode_iterations) / static_cast<double>(decoded) : 0.0;
  }
};

struct SweepResult {
  std::vector<SweepCell> cells;
  SpinVector target;
  double target_energy = 0.0;
  /// Mean first-hit ordinal of MAP bookkeeping over that of MVD bookkeeping,
  /// over all runs where both hit; nullopt when no run had both.
  std::optional<double> first_hit_ratio;
};

/// One chain at (beta, gamma) with MAP and MVD bookkeeping against `target`.
RunOutcome run_bookkept_chain(const ProblemInstance& inst, const SpinVector& target,
                              const WeightParameters& w, const SweepOptions& options,
                              std::uint64_t seed);

SweepResult run_sweep(const ProblemInstance& inst, const SpinVector& target,
                      const SweepOptions& options);

void write_sweep_csv(std::ostream& out, const SweepResult& result);
nlohmann::json sweep_summary(const SweepResult& result, const SweepOptions& options);

// ---------------------------------------------------------------------------
// Spectra of a stored series

enum class SampleClass { red, gray, green, other };
std::string_view to_string(SampleClass c);

/// red: z* == z_g; gray: z* a code state but Z* != Z_g; green: Z* == Z_g but
/// z* not a code state; other: everything else.
SampleClass classify(const DecodeResult& decoded, const SpinVector& target);

struct SpectrumBin {
  double low = 0.0;
  double high = 0.0;
  std::size_t count = 0;
  std::size_t n_red = 0;
  std::size_t n_gray = 0;
  std::size_t n_green = 0;
  std::size_t n_other = 0;
};

struct Spectrum {
  std::string name;
  std::string binning;  // "unit" or "freedman_diaconis"
  double origin = 0.0;
  double width = 1.0;
  std::vector<SpectrumBin> bins;
};

/// Freedman-Diaconis width 2 IQR n^(-1/3). A vanishing IQR falls back to
/// Sturges' rule and a vanishing range to width 1.
double freedman_diaconis_width(std::vector<double> values);

/// Fixed-width histogram with class tallies.
Spectrum bin_spectrum(std::string name, std::string binning, const std::vector<double>& values,
                      const std::vector<SampleClass>& classes, double origin, double width);

struct SpectraOptions {
  double beta = 1.0;
  double gamma = 0.1;
  ChainMode chain_mode = ChainMode::rejection_free;
  std::uint64_t steps = 0;  // 0 = 600 K (K - 1) - 50
  std::uint64_t burn_in = 50;
  std::uint64_t seed = 1;
  DecoderOptions decoder;
};

struct SpectraResult {
  Spectrum physical;  // H^phys(r)
  Spectrum local;     // H^loc(r)
  Spectrum penalty;   // H^pen(r)
  Spectrum logical;   // H^logi(Z*), same bin edges as `local`
  std::size_t samples = 0;
  std::size_t n_red = 0;
  std::size_t n_gray = 0;
  std::size_t n_green = 0;
  std::size_t n_other = 0;
  std::size_t code_samples = 0;
  std::vector<double> marginal;  // dim x dim fraction with r_ij == (z_g)_ij
  std::size_t dim = 0;
  SpinVector target;
  double target_energy = 0.0;
};

std::uint64_t default_spectra_steps(std::size_t logical_size);

/// Samples one series in the original layout, optionally streams it to
/// `series_out` (CSV with packed states), and classifies every readout.
SpectraResult run_spectra(const ProblemInstance& inst, const SpinVector& target,
                          const SpectraOptions& options, std::ostream* series_out = nullptr);

void write_spectrum_csv(std::ostream& out, const Spectrum& s);
void write_marginal_csv(std::ostream& out, const SpectraResult& r);
nlohmann::json spectra_summary(const SpectraResult& r, const SpectraOptions& options);

/// Per-bin gray tallies of H^loc(r) and H^logi(Z*) agree.
bool gray_bins_unchanged(const SpectraResult& r);

// ---------------------------------------------------------------------------
// Offline decoding of a stored series

struct StoredSample {
  std::size_t line = 0;  // 1-based line in the file
  std::uint64_t sweep_index = 0;
  double energy = 0.0;
  std::uint64_t multiplicity = 1;
  PhysicalSpinMatrix readout;
};

struct StoredSeries {
  nlohmann::json metadata;
  ProblemInstance instance;
  Layout layout = Layout::original;
  std::vector<StoredSample> samples;
};

/// Reads a series written by run_spectra. Throws CorruptInput carrying the
/// offending line number.
StoredSeries read_series(std::istream& in);

struct DecodeSeriesOptions {
  DecoderOptions decoder;
  std::vector<std::uint64_t> trace;  // sample ordinals (0-based) to dump
  std::optional<SpinVector> reference;
};

/// Writes one JSON object per sample to `out`; traces of the requested
/// samples go to `trace_out` as one JSON document.
void decode_series(const StoredSeries& series, const DecodeSeriesOptions& options,
                   std::ostream& out, std::ostream* trace_out = nullptr);

}  // namespace lhzqec
