// Command-line experiment runner.
//
//   lhzqec toy-validate   [--seed N] [--steps N] [--out-dir D]
//   lhzqec gen-instance   --K N [--seed N] [--half-width X] [--out FILE]
//   lhzqec ground-truth   --instance FILE
//   lhzqec sweep          --config FILE [--seed N] [--out-dir D] [--threads N]
//   lhzqec spectra        --config FILE [--seed N] [--out-dir D]
//   lhzqec decode-series  --config FILE [--out-dir D]
//
// Exit status: 0 success, 1 validation failure, 2 configuration error.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "CLI11.hpp"
#include "lhzqec/error.hpp"
#include "lhzqec/harness.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace lhzqec;

namespace {

constexpr int kOk = 0;
constexpr int kValidationFailure = 1;
constexpr int kConfigError = 2;

struct CommonFlags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> threads;
  std::string out_dir;
};

std::ofstream open_out(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path);
  require(static_cast<bool>(out), "cannot write " + path.string());
  return out;
}

ExperimentConfig load_with_overrides(const CommonFlags& f, const std::string& mode) {
  require(!f.config.empty(), "--config is required");
  ExperimentConfig c = load_config(f.config);
  if (c.mode.empty()) c.mode = mode;
  require(c.mode == mode, "config mode \"" + c.mode + "\" does not match subcommand");
  if (c.mode == "sweep" && c.grid.empty()) c.grid = default_grid();
  if (f.seed) c.seed = *f.seed;
  if (f.threads) c.threads = *f.threads;
  if (!f.out_dir.empty()) c.out_dir = f.out_dir;
  return c;
}

int cmd_toy(std::uint64_t seed, std::uint64_t steps, const std::string& out_dir) {
  const ToyReport report = toy_validate(seed, steps);
  for (const auto& c : report.checks)
    std::cout << (c.passed ? "PASS " : "FAIL ") << c.name << "  measured=" << c.measured
              << " threshold=" << c.threshold << "  (" << c.detail << ")\n";
  if (!out_dir.empty()) open_out(fs::path(out_dir) / "toy_report.json") << to_json(report).dump(2) << '\n';
  return report.passed() ? kOk : kValidationFailure;
}

int cmd_gen(std::size_t k, std::uint64_t seed, double half_width, const std::string& out) {
  const json j = generate_instance(k, seed, half_width);
  if (out.empty())
    std::cout << j.dump(2) << '\n';
  else
    open_out(out) << j.dump(2) << '\n';
  return kOk;
}

int cmd_ground_truth(const std::string& path) {
  InstanceSource src;
  src.kind = InstanceSource::Kind::file;
  src.path = path;
  const ProblemInstance inst = resolve_instance(src);
  const auto cert = brute_force_ground_state(inst);
  std::cout << json{{"state", std::vector<int>(cert.state.values().begin(), cert.state.values().end())},
                    {"energy", cert.energy},
                    {"degeneracy", cert.degeneracy}}
                   .dump(2)
            << '\n';
  return kOk;
}

int cmd_sweep(const CommonFlags& f) {
  const ExperimentConfig c = load_with_overrides(f, "sweep");
  const ProblemInstance inst = resolve_instance(c.instance);
  const SpinVector target = reference_state(inst, c.reference);
  SweepOptions o;
  o.grid = c.grid;
  o.repetitions = c.repetitions;
  o.chain_mode = c.chain_mode;
  o.steps = c.steps ? c.steps : o.steps;
  o.burn_in = c.burn_in;
  o.seed = c.seed;
  o.decoder = c.decoder;
  o.layout = c.layout;
  o.threads = c.threads;
  const SweepResult r = run_sweep(inst, target, o);
  auto csv = open_out(c.out_dir / "sweep.csv");
  write_sweep_csv(csv, r);
  open_out(c.out_dir / "sweep_summary.json") << sweep_summary(r, o).dump(2) << '\n';
  std::cout << "wrote " << (c.out_dir / "sweep.csv").string() << " (" << r.cells.size() << " cells)\n";
  return kOk;
}

int cmd_spectra(const CommonFlags& f) {
  const ExperimentConfig c = load_with_overrides(f, "spectra");
  const ProblemInstance inst = resolve_instance(c.instance);
  const SpinVector target = reference_state(inst, c.reference);
  SpectraOptions o;
  o.beta = c.beta;
  o.gamma = c.gamma;
  o.chain_mode = c.chain_mode;
  o.steps = c.steps;
  o.burn_in = c.burn_in;
  o.seed = c.seed;
  o.decoder = c.decoder;
  const fs::path series = c.series.empty() ? c.out_dir / "series.csv" : c.series;
  auto series_out = open_out(series);
  const SpectraResult r = run_spectra(inst, target, o, &series_out);
  for (const Spectrum* s : {&r.physical, &r.local, &r.penalty, &r.logical}) {
    auto out = open_out(c.out_dir / ("spectra_" + s->name + ".csv"));
    write_spectrum_csv(out, *s);
  }
  auto marginal = open_out(c.out_dir / "marginal.csv");
  write_marginal_csv(marginal, r);
  open_out(c.out_dir / "spectra_summary.json") << spectra_summary(r, o).dump(2) << '\n';
  std::cout << "samples=" << r.samples << " red=" << r.n_red << " gray=" << r.n_gray
            << " green=" << r.n_green << " other=" << r.n_other << '\n';
  return kOk;
}

int cmd_decode(const CommonFlags& f) {
  const ExperimentConfig c = load_with_overrides(f, "decode_series");
  std::ifstream in(c.series);
  require(static_cast<bool>(in), "cannot open series " + c.series.string());
  const StoredSeries series = read_series(in);
  DecodeSeriesOptions o;
  o.decoder = c.decoder;
  o.trace = c.trace;
  o.reference = c.reference;
  auto out = open_out(c.out_dir / "decoded.jsonl");
  if (c.trace.empty()) {
    decode_series(series, o, out);
  } else {
    auto traces = open_out(c.out_dir / "traces.json");
    decode_series(series, o, out, &traces);
  }
  std::cout << "decoded " << series.samples.size() << " samples\n";
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Parity-encoded spin-glass sampling and majority-vote decoding"};
  app.require_subcommand(1);

  std::uint64_t toy_seed = 1;
  std::uint64_t toy_steps = 1'000'000;
  std::string toy_out;
  auto* toy = app.add_subcommand("toy-validate", "Check the three chains on the 3-spin toy model");
  toy->add_option("--seed", toy_seed, "Master seed");
  toy->add_option("--steps", toy_steps, "Recorded samples per chain");
  toy->add_option("--out-dir", toy_out, "Directory for toy_report.json");

  std::size_t gen_k = 0;
  std::uint64_t gen_seed = 0;
  double gen_half = 0.25;
  std::string gen_out;
  auto* gen = app.add_subcommand("gen-instance", "Generate a random spin-glass instance");
  gen->add_option("--K", gen_k, "Number of logical spins")->required();
  gen->add_option("--seed", gen_seed, "Generator seed");
  gen->add_option("--half-width", gen_half, "Couplings drawn from [-w, w]");
  gen->add_option("--out", gen_out, "Output file (default stdout)");

  std::string gt_instance;
  auto* gt = app.add_subcommand("ground-truth", "Exhaustive ground state of an instance");
  gt->add_option("--instance", gt_instance, "Instance JSON file")->required();

  CommonFlags flags;
  const auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", flags.config, "Experiment config (JSON)")->required();
    sub->add_option("--seed", flags.seed, "Override the config seed");
    sub->add_option("--out-dir", flags.out_dir, "Override the output directory");
    sub->add_option("--threads", flags.threads, "Worker threads (0 = all cores)");
  };
  auto* sweep = app.add_subcommand("sweep", "(beta, gamma) landscape with bookkeeping");
  auto* spectra = app.add_subcommand("spectra", "Stored series, energy spectra and classes");
  auto* decode = app.add_subcommand("decode-series", "Offline decoding of a stored series");
  add_common(sweep);
  add_common(spectra);
  add_common(decode);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfigError;
  }

  try {
    if (*toy) return cmd_toy(toy_seed, toy_steps, toy_out);
    if (*gen) return cmd_gen(gen_k, gen_seed, gen_half, gen_out);
    if (*gt) return cmd_ground_truth(gt_instance);
    if (*sweep) return cmd_sweep(flags);
    if (*spectra) return cmd_spectra(flags);
    if (*decode) return cmd_decode(flags);
  } catch (const CorruptInput& e) {
    std::cerr << "error: corrupt input: " << e.what() << '\n';
    return kConfigError;
  } catch (const InvalidInput& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kConfigError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kValidationFailure;
  }
  return kOk;
}
