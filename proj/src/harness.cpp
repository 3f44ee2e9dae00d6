#include "lhzqec/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <fstream>
#include <istream>
#include <limits>
#include <mutex>
#include <ostream>
#include <sstream>
#include <thread>

#include "lhzqec/error.hpp"

namespace lhzqec {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

template <typename T>
T get_or(const json& j, const char* key, T fallback) {
  if (!j.contains(key) || j[key].is_null()) return fallback;
  try {
    return j[key].get<T>();
  } catch (const json::exception&) {
    throw InvalidInput(std::string("config field \"") + key + "\" has the wrong type");
  }
}

std::vector<double> number_list(const json& j, const char* key) {
  require(j[key].is_array() && !j[key].empty(),
          std::string("config field \"") + key + "\" must be a nonempty array");
  std::vector<double> out;
  for (const auto& v : j[key]) {
    require(v.is_number(), std::string("config field \"") + key + "\" must hold numbers");
    out.push_back(v.get<double>());
  }
  return out;
}

SpinVector spin_vector_from_json(const json& j, const char* what) {
  require(j.is_array() && !j.empty(), std::string(what) + " must be a nonempty array of +1/-1");
  std::vector<Spin> v;
  for (const auto& x : j) {
    require(x.is_number_integer() && (x.get<int>() == 1 || x.get<int>() == -1),
            std::string(what) + " entries must be +1 or -1");
    v.push_back(static_cast<Spin>(x.get<int>()));
  }
  return SpinVector(std::move(v));
}

bool same_logical(const SpinVector& a, const SpinVector& b, Layout layout) {
  return layout == Layout::original ? canonical_logical(a) == canonical_logical(b) : a == b;
}

std::vector<double> normalized(std::vector<double> w) {
  double total = 0.0;
  for (double x : w) total += x;
  for (double& x : w) x /= total;
  return w;
}

template <typename Fn>
void parallel_for(std::size_t tasks, std::size_t threads, Fn&& fn) {
  if (threads == 0) threads = std::max(1U, std::thread::hardware_concurrency());
  threads = std::min(threads, std::max<std::size_t>(tasks, 1));
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  const auto worker = [&] {
    for (std::size_t t = next++; t < tasks; t = next++) {
      try {
        fn(t);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next = tasks;
      }
    }
  };
  {
    std::vector<std::jthread> pool;
    for (std::size_t i = 1; i < threads; ++i) pool.emplace_back(worker);
    worker();
  }
  if (failure) std::rethrow_exception(failure);
}

}  // namespace

// ---------------------------------------------------------------------------
// Configuration

ExperimentConfig config_from_json(const json& j, const fs::path& base_dir) {
  require(j.is_object(), "config must be a JSON object");
  ExperimentConfig c;
  const auto resolve = [&](const std::string& p) {
    const fs::path path(p);
    return path.is_absolute() ? path : base_dir / path;
  };

  c.mode = get_or<std::string>(j, "mode", "");

  if (j.contains("instance")) {
    const json& src = j["instance"];
    require(src.is_object(), "\"instance\" must be an object");
    if (src.contains("generate")) {
      const json& g = src["generate"];
      c.instance.kind = InstanceSource::Kind::generator;
      c.instance.size = get_or<std::size_t>(g, "K", 0);
      c.instance.seed = get_or<std::uint64_t>(g, "seed", 0);
      c.instance.half_width = get_or<double>(g, "half_width", 0.25);
      require(c.instance.size >= 2, "generated instance needs \"K\" >= 2");
    } else if (src.contains("file")) {
      c.instance.kind = InstanceSource::Kind::file;
      c.instance.path = resolve(src["file"].get<std::string>());
      require(fs::exists(c.instance.path), "instance file not found: " + c.instance.path.string());
    } else if (src.contains("inline")) {
      c.instance.kind = InstanceSource::Kind::inline_json;
      c.instance.document = src["inline"];
    } else {
      throw InvalidInput("\"instance\" needs one of \"generate\", \"file\", \"inline\"");
    }
  }

  if (j.contains("reference") && !j["reference"].is_null())
    c.reference = spin_vector_from_json(j["reference"], "\"reference\"");
  if (j.contains("layout")) c.layout = layout_from_string(j["layout"].get<std::string>());

  if (j.contains("grid")) {
    require(j["grid"].is_array() && !j["grid"].empty(), "\"grid\" must be a nonempty array");
    for (const auto& cell : j["grid"]) {
      require(cell.is_array() && cell.size() == 2 && cell[0].is_number() && cell[1].is_number(),
              "\"grid\" entries must be [beta, gamma] pairs");
      c.grid.emplace_back(cell[0].get<double>(), cell[1].get<double>());
    }
  } else if (j.contains("betas") || j.contains("gammas")) {
    require(j.contains("betas") && j.contains("gammas"), "\"betas\" and \"gammas\" go together");
    for (double b : number_list(j, "betas"))
      for (double g : number_list(j, "gammas")) c.grid.emplace_back(b, g);
  }
  for (const auto& [b, g] : c.grid) WeightParameters check(b, g);

  c.beta = get_or<double>(j, "beta", c.beta);
  c.gamma = get_or<double>(j, "gamma", c.gamma);
  c.repetitions = get_or<std::size_t>(j, "repetitions", c.repetitions);
  require(c.repetitions >= 1, "\"repetitions\" must be at least 1");
  if (j.contains("chain_mode")) c.chain_mode = chain_mode_from_string(j["chain_mode"].get<std::string>());
  c.steps = get_or<std::uint64_t>(j, "steps", c.steps);
  c.burn_in = get_or<std::uint64_t>(j, "burn_in", c.burn_in);
  c.seed = get_or<std::uint64_t>(j, "seed", c.seed);
  c.threads = get_or<std::size_t>(j, "threads", c.threads);

  if (j.contains("decoder")) {
    const json& d = j["decoder"];
    require(d.is_object(), "\"decoder\" must be an object");
    if (d.contains("policy")) c.decoder.policy = extraction_policy_from_string(d["policy"].get<std::string>());
    if (d.contains("ties")) c.decoder.ties = tie_policy_from_string(d["ties"].get<std::string>());
    c.decoder.n_max = get_or<std::size_t>(d, "n_max", c.decoder.n_max);
    require(c.decoder.n_max >= 1, "\"decoder.n_max\" must be at least 1");
  }

  if (j.contains("output")) {
    const json& o = j["output"];
    if (o.contains("dir")) c.out_dir = resolve(o["dir"].get<std::string>());
    if (o.contains("series")) c.series = resolve(o["series"].get<std::string>());
  }
  if (j.contains("series")) c.series = resolve(j["series"].get<std::string>());
  if (j.contains("trace")) {
    require(j["trace"].is_array(), "\"trace\" must be an array of sample ordinals");
    for (const auto& t : j["trace"]) c.trace.push_back(t.get<std::uint64_t>());
  }

  if (c.mode == "sweep" && c.grid.empty()) c.grid = default_grid();
  if (c.mode == "decode_series")
    require(!c.series.empty() && fs::exists(c.series), "decode_series needs an existing \"series\" file");
  return c;
}

ExperimentConfig load_config(const fs::path& path) {
  std::ifstream in(path);
  require(static_cast<bool>(in), "cannot open config " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw InvalidInput("config " + path.string() + " is not valid JSON: " + e.what());
  }
  return config_from_json(j, path.parent_path().empty() ? fs::path(".") : path.parent_path());
}

json to_json(const ExperimentConfig& c) {
  json j;
  j["mode"] = c.mode;
  switch (c.instance.kind) {
    case InstanceSource::Kind::generator:
      j["instance"] = {{"generate",
                        {{"K", c.instance.size}, {"seed", c.instance.seed}, {"half_width", c.instance.half_width}}}};
      break;
    case InstanceSource::Kind::file:
      j["instance"] = {{"file", c.instance.path.string()}};
      break;
    case InstanceSource::Kind::inline_json:
      j["instance"] = {{"inline", c.instance.document}};
      break;
    case InstanceSource::Kind::none:
      break;
  }
  if (c.reference)
    j["reference"] = std::vector<int>(c.reference->values().begin(), c.reference->values().end());
  j["layout"] = std::string(to_string(c.layout));
  json grid = json::array();
  for (const auto& [b, g] : c.grid) grid.push_back({b, g});
  j["grid"] = std::move(grid);
  j["beta"] = c.beta;
  j["gamma"] = c.gamma;
  j["repetitions"] = c.repetitions;
  j["chain_mode"] = std::string(to_string(c.chain_mode));
  j["steps"] = c.steps;
  j["burn_in"] = c.burn_in;
  j["seed"] = c.seed;
  j["threads"] = c.threads;
  j["decoder"] = {{"policy", std::string(to_string(c.decoder.policy))},
                  {"n_max", c.decoder.n_max},
                  {"ties", std::string(to_string(c.decoder.ties))}};
  j["output"] = {{"dir", c.out_dir.string()}, {"series", c.series.string()}};
  j["trace"] = c.trace;
  return j;
}

ProblemInstance resolve_instance(const InstanceSource& s) {
  switch (s.kind) {
    case InstanceSource::Kind::generator:
      return generate_instance(s.size, s.seed, s.half_width);
    case InstanceSource::Kind::inline_json:
      return instance_from_json(s.document);
    case InstanceSource::Kind::file: {
      std::ifstream in(s.path);
      require(static_cast<bool>(in), "cannot open instance file " + s.path.string());
      json j;
      try {
        in >> j;
      } catch (const json::parse_error& e) {
        throw InvalidInput("instance file " + s.path.string() + " is not valid JSON: " + e.what());
      }
      return instance_from_json(j);
    }
    case InstanceSource::Kind::none:
      break;
  }
  throw InvalidInput("config has no \"instance\"");
}

std::vector<std::pair<double, double>> default_grid() {
  std::vector<std::pair<double, double>> grid;
  for (int a = 0; a < 7; ++a)
    for (int b = 0; b < 7; ++b)
      grid.emplace_back(0.5 * std::pow(2.0, a), 0.01 * std::pow(4.0, b));
  return grid;
}

SpinVector reference_state(const ProblemInstance& inst, const std::optional<SpinVector>& supplied) {
  if (supplied) {
    require(supplied->size() == inst.size(), "reference state length does not match the instance");
    return *supplied;
  }
  require(inst.size() <= kMaxOracleSize,
          "instance too large for the exhaustive oracle; supply \"reference\"");
  return brute_force_ground_state(inst).state;
}

// ---------------------------------------------------------------------------
// Toy-model validation

bool ToyReport::passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.passed; });
}

std::vector<SpinVector> toy_states() {
  return {{-1, -1, -1}, {-1, -1, 1}, {-1, 1, -1}, {1, -1, -1},
          {-1, 1, 1},   {1, -1, 1},  {1, 1, -1},  {1, 1, 1}};
}

double toy_beta() { return std::log(2.0); }

std::vector<double> toy_boltzmann(double k) {
  return normalized({std::pow(k, -3), 1, 1 / k, 1 / k, std::pow(k, -2), 1, std::pow(k, 3), 1});
}

std::vector<double> toy_rejection_free(double k) {
  const double k3 = std::pow(k, 3);
  return normalized({(1 + 2 / k) / 3, 1, (k3 + 2 / k) / 3, (k3 + 1 + 1 / k) / 3, (2 + 1 / k) / 3, 1,
                     k3, (k3 + 2) / 3});
}

double total_variation(const std::vector<double>& p, const std::vector<double>& q) {
  require(p.size() == q.size(), "total_variation: length mismatch");
  double d = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) d += std::abs(p[i] - q[i]);
  return 0.5 * d;
}

std::vector<double> histogram_over(const StationaryHistogram& h, const std::vector<SpinVector>& states) {
  std::vector<double> out;
  out.reserve(states.size());
  for (const auto& s : states)
    out.push_back(h.probability(std::vector<Spin>(s.values().begin(), s.values().end())));
  return out;
}

ToyReport toy_validate(std::uint64_t seed, std::uint64_t steps) {
  require(steps >= 1, "toy_validate: steps must be positive");
  ToyReport report;
  const ProblemInstance inst = toy_instance();
  const auto states = toy_states();
  const std::vector<double> table = {-5, 1, -1, -1, -3, 1, 7, 1};

  std::size_t exact = 0;
  for (std::size_t i = 0; i < states.size(); ++i) exact += logical_energy(states[i], inst) == table[i];
  report.checks.push_back({"energies", exact == states.size(), static_cast<double>(exact),
                           static_cast<double>(states.size()), "exact matches of the 8 tabulated energies"});

  const double k = std::exp(-2.0 * toy_beta());
  const auto pi = toy_boltzmann(k);
  const auto pi_rf = toy_rejection_free(k);
  const IsingModel model(inst, toy_beta());

  const auto run = [&](ChainMode mode, std::uint64_t stream) {
    HistogramAccumulator acc;
    SampleSink* sinks[] = {&acc};
    RunConfig cfg;
    cfg.mode = mode;
    cfg.steps = steps;
    cfg.seed = seed;
    cfg.chain_id = stream;
    run_chain(model, cfg, sinks);
    return acc;
  };
  const auto tv_check = [&](std::string name, const StationaryHistogram& h,
                            const std::vector<double>& ref, double tol, std::string detail) {
    const double tv = total_variation(histogram_over(h, states), ref);
    report.checks.push_back({std::move(name), tv < tol, tv, tol, std::move(detail)});
  };

  const auto standard = run(ChainMode::standard, 0);
  tv_check("standard_vs_boltzmann", standard.unweighted(), pi, 0.02, "TV(standard MC, pi)");

  const auto discarded = run(ChainMode::rejection_discarded, 1);
  tv_check("discarded_vs_rejection_free", discarded.unweighted(), pi_rf, 0.02,
           "TV(rejection-discarded MC, pi~)");
  tv_check("discarded_weighted_vs_boltzmann", discarded.weighted(), pi, 0.03,
           "TV(rejection-discarded MC weighted by dwell, pi)");

  const auto rf = run(ChainMode::rejection_free, 2);
  tv_check("rf_vs_rejection_free", rf.unweighted(), pi_rf, 0.02, "TV(rejection-free MC, pi~)");
  tv_check("rf_recovered_vs_boltzmann", rf.weighted(), pi, 0.03,
           "TV(rejection-free MC weighted by multiplicity, pi)");
  return report;
}

json to_json(const ToyReport& r) {
  json checks = json::array();
  for (const auto& c : r.checks)
    checks.push_back({{"name", c.name},
                      {"passed", c.passed},
                      {"measured", c.measured},
                      {"threshold", c.threshold},
                      {"detail", c.detail}});
  return {{"passed", r.passed()}, {"checks", std::move(checks)}};
}

// ---------------------------------------------------------------------------
// Sweeps

namespace {

class BookkeepingSink final : public SampleSink {
 public:
  BookkeepingSink(const ParityModel& model, const SpinVector& target, const DecoderOptions& decoder)
      : model_(model),
        target_(target),
        target_spins_(model.from_matrix(encode_pe(target, model.layout()))),
        decoder_(decoder) {}

  void consume(const SampleRecord& r) override {
    ++ordinal_;
    if (r.energy_penalty == 0.0) {
      out_.sampled_code = true;
      if (r.energy < map_best_) {
        map_best_ = r.energy;
        const bool target = std::equal(r.spins.begin(), r.spins.end(), target_spins_.begin());
        if (target && !out_.map_hit) out_.map_first_hit = ordinal_;
        out_.map_hit = target;
      }
    }
    const DecodeResult d = decode_pe(model_.to_matrix(r.spins), model_.instance(), decoder_.policy,
                                     decoder_.n_max, decoder_.ties);
    ++out_.decoded;
    out_.decode_iterations += d.iterations_used;
    const double e = logical_energy(d.logical_estimate, model_.instance());
    if (e < mvd_best_) {
      mvd_best_ = e;
      const bool target = same_logical(d.logical_estimate, target_, model_.layout());
      if (target && !out_.mvd_hit) out_.mvd_first_hit = ordinal_;
      out_.mvd_hit = target;
    }
  }

  const RunOutcome& outcome() const noexcept { return out_; }

 private:
  const ParityModel& model_;
  SpinVector target_;
  std::vector<Spin> target_spins_;
  DecoderOptions decoder_;
  RunOutcome out_;
  std::uint64_t ordinal_ = 0;
  double map_best_ = std::numeric_limits<double>::infinity();
  double mvd_best_ = std::numeric_limits<double>::infinity();
};

}  // namespace

RunOutcome run_bookkept_chain(const ProblemInstance& inst, const SpinVector& target,
                              const WeightParameters& w, const SweepOptions& options,
                              std::uint64_t seed) {
  const ParityModel model(inst, w, options.layout);
  BookkeepingSink book(model, target, options.decoder);
  SampleSink* sinks[] = {&book};
  RunConfig cfg;
  cfg.mode = options.chain_mode;
  cfg.steps = options.steps;
  cfg.burn_in = options.burn_in;
  cfg.seed = seed;
  run_chain(model, cfg, sinks);
  return book.outcome();
}

SweepResult run_sweep(const ProblemInstance& inst, const SpinVector& target, const SweepOptions& o) {
  require(!o.grid.empty(), "run_sweep: empty grid");
  require(o.repetitions >= 1, "run_sweep: repetitions must be at least 1");
  require(o.steps >= 1, "run_sweep: steps must be at least 1");
  require(target.size() == inst.size(), "run_sweep: target length mismatch");
  std::vector<WeightParameters> weights;
  for (const auto& [b, g] : o.grid) weights.emplace_back(b, g);

  const std::size_t tasks = o.grid.size() * o.repetitions;
  std::vector<RunOutcome> outcomes(tasks);
  parallel_for(tasks, o.threads, [&](std::size_t t) {
    const std::size_t cell = t / o.repetitions;
    const std::size_t rep = t % o.repetitions;
    outcomes[t] = run_bookkept_chain(inst, target, weights[cell], o, derive_seed(o.seed, cell, rep));
  });

  SweepResult result;
  result.target = target;
  result.target_energy = logical_energy(target, inst);
  double map_sum = 0.0;
  double mvd_sum = 0.0;
  std::size_t both = 0;
  for (std::size_t c = 0; c < o.grid.size(); ++c) {
    SweepCell cell;
    cell.beta = o.grid[c].first;
    cell.gamma = o.grid[c].second;
    cell.reps = o.repetitions;
    for (std::size_t r = 0; r < o.repetitions; ++r) {
      const RunOutcome& run = outcomes[c * o.repetitions + r];
      cell.code_runs += run.sampled_code;
      cell.map_hits += run.map_hit;
      cell.mvd_hits += run.mvd_hit;
      cell.decoded += run.decoded;
      cell.decode_iterations += run.decode_iterations;
      if (run.map_hit) cell.map_first_hit_sum += static_cast<double>(run.map_first_hit);
      if (run.mvd_hit) cell.mvd_first_hit_sum += static_cast<double>(run.mvd_first_hit);
      if (run.map_hit && run.mvd_hit) {
        map_sum += static_cast<double>(run.map_first_hit);
        mvd_sum += static_cast<double>(run.mvd_first_hit);
        ++both;
      }
    }
    result.cells.push_back(cell);
  }
  if (both > 0 && mvd_sum > 0.0) result.first_hit_ratio = map_sum / mvd_sum;
  return result;
}

void write_sweep_csv(std::ostream& out, const SweepResult& r) {
  out << "beta,gamma,reps,p_code,p_target_map,p_target_mvd,mean_iters_mvd\n";
  const auto old = out.precision(17);
  for (const auto& c : r.cells)
    out << c.beta << ',' << c.gamma << ',' << c.reps << ',' << c.p_code() << ',' << c.p_target_map()
        << ',' << c.p_target_mvd() << ',' << c.mean_iters_mvd() << '\n';
  out.precision(old);
}

json sweep_summary(const SweepResult& r, const SweepOptions& o) {
  json cells = json::array();
  for (const auto& c : r.cells)
    cells.push_back({{"beta", c.beta},
                     {"gamma", c.gamma},
                     {"reps", c.reps},
                     {"code_runs", c.code_runs},
                     {"map_hits", c.map_hits},
                     {"mvd_hits", c.mvd_hits},
                     {"mean_map_first_hit", c.map_hits ? c.map_first_hit_sum / c.map_hits : 0.0},
                     {"mean_mvd_first_hit", c.mvd_hits ? c.mvd_first_hit_sum / c.mvd_hits : 0.0}});
  return {{"target", std::vector<int>(r.target.values().begin(), r.target.values().end())},
          {"target_energy", r.target_energy},
          {"repetitions", o.repetitions},
          {"steps", o.steps},
          {"burn_in", o.burn_in},
          {"seed", o.seed},
          {"chain_mode", std::string(to_string(o.chain_mode))},
          {"decoder",
           {{"policy", std::string(to_string(o.decoder.policy))},
            {"n_max", o.decoder.n_max},
            {"ties", std::string(to_string(o.decoder.ties))}}},
          {"map_over_mvd_first_hit_ratio", r.first_hit_ratio ? json(*r.first_hit_ratio) : json(nullptr)},
          {"cells", std::move(cells)}};
}

// ---------------------------------------------------------------------------
// Spectra

std::string_view to_string(SampleClass c) {
  switch (c) {
    case SampleClass::red:
      return "red";
    case SampleClass::gray:
      return "gray";
    case SampleClass::green:
      return "green";
    case SampleClass::other:
      return "other";
  }
  return "other";
}

SampleClass classify(const DecodeResult& d, const SpinVector& target) {
  const Layout layout = d.physical_estimate.layout();
  const bool code = is_code_state(d.physical_estimate);
  if (code && d.physical_estimate == encode_pe(target, layout)) return SampleClass::red;
  if (code) return SampleClass::gray;
  if (same_logical(d.logical_estimate, target, layout)) return SampleClass::green;
  return SampleClass::other;
}

double freedman_diaconis_width(std::vector<double> v) {
  require(!v.empty(), "freedman_diaconis_width: no values");
  std::sort(v.begin(), v.end());
  const double range = v.back() - v.front();
  if (range <= 0.0) return 1.0;
  const auto quantile = [&](double q) {
    const double pos = q * static_cast<double>(v.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, v.size() - 1);
    return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
  };
  const double iqr = quantile(0.75) - quantile(0.25);
  const double n = static_cast<double>(v.size());
  double width = iqr > 0.0 ? 2.0 * iqr / std::cbrt(n) : range / (std::ceil(std::log2(n)) + 1.0);
  constexpr double max_bins = 10000.0;
  if (range / width > max_bins) width = range / max_bins;
  return width;
}

Spectrum bin_spectrum(std::string name, std::string binning, const std::vector<double>& values,
                      const std::vector<SampleClass>& classes, double origin, double width) {
  require(values.size() == classes.size(), "bin_spectrum: values and classes differ in length");
  require(width > 0.0, "bin_spectrum: width must be positive");
  Spectrum s{std::move(name), std::move(binning), origin, width, {}};
  if (values.empty()) return s;
  const double top = *std::max_element(values.begin(), values.end());
  const auto nbins = static_cast<std::size_t>(std::floor((top - origin) / width)) + 1;
  s.bins.resize(nbins);
  for (std::size_t b = 0; b < nbins; ++b) {
    s.bins[b].low = origin + static_cast<double>(b) * width;
    s.bins[b].high = origin + static_cast<double>(b + 1) * width;
  }
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double pos = std::floor((values[i] - origin) / width);
    const auto b = static_cast<std::size_t>(std::clamp(pos, 0.0, static_cast<double>(nbins - 1)));
    SpectrumBin& bin = s.bins[b];
    ++bin.count;
    switch (classes[i]) {
      case SampleClass::red:
        ++bin.n_red;
        break;
      case SampleClass::gray:
        ++bin.n_gray;
        break;
      case SampleClass::green:
        ++bin.n_green;
        break;
      case SampleClass::other:
        ++bin.n_other;
        break;
    }
  }
  return s;
}

std::uint64_t default_spectra_steps(std::size_t k) {
  const std::uint64_t full = 600ULL * k * (k - 1);
  return full > 50 ? full - 50 : 1;
}

namespace {

class SpectraSink final : public SampleSink {
 public:
  SpectraSink(const ParityModel& model, const SpinVector& target, const DecoderOptions& decoder)
      : model_(model), target_(target), target_z_(encode_pe(target, model.layout())), decoder_(decoder) {
    agree_.assign(model.dim() * model.dim(), 0.0);
  }

  void consume(const SampleRecord& r) override {
    const PhysicalSpinMatrix z = model_.to_matrix(r.spins);
    const ProblemInstance& inst = model_.instance();
    const DecodeResult d = decode_pe(z, inst, decoder_.policy, decoder_.n_max, decoder_.ties);
    phys.push_back(physical_energy(z, inst, model_.weights()));
    local.push_back(local_energy(z, inst));
    pen.push_back(r.energy_penalty);
    logi.push_back(logical_energy(d.logical_estimate, inst));
    classes.push_back(classify(d, target_));
    code += r.energy_penalty == 0.0;
    const std::size_t dim = model_.dim();
    for (std::size_t a = 0; a < dim; ++a)
      for (std::size_t b = 0; b < dim; ++b) agree_[a * dim + b] += z.at(a, b) == target_z_.at(a, b);
  }

  std::vector<double> marginal() const {
    std::vector<double> m = agree_;
    const double n = static_cast<double>(phys.size());
    for (double& x : m) x = n > 0 ? x / n : 0.0;
    return m;
  }

  std::vector<double> phys, local, pen, logi;
  std::vector<SampleClass> classes;
  std::size_t code = 0;

 private:
  const ParityModel& model_;
  SpinVector target_;
  PhysicalSpinMatrix target_z_;
  DecoderOptions decoder_;
  std::vector<double> agree_;
};

}  // namespace

SpectraResult run_spectra(const ProblemInstance& inst, const SpinVector& target,
                          const SpectraOptions& o, std::ostream* series_out) {
  require(target.size() == inst.size(), "run_spectra: reference ground state has the wrong length");
  const WeightParameters w(o.beta, o.gamma);
  const ParityModel model(inst, w, Layout::original);
  SpectraSink spectra(model, target, o.decoder);
  std::vector<SampleSink*> sinks = {&spectra};

  std::optional<CsvSeriesSink> csv;
  if (series_out) {
    json meta = {{"format", "lhzqec-series/1"},
                 {"K", inst.size()},
                 {"layout", std::string(to_string(Layout::original))},
                 {"sites", model.site_count()},
                 {"beta", o.beta},
                 {"gamma", o.gamma},
                 {"seed", o.seed},
                 {"chain_mode", std::string(to_string(o.chain_mode))},
                 {"instance", inst}};
    csv.emplace(*series_out, true, meta.dump());
    sinks.push_back(&*csv);
  }

  RunConfig cfg;
  cfg.mode = o.chain_mode;
  cfg.steps = o.steps ? o.steps : default_spectra_steps(inst.size());
  cfg.burn_in = o.burn_in;
  cfg.seed = o.seed;
  run_chain(model, cfg, sinks);

  SpectraResult r;
  r.samples = spectra.phys.size();
  r.code_samples = spectra.code;
  r.dim = model.dim();
  r.marginal = spectra.marginal();
  r.target = target;
  r.target_energy = logical_energy(target, inst);
  for (SampleClass c : spectra.classes) {
    r.n_red += c == SampleClass::red;
    r.n_gray += c == SampleClass::gray;
    r.n_green += c == SampleClass::green;
    r.n_other += c == SampleClass::other;
  }

  const auto lowest = [](const std::vector<double>& v) { return *std::min_element(v.begin(), v.end()); };
  const double wp = freedman_diaconis_width(spectra.phys);
  r.physical = bin_spectrum("H_phys", "freedman_diaconis", spectra.phys, spectra.classes,
                            lowest(spectra.phys) - 0.5 * wp, wp);
  r.penalty = bin_spectrum("H_pen", "unit", spectra.pen, spectra.classes, -0.5, 1.0);

  // H^loc(r) and H^logi(Z*) share bin edges so their class tallies compare
  // bin by bin.
  std::vector<double> both = spectra.local;
  both.insert(both.end(), spectra.logi.begin(), spectra.logi.end());
  const double wl = freedman_diaconis_width(both);
  const double origin = lowest(both) - 0.5 * wl;
  r.local = bin_spectrum("H_loc", "freedman_diaconis", spectra.local, spectra.classes, origin, wl);
  r.logical = bin_spectrum("H_logi", "freedman_diaconis", spectra.logi, spectra.classes, origin, wl);
  return r;
}

void write_spectrum_csv(std::ostream& out, const Spectrum& s) {
  out << "bin_low,bin_high,count,n_red,n_gray,n_green,n_other\n";
  const auto old = out.precision(17);
  for (const auto& b : s.bins)
    out << b.low << ',' << b.high << ',' << b.count << ',' << b.n_red << ',' << b.n_gray << ','
        << b.n_green << ',' << b.n_other << '\n';
  out.precision(old);
}

void write_marginal_csv(std::ostream& out, const SpectraResult& r) {
  const auto old = out.precision(17);
  for (std::size_t a = 0; a < r.dim; ++a) {
    for (std::size_t b = 0; b < r.dim; ++b) out << (b ? "," : "") << r.marginal[a * r.dim + b];
    out << '\n';
  }
  out.precision(old);
}

bool gray_bins_unchanged(const SpectraResult& r) {
  const std::size_t n = std::max(r.local.bins.size(), r.logical.bins.size());
  for (std::size_t b = 0; b < n; ++b) {
    const std::size_t before = b < r.local.bins.size() ? r.local.bins[b].n_gray : 0;
    const std::size_t after = b < r.logical.bins.size() ? r.logical.bins[b].n_gray : 0;
    if (before != after) return false;
  }
  return true;
}

json spectra_summary(const SpectraResult& r, const SpectraOptions& o) {
  const auto binning = [](const Spectrum& s) {
    return json{{"name", s.name}, {"binning", s.binning}, {"origin", s.origin}, {"width", s.width},
                {"bins", s.bins.size()}};
  };
  return {{"beta", o.beta},
          {"gamma", o.gamma},
          {"seed", o.seed},
          {"burn_in", o.burn_in},
          {"samples", r.samples},
          {"code_samples", r.code_samples},
          {"classes", {{"red", r.n_red}, {"gray", r.n_gray}, {"green", r.n_green}, {"other", r.n_other}}},
          {"target", std::vector<int>(r.target.values().begin(), r.target.values().end())},
          {"target_energy", r.target_energy},
          {"gray_bins_unchanged", gray_bins_unchanged(r)},
          {"decoder",
           {{"policy", std::string(to_string(o.decoder.policy))},
            {"n_max", o.decoder.n_max},
            {"ties", std::string(to_string(o.decoder.ties))}}},
          {"spectra", {binning(r.physical), binning(r.local), binning(r.penalty), binning(r.logical)}}};
}

// ---------------------------------------------------------------------------
// Stored series

namespace {

std::vector<std::string_view> split_csv(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const std::size_t comma = line.find(',', start);
    out.push_back(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

std::uint64_t parse_u64(std::string_view s, int base, std::size_t line, const char* what) {
  const std::string text(s);
  std::size_t used = 0;
  try {
    if (!text.empty() && text[0] != '-') {
      const std::uint64_t v = std::stoull(text, &used, base);
      if (used == text.size()) return v;
    }
  } catch (const std::exception&) {
  }
  throw CorruptInput(std::string("bad ") + what + " field", line);
}

double parse_double(std::string_view s, std::size_t line, const char* what) {
  const std::string text(s);
  std::size_t used = 0;
  try {
    const double v = std::stod(text, &used);
    if (used == text.size() && std::isfinite(v)) return v;
  } catch (const std::exception&) {
  }
  throw CorruptInput(std::string("bad ") + what + " field", line);
}

}  // namespace

StoredSeries read_series(std::istream& in) {
  std::string line;
  std::size_t lineno = 1;
  if (!std::getline(in, line) || line.rfind("# ", 0) != 0)
    throw CorruptInput("missing metadata line", lineno);
  json meta;
  try {
    meta = json::parse(line.substr(2));
  } catch (const json::parse_error&) {
    throw CorruptInput("metadata is not valid JSON", lineno);
  }
  std::optional<ProblemInstance> inst;
  Layout layout = Layout::original;
  try {
    require(meta.value("format", "") == "lhzqec-series/1", "unknown series format");
    inst = instance_from_json(meta.at("instance"));
    layout = layout_from_string(meta.value("layout", "original"));
  } catch (const std::exception& e) {
    throw CorruptInput(std::string("metadata: ") + e.what(), lineno);
  }

  ++lineno;
  if (!std::getline(in, line) ||
      line != "sweep_index,energy_phys,energy_local,energy_pen,multiplicity,state_hash,state")
    throw CorruptInput("unexpected column header", lineno);

  StoredSeries series{meta, *inst, layout, {}};
  const std::size_t dim = layout == Layout::extended ? inst->size() + 1 : inst->size();
  const auto sites = site_pairs(dim);
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto f = split_csv(line);
    if (f.size() != 7) throw CorruptInput("expected 7 fields", lineno);
    StoredSample s{lineno, parse_u64(f[0], 10, lineno, "sweep_index"),
                   parse_double(f[1], lineno, "energy_phys"), parse_u64(f[4], 10, lineno, "multiplicity"),
                   PhysicalSpinMatrix(inst->size(), layout)};
    parse_double(f[2], lineno, "energy_local");
    parse_double(f[3], lineno, "energy_pen");
    const std::uint64_t hash = parse_u64(f[5], 16, lineno, "state_hash");
    std::vector<Spin> spins;
    try {
      spins = unpack_state(f[6], sites.size());
    } catch (const InvalidInput& e) {
      throw CorruptInput(e.what(), lineno);
    }
    if (state_hash(spins) != hash) throw CorruptInput("state hash does not match the packed state", lineno);
    for (std::size_t k = 0; k < sites.size(); ++k) s.readout.set(sites[k].first, sites[k].second, spins[k]);
    series.samples.push_back(std::move(s));
  }
  return series;
}

void decode_series(const StoredSeries& series, const DecodeSeriesOptions& o, std::ostream& out,
                   std::ostream* trace_out) {
  const ProblemInstance& inst = series.instance;
  std::optional<SpinVector> target = o.reference;
  if (!target && inst.size() <= kMaxOracleSize) target = brute_force_ground_state(inst).state;
  std::optional<PhysicalSpinMatrix> target_z;
  if (target) target_z = encode_pe(*target, series.layout);

  json traces = json::array();
  for (std::size_t n = 0; n < series.samples.size(); ++n) {
    const StoredSample& s = series.samples[n];
    const DecodeResult d = decode_pe(s.readout, inst, o.decoder.policy, o.decoder.n_max, o.decoder.ties);
    json row;
    to_json(row, d);
    row["ordinal"] = n;
    row["line"] = s.line;
    row["sweep_index"] = s.sweep_index;
    row["H_logi"] = logical_energy(d.logical_estimate, inst);
    if (target) row["class"] = std::string(to_string(classify(d, *target)));
    out << row.dump() << '\n';

    if (trace_out && std::find(o.trace.begin(), o.trace.end(), n) != o.trace.end()) {
      std::vector<PhysicalSpinMatrix> iterates;
      pe_mvd_iterated(s.readout, o.decoder.n_max, o.decoder.ties, &iterates);
      json steps = json::array();
      const auto describe = [&](std::size_t it, const PhysicalSpinMatrix& z) {
        json step;
        to_json(step["z"], z);
        step["n"] = it;
        step["violated_plaquettes"] = penalty_energy(z);
        if (target_z) {
          const PhysicalSpinMatrix e = error_pattern(z, *target_z);
          to_json(step["errors"], e);
          step["error_count"] = error_count(e);
        }
        return step;
      };
      steps.push_back(describe(0, s.readout));
      for (std::size_t it = 0; it < iterates.size(); ++it) steps.push_back(describe(it + 1, iterates[it]));
      traces.push_back({{"ordinal", n}, {"line", s.line}, {"sweep_index", s.sweep_index},
                        {"iterates", std::move(steps)}});
    }
  }
  if (trace_out) *trace_out << json{{"traces", std::move(traces)}}.dump(1) << '\n';
}

}  // namespace lhzqec
