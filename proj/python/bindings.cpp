#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include <nlohmann/json.hpp>

#include "lhzqec/decoder.hpp"
#include "lhzqec/error.hpp"
#include "lhzqec/harness.hpp"
#include "lhzqec/mcmc.hpp"
#include "lhzqec/parity.hpp"
#include "lhzqec/qac.hpp"

namespace py = pybind11;
using namespace pybind11::literals;
using namespace lhzqec;

namespace {

using SpinArray = py::array_t<std::int8_t, py::array::c_style | py::array::forcecast>;

py::object to_python(const nlohmann::json& j) {
  return py::module_::import("json").attr("loads")(j.dump());
}

nlohmann::json from_python(const py::handle& obj) {
  return nlohmann::json::parse(py::module_::import("json").attr("dumps")(obj).cast<std::string>());
}

SpinVector spins_from(const std::vector<int>& v) { return SpinVector(std::vector<Spin>(v.begin(), v.end())); }

std::vector<int> spins_to(const SpinVector& v) { return {v.values().begin(), v.values().end()}; }

PhysicalSpinMatrix matrix_from(const SpinArray& a, const std::string& layout) {
  require(a.ndim() == 2 && a.shape(0) == a.shape(1), "readout must be a square matrix");
  const auto dim = static_cast<std::size_t>(a.shape(0));
  std::vector<Spin> entries(a.data(), a.data() + dim * dim);
  return PhysicalSpinMatrix::from_dense(std::move(entries), dim, layout_from_string(layout));
}

SpinArray matrix_to(const PhysicalSpinMatrix& z) {
  SpinArray out({z.dim(), z.dim()});
  std::copy(z.entries().begin(), z.entries().end(), out.mutable_data());
  return out;
}

ReplicaMatrix replicas_from(const SpinArray& a) {
  require(a.ndim() == 2, "replica readout must be an N x K matrix");
  std::vector<std::vector<int>> rows(static_cast<std::size_t>(a.shape(0)));
  for (py::ssize_t i = 0; i < a.shape(0); ++i)
    for (py::ssize_t k = 0; k < a.shape(1); ++k) rows[i].push_back(a.at(i, k));
  return ReplicaMatrix::from_rows(rows);
}

py::dict decode_dict(const DecodeResult& d) {
  return py::dict("z_star"_a = matrix_to(d.physical_estimate), "Z_star"_a = spins_to(d.logical_estimate),
                  "iters"_a = d.iterations_used, "ties"_a = d.ties_encountered, "converged"_a = d.converged,
                  "policy"_a = std::string(to_string(d.policy)));
}

py::dict sample_chain(const ProblemInstance& inst, double beta, double gamma, std::uint64_t steps,
                      const std::string& mode, std::uint64_t seed, std::uint64_t burn_in,
                      const std::string& layout) {
  const ParityModel model(inst, WeightParameters(beta, gamma), layout_from_string(layout));
  SeriesRecorder rec;
  SampleSink* sinks[] = {&rec};
  RunConfig cfg;
  cfg.mode = chain_mode_from_string(mode);
  cfg.steps = steps;
  cfg.burn_in = burn_in;
  cfg.seed = seed;
  {
    py::gil_scoped_release release;
    run_chain(model, cfg, sinks);
  }
  const auto& r = rec.records();
  const std::size_t dim = model.dim();
  py::array_t<double> energy(r.size()), local(r.size()), penalty(r.size());
  py::array_t<std::uint64_t> multiplicity(r.size());
  SpinArray states({r.size(), dim, dim});
  std::int8_t* out = states.mutable_data();
  for (std::size_t t = 0; t < r.size(); ++t) {
    energy.mutable_at(t) = r[t].energy;
    local.mutable_at(t) = r[t].energy_local;
    penalty.mutable_at(t) = r[t].energy_penalty;
    multiplicity.mutable_at(t) = r[t].multiplicity;
    const PhysicalSpinMatrix z = model.to_matrix(r[t].spins);
    out = std::copy(z.entries().begin(), z.entries().end(), out);
  }
  return py::dict("energy"_a = energy, "energy_local"_a = local, "energy_pen"_a = penalty,
                  "multiplicity"_a = multiplicity, "states"_a = states);
}

}  // namespace

PYBIND11_MODULE(_lhzqec, m) {
  m.doc() = "Parity-encoded spin-glass sampling and majority-vote decoding";

  py::register_exception<InvalidInput>(m, "InvalidInput", PyExc_ValueError);
  py::register_exception<CorruptInput>(m, "CorruptInput", PyExc_ValueError);

  py::class_<ProblemInstance>(m, "Instance")
      .def_property_readonly("size", &ProblemInstance::size)
      .def_property_readonly("couplings",
                             [](const ProblemInstance& p) {
                               py::array_t<double> a({p.size(), p.size()});
                               std::copy(p.couplings().begin(), p.couplings().end(), a.mutable_data());
                               return a;
                             })
      .def_property_readonly("fields",
                             [](const ProblemInstance& p) {
                               return std::vector<double>(p.fields().begin(), p.fields().end());
                             })
      .def("to_dict",
           [](const ProblemInstance& p) {
             nlohmann::json j;
             to_json(j, p);
             return to_python(j);
           })
      .def_static("from_dict", [](const py::dict& d) { return instance_from_json(from_python(d)); })
      .def("__eq__", [](const ProblemInstance& a, const ProblemInstance& b) { return a == b; })
      .def("__repr__", [](const ProblemInstance& p) { return "<Instance K=" + std::to_string(p.size()) + ">"; });

  m.def("generate_instance", &generate_instance, "K"_a, "seed"_a, "half_width"_a = 0.25,
        "Couplings drawn uniformly from [-w, w], no local fields.");
  m.def("toy_instance", &toy_instance);
  m.def("gauge_transform", [](const ProblemInstance& p, const std::vector<int>& ref) {
    return gauge_transform(p, spins_from(ref));
  });
  m.def(
      "logical_energy", [](const std::vector<int>& z, const ProblemInstance& p) { return logical_energy(spins_from(z), p); },
      "state"_a, "instance"_a);
  m.def("ground_state", [](const ProblemInstance& p) {
    const auto c = brute_force_ground_state(p);
    return py::dict("state"_a = spins_to(c.state), "energy"_a = c.energy, "degeneracy"_a = c.degeneracy);
  });
  m.def("canonical_logical", [](const std::vector<int>& z) { return spins_to(canonical_logical(spins_from(z))); });

  m.def(
      "encode_pe",
      [](const std::vector<int>& z, const std::string& layout) {
        return matrix_to(encode_pe(spins_from(z), layout_from_string(layout)));
      },
      "state"_a, "layout"_a = "original");
  m.def(
      "is_code_state", [](const SpinArray& r, const std::string& layout) { return is_code_state(matrix_from(r, layout)); },
      "readout"_a, "layout"_a = "original");
  m.def(
      "penalty_energy", [](const SpinArray& r, const std::string& layout) { return penalty_energy(matrix_from(r, layout)); },
      "readout"_a, "layout"_a = "original");
  m.def(
      "local_energy",
      [](const SpinArray& r, const ProblemInstance& p, const std::string& layout) {
        return local_energy(matrix_from(r, layout), p);
      },
      "readout"_a, "instance"_a, "layout"_a = "original");
  m.def(
      "physical_energy",
      [](const SpinArray& r, const ProblemInstance& p, double beta, double gamma, const std::string& layout) {
        return physical_energy(matrix_from(r, layout), p, WeightParameters(beta, gamma));
      },
      "readout"_a, "instance"_a, "beta"_a, "gamma"_a, "layout"_a = "original");

  m.def(
      "repetition_mvd",
      [](const std::vector<int>& r) {
        const auto v = repetition_mvd(r);
        return v.is_tie() ? 0 : v.resolve();
      },
      "Majority of the readings; 0 on an exact tie.");
  m.def("qac_mvd", [](const SpinArray& r) {
    const QacDecode d = qac_mvd(replicas_from(r));
    return py::make_tuple(spins_to(d.state), d.ties);
  });
  m.def(
      "pe_mvd_weight2",
      [](const SpinArray& r, const std::string& ties) {
        return matrix_to(pe_mvd_weight2(matrix_from(r, "original"), tie_policy_from_string(ties)).estimate);
      },
      "readout"_a, "ties"_a = "resolve_plus");
  m.def(
      "pe_mvd_iterated",
      [](const SpinArray& r, std::size_t n_max, const std::string& ties) {
        const IterateResult it = pe_mvd_iterated(matrix_from(r, "original"), n_max, tie_policy_from_string(ties));
        return py::dict("z_star"_a = matrix_to(it.estimate), "iters"_a = it.iterations, "ties"_a = it.ties,
                        "converged"_a = it.converged);
      },
      "readout"_a, "n_max"_a = 10, "ties"_a = "resolve_plus");
  m.def(
      "decode_pe",
      [](const SpinArray& r, const ProblemInstance& p, const std::string& policy, std::size_t n_max,
         const std::string& ties) {
        return decode_dict(decode_pe(matrix_from(r, "original"), p, extraction_policy_from_string(policy), n_max,
                                     tie_policy_from_string(ties)));
      },
      "readout"_a, "instance"_a, "policy"_a = "energy_best_row", "n_max"_a = 10, "ties"_a = "resolve_plus");

  m.def("sample", &sample_chain, "instance"_a, "beta"_a, "gamma"_a, "steps"_a, "mode"_a = "rejection_free",
        "seed"_a = 1, "burn_in"_a = 50, "layout"_a = "original",
        "Runs one chain on the parity-encoded model and returns energies, multiplicities and readouts.");

  m.def(
      "toy_validate",
      [](std::uint64_t seed, std::uint64_t steps) {
        ToyReport r;
        {
          py::gil_scoped_release release;
          r = toy_validate(seed, steps);
        }
        return to_python(to_json(r));
      },
      "seed"_a = 1, "steps"_a = 1'000'000);

  m.def(
      "run_sweep",
      [](const py::dict& config) {
        ExperimentConfig c = config_from_json(from_python(config));
        if (c.grid.empty()) c.grid = default_grid();
        const ProblemInstance inst = resolve_instance(c.instance);
        SweepOptions o;
        o.grid = c.grid;
        o.repetitions = c.repetitions;
        o.chain_mode = c.chain_mode;
        if (c.steps) o.steps = c.steps;
        o.burn_in = c.burn_in;
        o.seed = c.seed;
        o.decoder = c.decoder;
        o.layout = c.layout;
        o.threads = c.threads;
        SweepResult r;
        {
          py::gil_scoped_release release;
          r = run_sweep(inst, reference_state(inst, c.reference), o);
        }
        return to_python(sweep_summary(r, o));
      },
      "config"_a, "Sweep driven by a config dictionary; returns the summary document.");

  m.def(
      "run_spectra",
      [](const py::dict& config) {
        const ExperimentConfig c = config_from_json(from_python(config));
        const ProblemInstance inst = resolve_instance(c.instance);
        SpectraOptions o;
        o.beta = c.beta;
        o.gamma = c.gamma;
        o.chain_mode = c.chain_mode;
        o.steps = c.steps;
        o.burn_in = c.burn_in;
        o.seed = c.seed;
        o.decoder = c.decoder;
        std::ostringstream series;
        SpectraResult r;
        {
          py::gil_scoped_release release;
          r = run_spectra(inst, reference_state(inst, c.reference), o, &series);
        }
        py::dict out = to_python(spectra_summary(r, o));
        out["series_csv"] = series.str();
        return out;
      },
      "config"_a, "Spectra run; the summary document plus the stored series as CSV text.");

  m.def("decode_series", [](const std::string& csv, std::size_t n_max, const std::string& policy) {
    std::istringstream in(csv);
    const StoredSeries s = read_series(in);
    DecodeSeriesOptions o;
    o.decoder.n_max = n_max;
    o.decoder.policy = extraction_policy_from_string(policy);
    std::ostringstream out;
    decode_series(s, o, out);
    py::list rows;
    std::istringstream lines(out.str());
    for (std::string line; std::getline(lines, line);) rows.append(to_python(nlohmann::json::parse(line)));
    return rows;
  }, "series_csv"_a, "n_max"_a = 1, "policy"_a = "energy_best_row");

#ifdef LHZQEC_VERSION
  m.attr("__version__") = LHZQEC_VERSION;
#else
  m.attr("__version__") = "dev";
#endif
}
