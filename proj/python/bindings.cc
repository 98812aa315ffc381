#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "cosetlab/collapsing.h"
#include "cosetlab/harness.h"
#include "cosetlab/obfuscate.h"
#include "cosetlab/pvqfhe.h"

namespace py = pybind11;
using namespace cosetlab;
using harness::json;

namespace {

homenc::Bits parse_bits(const std::string& s) {
  homenc::Bits x;
  for (char c : s) {
    if (c != '0' && c != '1') throw std::invalid_argument("input must be a bit string");
    x.push_back(c == '1');
  }
  return x;
}

std::string run_experiment(const std::string& id, const std::string& seed, uint64_t trials,
                           const std::string& params, int threads, const std::string& tolerances,
                           const std::string& out) {
  harness::ExperimentConfig cfg;
  cfg.id = id;
  cfg.seed = oracle::seed_from_hex(seed);
  cfg.trials = trials;
  cfg.params = json::parse(params);
  cfg.threads = threads;
  cfg.out = out;
  harness::Report rep;
  {
    py::gil_scoped_release release;
    rep = harness::run(cfg, harness::Tolerances::load(tolerances));
  }
  return rep.to_json().dump();
}

std::string collapsing_distance(int n, int k, const std::string& mode, uint64_t samples, uint64_t seed) {
  const auto r = collapsing::plus_state_distance({n, k, collapsing::parse_mode(mode), samples, seed});
  return json{{"n", r.n},         {"k", r.k},         {"mode", collapsing::mode_name(r.mode)},
              {"alpha", r.alpha}, {"beta", r.beta},   {"distance", r.distance},
              {"closed_form", r.closed_form}, {"abs_err", r.abs_err}, {"std_err", r.std_err}}
      .dump();
}

std::string pvqfhe_run(const std::string& circuit_json, const std::string& input, const std::string& seed_hex) {
  const auto c = pvqfhe::Circuit::from_json(circuit_json);
  const auto x = parse_bits(input);
  const auto seed = oracle::seed_from_hex(seed_hex);
  Rng rng = oracle::rng_from_seed(oracle::derive_seed(seed, "demo"));
  const auto s = pvqfhe::gen(pvqfhe::Params{}, seed);
  const auto q = pvqfhe::circuit_program(c);
  const auto ct = pvqfhe::enc(s.pk, x, rng);
  const auto r = pvqfhe::eval(*s.pp, ct, q, rng);
  const bool ok = r.ct_tilde && pvqfhe::verify(*s.pp, ct, q.description, *r.ct_tilde, r.pi);
  const auto y = ok ? pvqfhe::dec(*s.pp, s.sk, *r.ct_tilde) : std::nullopt;
  return json{{"verify", ok}, {"output", y ? json(*y) : json(nullptr)}, {"expected", c.evaluate(x)},
              {"proof_bytes", r.pi.serialize().size()}}
      .dump();
}

std::string obf_run(const std::string& circuit_json, const std::string& input, const std::string& tamper,
                    const std::string& seed_hex) {
  const auto c = pvqfhe::Circuit::from_json(circuit_json);
  const auto x = parse_bits(input);
  const auto seed = oracle::seed_from_hex(seed_hex);
  Rng rng = oracle::rng_from_seed(oracle::derive_seed(seed, "demo"));
  const auto o = obf::qobf_obfuscate(c, seed);
  const auto r = obf::qobf_eval(o, x, rng, obf::parse_tamper(tamper));
  return json{{"stage", r.stage}, {"output", r.bit ? json(*r.bit) : json(nullptr)}, {"expected", c.evaluate(x)},
              {"obfuscation_bytes", o.size_bytes()}, {"proof_bytes", r.proof_bytes}}
      .dump();
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "cosetlab native core";
  m.def("experiment_ids", &harness::experiment_ids);
  m.def("run_experiment", &run_experiment, py::arg("id"), py::arg("seed"), py::arg("trials"),
        py::arg("params"), py::arg("threads"), py::arg("tolerances"), py::arg("out"));
  m.def("wilson", [](uint64_t k, uint64_t n, double z) {
    const auto s = harness::wilson(k, n, z);
    return py::make_tuple(s.ci_low, s.ci_high);
  });
  m.def("collapsing_distance", &collapsing_distance, py::arg("n"), py::arg("k"), py::arg("mode") = "exact",
        py::arg("samples") = 10000, py::arg("seed") = 0);
  m.def("pvqfhe_run", &pvqfhe_run);
  m.def("obf_run", &obf_run);
  m.def("circuit_corpus", [] {
    std::vector<std::pair<std::string, std::string>> out;
    for (const auto& [name, c] : pvqfhe::circuit_corpus()) out.emplace_back(name, c.to_json());
    return out;
  });
  m.attr("default_tolerances") = harness::default_tolerance_path();
}
