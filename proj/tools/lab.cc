#include <cstring>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"

#include "cosetlab/collapsing.h"
#include "cosetlab/harness.h"
#include "cosetlab/obfuscate.h"
#include "cosetlab/pvqfhe.h"

using namespace cosetlab;
using harness::json;

namespace {

constexpr int kExitFail = 1;
constexpr int kExitError = 2;

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

homenc::Bits parse_bits(const std::string& s) {
  homenc::Bits x;
  for (char c : s) {
    if (c != '0' && c != '1') throw std::invalid_argument("input must be a bit string: " + s);
    x.push_back(c == '1');
  }
  return x;
}

std::string bits_str(const homenc::Bits& x) {
  std::string s;
  for (auto b : x) s += b ? '1' : '0';
  return s;
}

// "key=value" pairs become params; numbers stay numbers.
json parse_params(const std::vector<std::string>& kv) {
  json p = json::object();
  for (const auto& s : kv) {
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw std::invalid_argument("--param expects key=value, got " + s);
    const std::string k = s.substr(0, eq), v = s.substr(eq + 1);
    char* end = nullptr;
    const long n = std::strtol(v.c_str(), &end, 10);
    if (!v.empty() && *end == '\0') p[k] = n;
    else p[k] = v;
  }
  return p;
}

struct RunOpts {
  std::string seed = "0";
  uint64_t trials = 0;
  std::string out;
  std::vector<std::string> params;
  int threads = 0;
  std::string tolerances = harness::default_tolerance_path();
  bool quiet = false;
};

int run_experiment(const std::string& id, const RunOpts& o) {
  harness::ExperimentConfig cfg;
  cfg.id = id;
  cfg.seed = oracle::seed_from_hex(o.seed);
  cfg.trials = o.trials;
  cfg.params = parse_params(o.params);
  cfg.out = o.out;
  cfg.threads = o.threads;
  const auto rep = harness::run(cfg, harness::Tolerances::load(o.tolerances));
  json summary{{"experiment", id}, {"pass", rep.pass}, {"aggregate", rep.aggregate},
               {"elapsed_s", rep.elapsed_s}};
  if (!o.out.empty()) summary["report"] = o.out;
  if (!o.quiet) std::cout << summary.dump(2) << "\n";
  return rep.pass ? 0 : kExitFail;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"cosetlab experiment runner"};
  app.require_subcommand(1);

  RunOpts ro;
  std::string run_id;
  for (const auto& e : harness::registry()) {
    auto* sc = app.add_subcommand(e.id, e.summary);
    sc->add_option("--seed", ro.seed, "hex seed, left-padded to 256 bits");
    sc->add_option("--trials", ro.trials, "trial count (0 = experiment default)");
    sc->add_option("--out", ro.out, "JSON report path");
    sc->add_option("--param", ro.params, "experiment parameter key=value");
    sc->add_option("--threads", ro.threads, "worker threads (0 = all cores)");
    sc->add_option("--tolerances", ro.tolerances, "tolerance manifest");
    sc->add_flag("--quiet", ro.quiet, "suppress the summary");
    sc->callback([&run_id, id = e.id] { run_id = id; });
  }

  auto* list = app.add_subcommand("list", "list experiment ids");

  int cn = 1, ck = 0;
  std::string cmode = "exact";
  uint64_t csamples = 10000;
  std::string cseed = "0";
  auto* coll = app.add_subcommand("collapsing", "Phi1/Phi2 distance on |+>^n");
  coll->add_option("--n", cn)->required();
  coll->add_option("--k", ck)->required();
  coll->add_option("--mode", cmode, "exact, counting or montecarlo");
  coll->add_option("--samples", csamples);
  coll->add_option("--seed", cseed);

  std::string circuit_path, input, tamper = "none", dseed = "0";
  auto add_demo = [&](CLI::App* parent, const std::string& what) {
    auto* d = parent->add_subcommand("demo", what);
    d->add_option("--circuit", circuit_path, "circuit JSON file")->required()->check(CLI::ExistingFile);
    d->add_option("--input", input, "input bits, e.g. 01")->required();
    d->add_option("--seed", dseed);
    return d;
  };
  auto* pv = app.add_subcommand("pvqfhe", "publicly verifiable QFHE");
  pv->require_subcommand(1);
  auto* pv_demo = add_demo(pv, "encrypt, evaluate with proof, verify, decrypt");
  auto* ob = app.add_subcommand("obf", "obfuscation of pseudo-deterministic circuits");
  ob->require_subcommand(1);
  auto* ob_demo = add_demo(ob, "obfuscate then evaluate, optionally tampering one stage");
  ob_demo->add_option("--tamper", tamper, "none, ciphertext, proof, opening or signature");

  if (argc > 1 && argv[1][0] != '-') {
    const std::string first = argv[1];
    bool known = false;
    for (const auto* sc : app.get_subcommands({})) known = known || sc->get_name() == first;
    if (!known) {
      std::cerr << "unknown experiment: " << first << " (try `lab list`)\n";
      return kExitError;
    }
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : kExitError;
  }

  try {
    if (!run_id.empty()) return run_experiment(run_id, ro);

    if (list->parsed()) {
      for (const auto& e : harness::registry())
        std::cout << e.id << "\t" << e.default_trials << "\t" << e.summary << "\n";
      return 0;
    }

    if (coll->parsed()) {
      const collapsing::ChannelSpec spec{cn, ck, collapsing::parse_mode(cmode), csamples,
                                         oracle::rng_from_seed(oracle::seed_from_hex(cseed))()};
      const auto r = collapsing::plus_state_distance(spec);
      json j{{"n", r.n},           {"k", r.k},
             {"mode", collapsing::mode_name(r.mode)},
             {"alpha", r.alpha},   {"beta", r.beta},
             {"distance", r.distance}, {"closed_form", r.closed_form},
             {"abs_err", r.abs_err}};
      if (r.mode == collapsing::Mode::kMonteCarlo) {
        j["std_err"] = r.std_err;
        j["samples"] = r.samples;
      }
      std::cout << j.dump(2) << "\n";
      return 0;
    }

    const auto c = pvqfhe::Circuit::from_json(read_file(circuit_path));
    const auto x = parse_bits(input);
    const auto seed = oracle::seed_from_hex(dseed);
    Rng rng = oracle::rng_from_seed(oracle::derive_seed(seed, "demo"));
    const int want = c.evaluate(x);

    if (pv_demo->parsed()) {
      const auto s = pvqfhe::gen(pvqfhe::Params{}, seed);
      const auto q = pvqfhe::circuit_program(c);
      const auto ct = pvqfhe::enc(s.pk, x, rng);
      const auto r = pvqfhe::eval(*s.pp, ct, q, rng);
      const bool ok = r.ct_tilde && pvqfhe::verify(*s.pp, ct, q.description, *r.ct_tilde, r.pi);
      const auto y = ok ? pvqfhe::dec(*s.pp, s.sk, *r.ct_tilde) : std::nullopt;
      json j{{"input", bits_str(x)},
             {"verify", ok},
             {"output", y ? json(*y) : json(nullptr)},
             {"expected", want},
             {"proof_bytes", r.pi.serialize().size()},
             {"proof_bound", pvqfhe::proof_size_bound(pvqfhe::Params{}, s.pp->ell())},
             {"sign_restarts", r.sign_restarts},
             {"grind_attempts", r.grind_attempts}};
      std::cout << j.dump(2) << "\n";
      return ok && y == want ? 0 : kExitFail;
    }

    if (ob_demo->parsed()) {
      const auto t = obf::parse_tamper(tamper);
      const auto o = obf::qobf_obfuscate(c, seed);
      const auto r = obf::qobf_eval(o, x, rng, t);
      json j{{"input", bits_str(x)},
             {"tamper", obf::tamper_name(t)},
             {"stage", r.stage},
             {"output", r.bit ? json(*r.bit) : json(nullptr)},
             {"expected", want},
             {"obfuscation_bytes", o.size_bytes()},
             {"proof_bytes", r.proof_bytes}};
      std::cout << j.dump(2) << "\n";
      const bool ok = t == obf::Tamper::kNone ? r.bit == want : !r.bit.has_value();
      return ok ? 0 : kExitFail;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitError;
  }
  return kExitError;
}
