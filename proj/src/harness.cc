#include "cosetlab/harness.h"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <fstream>
#include <map>
#include <mutex>
#include <set>
#include <stdexcept>
#include <thread>

#include "cosetlab/collapsing.h"
#include "cosetlab/cosetstates.h"
#include "cosetlab/densesim.h"
#include "cosetlab/obfuscate.h"
#include "cosetlab/oss.h"
#include "cosetlab/pfc.h"
#include "cosetlab/pvqfhe.h"
#include "cosetlab/snark.h"

#ifndef COSETLAB_TOLERANCES
#define COSETLAB_TOLERANCES "tools/tolerances.json"
#endif

namespace cosetlab::harness {

namespace {

using cosets::Complex;
using gf2::Vector;
using Bits = homenc::Bits;

const double kH = 1.0 / std::sqrt(2.0);

uint64_t seed_word(const oracle::Seed& s) {
  uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= uint64_t{s[i]} << (8 * i);
  return v;
}

Bits bits_of(uint64_t v, int n) {
  Bits x(n);
  for (int i = 0; i < n; ++i) x[i] = (v >> (n - 1 - i)) & 1;
  return x;
}

std::string bits_str(const Bits& x) {
  std::string s;
  for (auto b : x) s += b ? '1' : '0';
  return s;
}

gf2::Coset random_balanced(int n, Rng& rng) {
  for (;;) {
    const int d = std::uniform_int_distribution<int>(1, n)(rng);
    gf2::Coset c = gf2::sample_subspace(n, d, rng).translate(Vector::random(n, rng));
    if (cosets::BalancedCoset::is_balanced(c)) return c;
  }
}

std::pair<Complex, Complex> random_amps(Rng& rng) {
  std::normal_distribution<double> g;
  Complex a(g(rng), g(rng)), b(g(rng), g(rng));
  const double n = std::sqrt(std::norm(a) + std::norm(b));
  return {a / n, b / n};
}

// Optimal success distinguishing |psi><psi| from its standard-basis dephasing.
double dense_helstrom(const dense::StateVector& psi) {
  auto rho0 = dense::DensityMatrix::pure(psi);
  Eigen::MatrixXcd diag = Eigen::MatrixXcd::Zero(psi.dim(), psi.dim());
  for (uint64_t i = 0; i < psi.dim(); ++i) diag(i, i) = std::norm(psi.amplitude(i));
  auto rho1 = dense::DensityMatrix::from_matrix(psi.n_qubits(), diag);
  return 0.5 + 0.5 * dense::trace_distance(rho0, rho1);
}

uint64_t count_true(const std::vector<json>& recs, const char* key) {
  uint64_t n = 0;
  for (const auto& r : recs) n += r.at(key).get<bool>();
  return n;
}

// Rate of `key` over the records, passing when `target` lies in the Wilson interval.
void rate_matches(const Context& cx, Report& rep, const char* key, double target) {
  const auto st = wilson(count_true(rep.records, key), rep.records.size(), cx.tol.z());
  rep.aggregate = st.to_json();
  rep.aggregate["target"] = target;
  rep.pass = st.contains(target);
}

// Rate of `key` must reach min_rate from the manifest.
void rate_at_least(const Context& cx, Report& rep, const char* key) {
  const auto st = wilson(count_true(rep.records, key), rep.records.size(), cx.tol.z());
  rep.aggregate = st.to_json();
  rep.pass = !rep.records.empty() && st.rate >= cx.tolerance("min_rate");
}

collapsing::Mode mode_param(const Context& cx) {
  return collapsing::parse_mode(cx.param_str("mode", "exact"));
}

// ---- collapsing ----

double cf_alpha(int n) { return std::ldexp(1.0, -n); }
double cf_beta(int n, int k) { return (std::ldexp(1.0, k) - 1) / (std::ldexp(1.0, 2 * n) - std::ldexp(1.0, n)); }
double cf_distance(int n, int k) { return (std::ldexp(1.0, k) - 1) / std::ldexp(1.0, n); }

dense::DensityMatrix plus_rho(int n) {
  const auto d = Eigen::Index{1} << n;
  return dense::DensityMatrix::from_matrix(n, Eigen::MatrixXcd::Constant(d, d, 1.0 / static_cast<double>(d)));
}

json closed_form_case(int n, int k, collapsing::Mode mode, uint64_t samples, uint64_t seed, bool entrywise) {
  const collapsing::ChannelSpec spec{n, k, mode, samples, seed};
  const auto r = collapsing::plus_state_distance(spec);
  json rec{{"n", n},
           {"k", k},
           {"mode", collapsing::mode_name(mode)},
           {"alpha", r.alpha},
           {"beta", r.beta},
           {"distance", r.distance},
           {"closed_form", cf_distance(n, k)},
           {"abs_err", std::abs(r.distance - cf_distance(n, k))},
           {"std_err", r.std_err}};
  if (entrywise) {
    const auto m = collapsing::phi1_apply(plus_rho(n), spec).matrix();
    double err = 0;
    for (Eigen::Index i = 0; i < m.rows(); ++i)
      for (Eigen::Index j = 0; j < m.cols(); ++j)
        err = std::max(err, std::abs(m(i, j) - (i == j ? cf_alpha(n) : cf_beta(n, k))));
    rec["entry_err"] = err;
  }
  return rec;
}

void exp_collapsing_closed_form(const Context& cx, Report& rep) {
  const auto mode = mode_param(cx);
  const bool mc = mode == collapsing::Mode::kMonteCarlo;
  std::vector<std::pair<int, int>> cases;
  const int n_given = cx.param_int("n", 0);
  if (n_given > 0) {
    const int k = cx.param_int("k", -1);
    for (int kk = 0; kk <= n_given; ++kk)
      if (k < 0 || kk == k) cases.emplace_back(n_given, kk);
  } else {
    for (int n = 1; n <= collapsing::kMaxExactQubits; ++n)
      for (int k = 0; k <= n; ++k) cases.emplace_back(n, k);
  }
  const double tol = cx.tolerance("abs_err");
  bool ok = !cases.empty();
  double worst = 0;
  for (size_t i = 0; i < cases.size(); ++i) {
    const auto [n, k] = cases[i];
    auto rec = closed_form_case(n, k, mode, cx.trials, seed_word(cx.derive("mc", i)), !mc);
    const double err = rec["abs_err"].get<double>();
    bool pass = mc ? err <= cx.tol.z() * rec["std_err"].get<double>() + tol : err <= tol;
    if (!mc) {
      pass = pass && rec["entry_err"].get<double>() <= tol;
      worst = std::max(worst, rec["entry_err"].get<double>());
    }
    worst = std::max(worst, err);
    rec["pass"] = pass;
    ok = ok && pass;
    rep.records.push_back(std::move(rec));
  }
  rep.aggregate = {{"cases", cases.size()}, {"max_abs_err", worst}};
  rep.pass = ok;
}

void exp_trace_distance(const Context& cx, Report& rep) {
  const double tol = cx.tolerance("abs_err");
  bool ok = true;
  double max_sigmas = 0;
  uint64_t idx = 0;
  auto add = [&](json rec, bool pass) {
    rec["pass"] = pass;
    ok = ok && pass;
    rep.records.push_back(std::move(rec));
  };
  const auto hand = collapsing::plus_state_distance({1, 1, collapsing::Mode::kExact});
  add({{"n", 1}, {"k", 1}, {"mode", "hand"}, {"distance", hand.distance}, {"closed_form", 0.5}},
      std::abs(hand.distance - 0.5) <= tol);
  for (int n = 1; n <= collapsing::kMaxExactQubits; ++n)
    for (int k = 0; k <= n; ++k) {
      auto rec = closed_form_case(n, k, collapsing::Mode::kExact, 0, 0, false);
      const bool pass = rec["abs_err"].get<double>() <= tol;
      add(std::move(rec), pass);
    }
  const int n_mc = cx.param_int("n_max", 8);
  for (int n = 1; n <= n_mc; ++n)
    for (int k = 0; k <= n; ++k) {
      auto rec = closed_form_case(n, k, collapsing::Mode::kMonteCarlo, cx.trials,
                                  seed_word(cx.derive("mc", idx++)), false);
      const double err = rec["abs_err"].get<double>(), se = rec["std_err"].get<double>();
      if (se > 0) max_sigmas = std::max(max_sigmas, err / se);
      add(std::move(rec), err <= cx.tol.z() * se + tol);
    }
  rep.aggregate = {{"cases", rep.records.size()}, {"max_mc_sigmas", max_sigmas}};
  rep.pass = ok;
}

// ---- coset states ----

void exp_coset_rotation(const Context& cx, Report& rep) {
  const int n_max = cx.param_int("n_max", 8);
  rep.records = run_trials(cx.trials, cx.config.seed, cx.config.threads, [&](uint64_t, Rng& rng) {
    const int n = std::uniform_int_distribution<int>(1, n_max)(rng);
    const cosets::BalancedCoset bc(random_balanced(n, rng));
    const int b = static_cast<int>(rng() & 1);
    const gf2::Coset perp = bc.full_dual();
    auto pred = [&](const Vector& u) { return perp.contains(u); };
    const auto out = dense::hadamard_all(
        dense::phase_oracle(dense::hadamard_all(dense::coset_to_state(bc.slice(1 - b))), pred));
    const double f = dense::fidelity(out, dense::coset_to_state(bc.slice(b)));
    return json{{"n", n}, {"b", b}, {"coset", bc.full().to_text()}, {"fidelity", f}};
  });
  double worst = 1;
  for (const auto& r : rep.records) worst = std::min(worst, r["fidelity"].get<double>());
  rep.aggregate = {{"min_fidelity", worst}};
  rep.pass = !rep.records.empty() && worst >= 1 - cx.tolerance("fidelity_gap");
}

// ---- OSS ----

void exp_oss_correctness(const Context& cx, Report& rep) {
  const oss::OssParams p{cx.param_int("n", 8), cx.param_int("r", 3), 2, cx.param_int("n", 8)};
  rep.records = run_trials(cx.trials, cx.config.seed, cx.config.threads, [&](uint64_t i, Rng& rng) {
    const auto o = oss::OssOracles::setup(p, cx.derive("oss", i));
    oss::OssToken t = oss::gen(o, rng);
    const uint64_t vk = t.vk();
    const int m = static_cast<int>(i & 1);
    const auto s = oss::sign(o, std::move(t), m, rng);
    const bool verdict = s.ok() && oss::verify(o, vk, m, s.sigma);
    return json{{"vk", oss::vk_hex(vk, p.r)},
                {"m", m},
                {"sigma", s.ok() ? s.sigma.to_hex() : ""},
                {"verdict", verdict}};
  });
  rate_at_least(cx, rep, "verdict");
}

// Exact win probability of the naive cloner, by dense simulation over all y.
double cloner_exact(const oss::OssOracles& o) {
  const int k = o.params().k;
  const uint64_t ys = uint64_t{1} << o.params().r;
  double total = 0;
  for (uint64_t y = 0; y < ys; ++y) {
    const gf2::Coset s = o.coset(y);
    double py = 0;
    for (const auto& u : s.members()) {
      auto st = dense::hadamard_all(dense::StateVector::basis(k, u.bits()));
      st = dense::phase_oracle(st, [&](const Vector& v) { return o.D(y, v); });
      st = dense::hadamard_all(st);
      for (const auto& u2 : s.members())
        if (u2 != u) py += std::norm(st.amplitude(u2.bits()));
    }
    total += py / static_cast<double>(s.size());
  }
  return total / static_cast<double>(ys);
}

void exp_oss_forgery(const Context& cx, Report& rep) {
  const int n = cx.param_int("n", 6), r = cx.param_int("r", 3);
  if (n > 6) throw std::invalid_argument("oss-forgery: dense oracle needs n <= 6");
  const auto o = oss::OssOracles::setup(oss::OssParams{n, r, 2, n}, cx.derive("oss"));
  const double exact = cloner_exact(o);
  const auto adv = oss::naive_cloner();
  rep.records = run_trials(cx.trials, cx.config.seed, cx.config.threads, [&](uint64_t, Rng& rng) {
    const auto res = oss::forgery_game(o, adv, rng);
    return json{{"win", res.win}, {"vk", oss::vk_hex(res.forgery.vk, r)}, {"d_queries", res.queries.d}};
  });
  rate_matches(cx, rep, "win", exact);
}

// ---- binding games ----

json binding_record(const pfc::BindingResult& r) {
  return json{{"challenge", r.challenge},
              {"guess", r.guess},
              {"win", r.outcome == pfc::GameOutcome::kWin},
              {"void", r.outcome == pfc::GameOutcome::kVoid}};
}

void binding_verdict(const Context& cx, Report& rep, double target) {
  rate_matches(cx, rep, "win", target);
  const uint64_t voids = count_true(rep.records, "void");
  rep.aggregate["voids"] = voids;
  rep.pass = rep.pass && voids == 0;
}

pfc::PfcParams binding_params(const Context& cx) {
  const int n = cx.param_int("n", 4), r = cx.param_int("r", 2);
  return pfc::PfcParams{oss::OssParams{}, oss::OssParams{n, r, 2, n}};
}

void exp_collapse_binding_guess(const Context& cx, Report& rep) {
  auto [ck, dk] = pfc::gen(binding_params(cx), cx.derive("pfc"));
  const auto adv = pfc::guessing_adversary(kH, kH);
  rep.records = run_trials(cx.trials, cx.config.seed, cx.config.threads, [&](uint64_t, Rng& rng) {
    return binding_record(pfc::run_collapse_binding(ck, dk, adv.first, adv.second, rng));
  });
  binding_verdict(cx, rep, 0.5);
}

void exp_collapse_binding_control(const Context& cx, Report& rep) {
  auto [ck, dk] = pfc::gen(binding_params(cx), cx.derive("pfc"));
  Rng sample_rng = oracle::rng_from_seed(cx.derive("sample"));
  const double optimum = dense_helstrom(cosets::to_dense(pfc::commit(ck, kH, kH, sample_rng).state));
  const auto adv = pfc::dec_x_test_adversary();
  rep.records = run_trials(cx.trials, cx.config.seed, cx.config.threads, [&](uint64_t, Rng& rng) {
    return binding_record(pfc::run_collapse_binding(ck, dk, adv.first, adv.second, rng, true));
  });
  binding_verdict(cx, rep, optimum);
}

void exp_oss_binding_guess(const Context& cx, Report& rep) {
  const auto o = oss::OssOracles::setup(oss::OssParams{}, cx.derive("oss"));
  const auto adv = pfc::oss_guessing_adversary();
  rep.records = run_trials(cx.trials, cx.config.seed, cx.config.threads, [&](uint64_t, Rng& rng) {
    return binding_record(pfc::run_oss_collapse_binding(o, adv.first, adv.second, rng));
  });
  binding_verdict(cx, rep, 0.5);
}

void exp_oss_binding_control(const Context& cx, Report& rep) {
  const int n = cx.param_int("n", 6), r = cx.param_int("r", 3);
  const auto o = oss::OssOracles::setup(oss::OssParams{n, r, 2, n}, cx.derive("oss"));
  const double optimum = dense_helstrom(dense::coset_to_state(o.coset(0)));
  const auto adv = pfc::oss_d_test_adversary();
  rep.records = run_trials(cx.trials, cx.config.seed, cx.config.threads, [&](uint64_t, Rng& rng) {
    return binding_record(pfc::run_oss_collapse_binding(o, adv.first, adv.second, rng, true));
  });
  binding_verdict(cx, rep, optimum);
}

// ---- PFC ----

json opening_json(const pfc::Opening& d) {
  return json{{"basis", d.basis == pfc::Basis::kZ ? "Z" : "X"}, {"b", d.b}, {"u", d.u.to_hex()}};
}

json verdict_json(const std::optional<int>& v) { return v ? json(*v) : json("reject"); }

void exp_pfc_correctness(const Context& cx, Report& rep) {
  const pfc::PfcParams params{};
  const int k = params.inner.k;
  rep.records = run_trials(cx.trials, cx.config.seed, cx.config.threads, [&](uint64_t i, Rng& rng) {
    const oracle::Seed key_seed = cx.derive("keys", i);
    auto [ck, dk] = pfc::gen(params, key_seed);
    auto [a0, a1] = random_amps(rng);
    const pfc::CommitResult r = pfc::commit(ck, a0, a1, rng);
    // 0, 1, reject
    double z[3] = {0, 0, 0}, x[3] = {0, 0, 0};
    for (const auto& [key, p] : cosets::z_open_distribution(r.state)) {
      const auto v = pfc::dec_z(dk, r.c, pfc::Opening{pfc::Basis::kZ, key.first, Vector(k, key.second)});
      z[v ? *v : 2] += p;
    }
    for (const auto& [key, p] : cosets::x_open_distribution(r.state)) {
      const auto v = pfc::dec_x(dk, r.c, pfc::Opening{pfc::Basis::kX, key.first, Vector(k, key.second)});
      x[v ? *v : 2] += p;
    }
    const double z0 = std::norm(a0), x0 = std::norm(a0 + a1) / 2;
    const double tv_z = (std::abs(z[0] - z0) + std::abs(z[1] - (1 - z0)) + z[2]) / 2;
    const double tv_x = (std::abs(x[0] - x0) + std::abs(x[1] - (1 - x0)) + x[2]) / 2;
    const auto dz = pfc::open_z(r.state, rng);
    const auto dx = pfc::open_x(r.state, rng);
    return json{{"ck_seed", oracle::to_hex(key_seed)},
                {"amp0", {a0.real(), a0.imag()}},
                {"amp1", {a1.real(), a1.imag()}},
                {"c", {{"vk", r.c.vk}, {"sigma", r.c.sigma.to_hex()}, {"vk_bar", r.c.vk_bar}}},
                {"openings", {opening_json(dz), opening_json(dx)}},
                {"verdicts", {verdict_json(pfc::dec_z(dk, r.c, dz)), verdict_json(pfc::dec_x(dk, r.c, dx))}},
                {"tv_z", tv_z},
                {"tv_x", tv_x}};
  });
  double worst = 0;
  for (const auto& r : rep.records)
    worst = std::max({worst, r["tv_z"].get<double>(), r["tv_x"].get<double>()});
  rep.aggregate = {{"states", rep.records.size()}, {"max_tv", worst}};
  rep.pass = !rep.records.empty() && worst <= cx.tolerance("tv");
}

// ---- SNARK ----

snark::Witness random_witness(int m, Rng& rng) {
  snark::Witness w(m);
  for (auto& b : w) b = rng() & 1;
  return w;
}

void exp_snark_completeness(const Context& cx, Report& rep) {
  const auto h = snark::Hash::random(cx.derive("hash"));
  const snark::XorPreimagePcp pcp(cx.param_int("m", 8));
  rep.records = run_trials(cx.trials, cx.config.seed, cx.config.threads, [&](uint64_t, Rng& rng) {
    const auto w = random_witness(pcp.witness_bits(), rng);
    const auto x = pcp.image(w);
    const auto p = snark::prove(h, pcp, x, w);
    return json{{"x", oracle::to_hex(x)}, {"rt", snark::node_hex(p.rt)}, {"accept", snark::verify(h, pcp, x, p)}};
  });
  rate_at_least(cx, rep, "accept");
}

void exp_snark_extract(const Context& cx, Report& rep) {
  const int max_depth = cx.param_int("max_depth", 6);
  rep.records = run_trials(cx.trials, cx.config.seed, cx.config.threads, [&](uint64_t i, Rng& rng) {
    const int d = static_cast<int>(i % (max_depth + 1));
    auto [h, db] = snark::Hash::random(cx.derive("hash", i)).recording();
    std::vector<snark::Node> v(size_t{1} << d);
    for (auto& n : v)
      for (auto& b : n) b = static_cast<uint8_t>(rng());
    const auto t = snark::merkle_commit(v, h);
    const auto tree = snark::extract_tree(snark::HashDatabase::from_queries(*db), t.root(), d);
    bool ok = tree.has_value();
    if (ok) {
      const auto leaves = tree->leaves();
      for (size_t j = 0; j < v.size(); ++j) ok = ok && leaves[j] && *leaves[j] == v[j];
    }
    return json{{"depth", d}, {"root", snark::node_hex(t.root())}, {"recovered", ok}};
  });
  rate_at_least(cx, rep, "recovered");
}

void exp_snark_find_witness(const Context& cx, Report& rep) {
  const snark::XorPreimagePcp pcp(cx.param_int("m", 8));
  rep.records = run_trials(cx.trials, cx.config.seed, cx.config.threads, [&](uint64_t i, Rng& rng) {
    auto [h, db] = snark::Hash::random(cx.derive("hash", i)).recording();
    const auto w = random_witness(pcp.witness_bits(), rng);
    const auto x = pcp.image(w);
    const auto p = snark::prove(h, pcp, x, w);
    const auto found = snark::find_witness(snark::HashDatabase::from_queries(*db), pcp, x);
    // E(0^l) runs first, so a valid all-zero witness may legitimately win.
    const bool zero_valid = pcp.relation(x, snark::Witness(w.size(), 0));
    const bool ok = snark::verify(h, pcp, x, p) && found &&
                    (zero_valid ? pcp.relation(x, *found) : *found == w);
    return json{{"x", oracle::to_hex(x)}, {"found", ok}};
  });
  rate_at_least(cx, rep, "found");
}

// Honestly committed uniform strings. Each check passes w.p. 1/8.
void exp_snark_random_proofs(const Context& cx, Report& rep) {
  const auto h = snark::Hash::random(cx.derive("hash"));
  const snark::XorPreimagePcp pcp(cx.param_int("m", 8));
  rep.records = run_trials(cx.trials, cx.config.seed, cx.config.threads, [&](uint64_t, Rng& rng) {
    const auto x = pcp.image(random_witness(pcp.witness_bits(), rng));
    snark::ProofString pi(pcp.length());
    for (auto& s : pi) s = rng() & 1;
    return json{{"accept", snark::verify(h, pcp, x, snark::prove_from_string(h, pcp, x, pi))}};
  });
  const double kappa = pcp.knowledge_error();
  const auto st = wilson(count_true(rep.records, "accept"), rep.records.size(), cx.tol.z());
  rep.aggregate = st.to_json();
  rep.aggregate["knowledge_error"] = kappa;
  rep.aggregate["exact_acceptance"] = std::pow(1.0 / 8, snark::XorPreimagePcp::kChecks);
  rep.pass = !rep.records.empty() && st.ci_low <= kappa;
}

// Every copy holds w ^ e_j: two constraints break, so each check passes
// w.p. 1 - 2/m.
void exp_snark_corruption(const Context& cx, Report& rep) {
  const auto h = snark::Hash::random(cx.derive("hash"));
  const int m = cx.param_int("m", 8);
  const snark::XorPreimagePcp pcp(m);
  rep.records = run_trials(cx.trials, cx.config.seed, cx.config.threads, [&](uint64_t, Rng& rng) {
    const auto w = random_witness(m, rng);
    const auto x = pcp.image(w);
    auto bad = w;
    bad[rng() % m] ^= 1;
    snark::ProofString pi(pcp.length(), 0);
    for (int c = 0; c < snark::XorPreimagePcp::kCopies; ++c)
      for (int j = 0; j < m; ++j) pi[c * m + j] = bad[j];
    return json{{"accept", snark::verify(h, pcp, x, snark::prove_from_string(h, pcp, x, pi))}};
  });
  rate_matches(cx, rep, "accept", std::pow(1.0 - 2.0 / m, snark::XorPreimagePcp::kChecks));
}

// ---- compressed oracle ----

using CState = oracle::CompressedOracleState;

double l2_distance(const CState& a, const CState& b) {
  std::map<CState::Key, CState::Complex> diff = a.terms();
  for (const auto& [key, v] : b.terms()) diff[key] -= v;
  double acc = 0;
  for (const auto& [key, v] : diff) acc += std::norm(v);
  return std::sqrt(acc);
}

// Frobenius norm of Decomp^2 - I over every basis key; bounds the operator norm.
double decomp_frobenius(int n_in, int n_out) {
  const uint32_t dom = 1u << n_in, outs = 1u << n_out, vals = outs + 1;
  uint64_t dbs = 1;
  for (uint32_t i = 0; i < dom; ++i) dbs *= vals;
  double acc = 0;
  CState s(n_in, n_out);
  for (uint32_t x = 0; x < dom; ++x)
    for (uint32_t u = 0; u < outs; ++u)
      for (uint64_t code = 0; code < dbs; ++code) {
        CState::Key key{x, u, std::vector<uint8_t>(dom)};
        uint64_t rem = code;
        for (auto& v : key.db) {
          v = static_cast<uint8_t>(rem % vals);
          rem /= vals;
        }
        s.clear();
        s.set(key, 1.0);
        const double d = l2_distance(s, oracle::decomp(oracle::decomp(s)));
        acc += d * d;
      }
  return std::sqrt(acc);
}

CState random_cstate(int n_in, int n_out, Rng& rng) {
  std::normal_distribution<double> g;
  const uint32_t dom = 1u << n_in;
  std::map<CState::Key, CState::Complex> acc;
  for (int i = 0; i < 12; ++i) {
    CState::Key k{static_cast<uint32_t>(rng() % dom), static_cast<uint32_t>(rng() % (1u << n_out)),
                  std::vector<uint8_t>(dom)};
    for (auto& v : k.db) v = static_cast<uint8_t>(rng() % ((1u << n_out) + 1));
    acc[k] += CState::Complex(g(rng), g(rng));
  }
  double norm = 0;
  for (const auto& [k, a] : acc) norm += std::norm(a);
  CState s(n_in, n_out);
  s.clear();
  for (const auto& [k, a] : acc) s.set(k, a / std::sqrt(norm));
  return s;
}

void exp_cstso_decomp(const Context& cx, Report& rep) {
  const double tol = cx.tolerance("deviation");
  bool ok = true;
  for (auto [n_in, n_out] : std::vector<std::pair<int, int>>{{1, 1}, {1, 2}, {2, 1}, {2, 2}, {1, 3}, {3, 1}}) {
    const double f = decomp_frobenius(n_in, n_out);
    ok = ok && f <= tol;
    rep.records.push_back({{"n_in", n_in}, {"n_out", n_out}, {"kind", "frobenius"}, {"deviation", f}});
  }
  const std::vector<std::pair<int, int>> shapes{{3, 3}, {2, 4}, {4, 2}, {3, 2}, {5, 1}};
  auto rnd = run_trials(cx.trials, cx.config.seed, cx.config.threads, [&](uint64_t i, Rng& rng) {
    const auto [n_in, n_out] = shapes[i % shapes.size()];
    const auto s = random_cstate(n_in, n_out, rng);
    return json{{"n_in", n_in}, {"n_out", n_out}, {"kind", "random"},
                {"deviation", l2_distance(s, oracle::decomp(oracle::decomp(s)))}};
  });
  double worst = 0;
  for (auto& r : rnd) rep.records.push_back(std::move(r));
  for (const auto& r : rep.records) worst = std::max(worst, r["deviation"].get<double>());
  rep.aggregate = {{"max_deviation", worst}};
  rep.pass = ok && worst <= tol;
}

// Transcript distribution of a lazily sampled random function, by summing
// over every function table.
std::map<std::vector<uint32_t>, double> lazy_transcript(int n_in, int n_out, const std::vector<uint32_t>& xs) {
  const uint64_t dom = uint64_t{1} << n_in, outs = uint64_t{1} << n_out;
  uint64_t n_fns = 1;
  for (uint64_t i = 0; i < dom; ++i) n_fns *= outs;
  std::map<std::vector<uint32_t>, double> out;
  for (uint64_t code = 0; code < n_fns; ++code) {
    std::vector<uint32_t> table(dom);
    uint64_t rem = code;
    for (auto& v : table) {
      v = static_cast<uint32_t>(rem % outs);
      rem /= outs;
    }
    std::vector<uint32_t> t;
    for (uint32_t x : xs) t.push_back(table[x]);
    out[t] += 1.0 / static_cast<double>(n_fns);
  }
  return out;
}

void exp_cstso_transcript(const Context& cx, Report& rep) {
  const std::vector<std::pair<int, int>> shapes{{1, 1}, {1, 2}, {2, 1}, {2, 2}, {1, 3}, {3, 1}, {3, 2}};
  rep.records = run_trials(cx.trials, cx.config.seed, cx.config.threads, [&](uint64_t i, Rng& rng) {
    const auto [n_in, n_out] = shapes[i % shapes.size()];
    const int q = 1 + static_cast<int>(rng() % 4);
    std::vector<uint32_t> xs(q);
    for (auto& x : xs) x = static_cast<uint32_t>(rng() % (1u << n_in));
    const auto want = lazy_transcript(n_in, n_out, xs);
    const auto got = oracle::cstso_classical_transcript(n_in, n_out, xs);
    double tv = 0;
    for (const auto& [t, p] : want) tv += std::abs(p - (got.count(t) ? got.at(t) : 0.0));
    for (const auto& [t, p] : got)
      if (!want.count(t)) tv += p;
    return json{{"n_in", n_in}, {"n_out", n_out}, {"queries", xs}, {"tv", tv / 2}};
  });
  double worst = 0;
  for (const auto& r : rep.records) worst = std::max(worst, r["tv"].get<double>());
  rep.aggregate = {{"max_tv", worst}};
  rep.pass = !rep.records.empty() && worst <= cx.tolerance("tv");
}

// ---- small-range distribution ----

// The distinguisher queries q distinct inputs and reports a collision; its
// advantage is the gap between the small-range and uniform collision rates.
void exp_small_range(const Context& cx, Report& rep) {
  const int q = cx.param_int("q", 16);
  const std::vector<size_t> ranges{8, 64, 512};
  const int probes = 4 * q;
  const oracle::ValueSampler base = [](Rng& r) { return oracle::u64_le(r()); };
  json per_r = json::array();
  bool ok = true;
  double prev_adv = 2;
  for (size_t r : ranges) {
    auto recs = run_trials(cx.trials, cx.derive("range", r), cx.config.threads, [&](uint64_t i, Rng& rng) {
      const auto f = oracle::small_range_fn(base, r, rng);
      const auto g = oracle::FnHandle::random(oracle::derive_seed(cx.derive("uniform", r), "fn", i), 8);
      std::set<oracle::Bytes> seen_f, seen_g, image;
      for (int x = 0; x < q; ++x) {
        seen_f.insert(f(oracle::u64_le(x)));
        seen_g.insert(g(oracle::u64_le(x)));
      }
      for (int x = 0; x < probes; ++x) image.insert(f(oracle::u64_le(x)));
      return json{{"r", r},
                  {"collision_small", seen_f.size() < static_cast<size_t>(q)},
                  {"collision_uniform", seen_g.size() < static_cast<size_t>(q)},
                  {"image", image.size()}};
    });
    const uint64_t n = recs.size();
    const auto small = wilson(count_true(recs, "collision_small"), n, cx.tol.z());
    const auto unif = wilson(count_true(recs, "collision_uniform"), n, cx.tol.z());
    double exact = 1;
    for (int i = 0; i < q; ++i) exact *= std::max(0.0, 1.0 - static_cast<double>(i) / static_cast<double>(r));
    exact = 1 - exact;
    size_t max_image = 0;
    for (const auto& rec : recs) max_image = std::max(max_image, rec["image"].get<size_t>());
    const double adv = std::abs(small.rate - unif.rate);
    const bool image_ok = max_image <= r;
    const bool rate_ok = small.contains(exact);
    const bool trend_ok = adv < prev_adv;
    ok = ok && image_ok && rate_ok && trend_ok;
    prev_adv = adv;
    per_r.push_back({{"r", r},
                     {"advantage", adv},
                     {"collision_small", small.to_json()},
                     {"collision_uniform", unif.to_json()},
                     {"exact_collision", exact},
                     {"max_image", max_image},
                     {"bound", M_PI * M_PI * std::pow(2.0 * q, 3) / 3 / static_cast<double>(r)},
                     {"image_ok", image_ok},
                     {"rate_ok", rate_ok},
                     {"decreasing", trend_ok}});
    for (auto& rec : recs) rep.records.push_back(std::move(rec));
  }
  rep.aggregate = {{"q", q}, {"ranges", per_r}};
  rep.pass = ok;
}

// ---- pipelines ----

void exp_pvqfhe_corpus(const Context& cx, Report& rep) {
  const auto corpus = pvqfhe::circuit_corpus();
  const pvqfhe::Params params{};
  const size_t bound = pvqfhe::proof_size_bound(params, 8);
  rep.records = run_trials(cx.trials, cx.config.seed, cx.config.threads, [&](uint64_t i, Rng& rng) {
    const auto& [name, c] = corpus[(i / 4) % corpus.size()];
    const Bits x = bits_of(i % 4, c.n_inputs);
    const auto setup = pvqfhe::gen(params, cx.derive("gen", i));
    const auto q = pvqfhe::circuit_program(c);
    const auto ct = pvqfhe::enc(setup.pk, x, rng);
    const auto r = pvqfhe::eval(*setup.pp, ct, q, rng);
    const bool accept = r.ct_tilde && pvqfhe::verify(*setup.pp, ct, q.description, *r.ct_tilde, r.pi);
    const auto y = r.ct_tilde ? pvqfhe::dec(*setup.pp, setup.sk, *r.ct_tilde) : std::nullopt;
    const int want = c.prob_one(x) > 0.5;
    const auto wire = r.pi.serialize();
    const size_t bytes = wire.size();
    return json{{"circuit", name},
                {"proof_digest", oracle::to_hex(oracle::keyed_hash(oracle::as_bytes("record"), wire, 8))},
                {"sign_restarts", r.sign_restarts},
                {"grind_attempts", r.grind_attempts},
                {"x", bits_str(x)},
                {"accept", accept},
                {"dec", verdict_json(y)},
                {"want", want},
                {"proof_bytes", bytes},
                {"ok", accept && y == want && bytes <= bound}};
  });
  rate_at_least(cx, rep, "ok");
  rep.aggregate["proof_bound"] = bound;
}

void exp_qobf_corpus(const Context& cx, Report& rep) {
  const auto corpus = pvqfhe::circuit_corpus();
  const size_t proof_bound = pvqfhe::proof_size_bound(pvqfhe::Params{}, 8);
  rep.records = run_trials(cx.trials, cx.config.seed, cx.config.threads, [&](uint64_t i, Rng& rng) {
    const auto& [name, c] = corpus[i % corpus.size()];
    const auto o = obf::qobf_obfuscate(c, cx.derive("obf", i));
    const size_t size_bound = obf::qobf_size_bound(c.serialize().size());
    json table = json::array();
    bool ok = o.size_bytes() <= size_bound;
    for (uint64_t v = 0; v < (uint64_t{1} << c.n_inputs); ++v) {
      const Bits x = bits_of(v, c.n_inputs);
      const auto r = obf::qobf_eval(o, x, rng);
      const int want = c.prob_one(x) > 0.5;
      ok = ok && r.stage == "ok" && r.bit == want && r.proof_bytes <= proof_bound;
      table.push_back({{"x", bits_str(x)}, {"bit", verdict_json(r.bit)}, {"want", want}, {"proof_bytes", r.proof_bytes}});
    }
    return json{{"circuit", name}, {"size_bytes", o.size_bytes()}, {"size_bound", size_bound},
                {"table", table}, {"ok", ok}};
  });
  rate_at_least(cx, rep, "ok");
}

void exp_qobf_tamper(const Context& cx, Report& rep) {
  const auto corpus = pvqfhe::circuit_corpus();
  const obf::Tamper modes[] = {obf::Tamper::kCiphertext, obf::Tamper::kProof, obf::Tamper::kOpening,
                               obf::Tamper::kSignature};
  rep.records = run_trials(cx.trials, cx.config.seed, cx.config.threads, [&](uint64_t i, Rng& rng) {
    const auto t = modes[i % 4];
    const auto& [name, c] = corpus[(i / 4) % corpus.size()];
    const auto o = obf::qobf_obfuscate(c, cx.derive("obf", i));
    const Bits x = bits_of(rng(), c.n_inputs);
    const auto r = obf::qobf_eval(o, x, rng, t);
    const bool rejected = !r.bit && o.dk().stats().decryptions == 0;
    return json{{"circuit", name}, {"tamper", obf::tamper_name(t)}, {"x", bits_str(x)},
                {"stage", r.stage}, {"rejected", rejected}};
  });
  rate_at_least(cx, rep, "rejected");
}

void exp_sobf_corpus(const Context& cx, Report& rep) {
  rep.records = run_trials(cx.trials, cx.config.seed, cx.config.threads, [&](uint64_t i, Rng& rng) {
    const int n = 1 + static_cast<int>(rng() % 4);
    const auto p = obf::random_program(n, 1 + static_cast<int>(rng() % 2), 1 + static_cast<int>(rng() % 4), rng);
    const auto o = obf::sobf_obfuscate(p, cx.derive("obf", i));
    const Bits x = bits_of(rng(), n);
    const auto r = obf::sobf_eval(o, x);
    const bool honest = r.stage == "ok" && r.y == p.run(x);
    const bool t_ct = obf::sobf_eval(o, x, obf::Tamper::kCiphertext).stage == "oracle";
    const bool t_pi = obf::sobf_eval(o, x, obf::Tamper::kProof).stage == "oracle";
    const size_t bound = obf::sobf_size_bound(p.serialize().size());
    return json{{"program_bytes", p.serialize().size()}, {"x", bits_str(x)},
                {"y", r.y ? bits_str(*r.y) : "reject"}, {"size_bytes", o.size_bytes()},
                {"size_bound", bound},
                {"ok", honest && t_ct && t_pi && o.size_bytes() <= bound}};
  });
  rate_at_least(cx, rep, "ok");
}

}  // namespace

// ---- plumbing ----

json ExperimentConfig::to_json() const {
  return json{{"id", id}, {"seed", oracle::to_hex(seed)}, {"trials", trials}, {"params", params}};
}

RateStats wilson(uint64_t successes, uint64_t trials, double z) {
  RateStats s;
  s.successes = successes;
  s.trials = trials;
  if (trials == 0) return s;
  const double n = static_cast<double>(trials), p = successes / n, z2 = z * z;
  s.rate = p;
  s.std_err = std::sqrt(p * (1 - p) / n);
  const double centre = (p + z2 / (2 * n)) / (1 + z2 / n);
  const double half = z / (1 + z2 / n) * std::sqrt(p * (1 - p) / n + z2 / (4 * n * n));
  s.ci_low = std::max(0.0, centre - half);
  s.ci_high = std::min(1.0, centre + half);
  return s;
}

json RateStats::to_json() const {
  return json{{"successes", successes}, {"trials", trials}, {"rate", rate},
              {"stderr", std_err}, {"ci", {ci_low, ci_high}}};
}

Tolerances::Tolerances(json manifest) : manifest_(std::move(manifest)) {
  if (!manifest_.is_object() || !manifest_.contains("experiments"))
    throw std::invalid_argument("tolerances: manifest needs an \"experiments\" object");
}

Tolerances Tolerances::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("tolerances: cannot open " + path);
  return Tolerances(json::parse(in));
}

double Tolerances::z() const { return manifest_.value("wilson_z", 3.0); }

const json& Tolerances::of(const std::string& id) const {
  const auto& e = manifest_.at("experiments");
  if (!e.contains(id)) throw std::out_of_range("tolerances: no entry for " + id);
  return e.at(id);
}

double Tolerances::get(const std::string& id, const std::string& key) const {
  const auto& t = of(id);
  if (!t.contains(key)) throw std::out_of_range("tolerances: " + id + " lacks " + key);
  return t.at(key).get<double>();
}

std::string default_tolerance_path() { return COSETLAB_TOLERANCES; }

json Report::to_json() const {
  return json{{"schema", kSchema}, {"config", config},     {"records", records},
              {"aggregate", aggregate}, {"tolerance", tolerance}, {"pass", pass},
              {"elapsed_s", elapsed_s}};
}

int Context::param_int(const std::string& key, int fallback) const {
  const auto& p = config.params;
  if (!p.contains(key)) return fallback;
  const auto& v = p.at(key);
  return v.is_string() ? std::stoi(v.get<std::string>()) : v.get<int>();
}

std::string Context::param_str(const std::string& key, const std::string& fallback) const {
  const auto& p = config.params;
  if (!p.contains(key)) return fallback;
  const auto& v = p.at(key);
  return v.is_string() ? v.get<std::string>() : v.dump();
}

const std::vector<Experiment>& registry() {
  static const std::vector<Experiment> r{
      {"collapsing-closed-form", "Phi1 on |+><+| against alpha/beta and the distance (2^k-1)/2^n", 10000,
       exp_collapsing_closed_form},
      {"trace-distance", "exact distance for n <= 4, Monte-Carlo within z SE for n <= 8", 10000, exp_trace_distance},
      {"coset-rotation", "H Phase H maps |S_{y,1-b}> to |S_{y,b}>", 100, exp_coset_rotation},
      {"pfc-correctness", "PFC Z/X pipelines against direct measurement", 10000, exp_pfc_correctness},
      {"oss-correctness", "honest Gen/Sign/Ver acceptance", 1000, exp_oss_correctness},
      {"oss-forgery", "naive cloner against its dense win probability", 10000, exp_oss_forgery},
      {"collapse-binding-guess", "guessing adversary in the PFC collapse-binding game", 10000,
       exp_collapse_binding_guess},
      {"collapse-binding-control", "DecX control adversary against the dense optimum", 10000,
       exp_collapse_binding_control},
      {"oss-binding-guess", "guessing adversary in the OSS collapse-binding game", 10000, exp_oss_binding_guess},
      {"oss-binding-control", "D control adversary against the dense optimum", 10000, exp_oss_binding_control},
      {"snark-completeness", "honest proofs verify", 1000, exp_snark_completeness},
      {"snark-extract", "Merkle extraction from honest databases, depths 0..6", 700, exp_snark_extract},
      {"snark-find-witness", "FindWitness on recorded honest provers", 200, exp_snark_find_witness},
      {"snark-random-proofs", "committed random strings against the knowledge error", 2000,
       exp_snark_random_proofs},
      {"snark-corruption", "one-bit corrupted proofs against the exact acceptance", 4000, exp_snark_corruption},
      {"cstso-decomp", "Decomp is an involution", 50, exp_cstso_decomp},
      {"cstso-transcript", "classical CStO transcripts against a lazy random function", 70, exp_cstso_transcript},
      {"small-range", "small-range collision distinguisher across r in {8, 64, 512}", 2000, exp_small_range},
      {"pvqfhe-corpus", "Ver and Dec over the circuit corpus, all inputs", 12, exp_pvqfhe_corpus},
      {"qobf-corpus", "obfuscated truth tables and size bounds", 3, exp_qobf_corpus},
      {"qobf-tamper", "every tamper mode rejected before decryption", 24, exp_qobf_tamper},
      {"sobf-corpus", "succinct obfuscation of random machines", 200, exp_sobf_corpus},
  };
  return r;
}

std::vector<std::string> experiment_ids() {
  std::vector<std::string> ids;
  for (const auto& e : registry()) ids.push_back(e.id);
  return ids;
}

Report run(const ExperimentConfig& config, const Tolerances& tol) {
  const auto& reg = registry();
  const auto it = std::find_if(reg.begin(), reg.end(), [&](const Experiment& e) { return e.id == config.id; });
  if (it == reg.end()) throw std::invalid_argument("unknown experiment: " + config.id);
  Report rep;
  const uint64_t trials = config.trials ? config.trials : it->default_trials;
  ExperimentConfig echo = config;
  echo.trials = trials;
  rep.config = echo.to_json();
  rep.tolerance = tol.of(config.id);
  rep.tolerance["wilson_z"] = tol.z();
  const Context cx{config, tol, trials};
  const auto t0 = std::chrono::steady_clock::now();
  it->body(cx, rep);
  rep.elapsed_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (rep.tolerance.contains("max_seconds"))
    rep.pass = rep.pass && rep.elapsed_s <= rep.tolerance["max_seconds"].get<double>();
  if (!config.out.empty()) write_report(rep, config.out);
  return rep;
}

void write_report(const Report& r, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write report to " + path);
  out << r.to_json().dump(2) << "\n";
}

std::vector<json> run_trials(uint64_t trials, const oracle::Seed& seed, int threads,
                             const std::function<json(uint64_t, Rng&)>& trial) {
  std::vector<json> out(trials);
  const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  const uint64_t workers = std::min<uint64_t>(threads > 0 ? threads : hw, std::max<uint64_t>(trials, 1));
  std::atomic<uint64_t> next{0};
  std::exception_ptr err;
  std::mutex err_mu;
  auto work = [&] {
    for (uint64_t i = next++; i < trials; i = next++) {
      try {
        Rng rng = oracle::rng_from_seed(oracle::derive_seed(seed, "trial", i));
        out[i] = trial(i, rng);
      } catch (...) {
        std::lock_guard lk(err_mu);
        if (!err) err = std::current_exception();
        next = trials;
      }
    }
  };
  std::vector<std::thread> pool;
  for (uint64_t w = 1; w < workers; ++w) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();
  if (err) std::rethrow_exception(err);
  return out;
}

}  // namespace cosetlab::harness
