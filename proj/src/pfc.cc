#include "cosetlab/pfc.h"

#include <cmath>
#include <stdexcept>

namespace cosetlab::pfc {
namespace {

bool vk_in_range(uint64_t vk, int r) { return r >= 64 || (vk >> r) == 0; }

dense::SparseState coset_sparse(const gf2::Coset& c) {
  dense::SparseState s;
  s.n_qubits = c.ambient_dim();
  const double a = 1.0 / std::sqrt(static_cast<double>(c.size()));
  for (uint64_t i = 0; i < c.size(); ++i) s.amps[c.member(i).bits()] = a;
  return s;
}

uint64_t measure_dense_hadamard(const dense::SparseState& s, Rng& rng) {
  return dense::SparseState::from_dense(dense::hadamard_all(s.to_dense())).measure_all(rng);
}

}  // namespace

void PfcParams::validate() const {
  outer.validate();
  inner.validate();
}

CommitKey::CommitKey(const PfcParams& params, const oracle::Seed& outer_seed,
                     const oracle::Seed& prf_key)
    : params_(params),
      prf_key_(prf_key),
      outer_(oss::OssOracles::setup(params.outer, outer_seed)),
      cache_(std::make_shared<Cache>()) {
  params.validate();
}

const oss::OssOracles& CommitKey::inner(uint64_t vk) const {
  std::lock_guard lock(cache_->mu);
  auto& slot = cache_->inner[vk];
  if (!slot) {
    oracle::Bytes h = oracle::keyed_hash(
        prf_key_, oracle::concat({oracle::as_bytes("pfc/inner"), oracle::u64_le(vk)}), 32);
    oracle::Seed s;
    std::copy(h.begin(), h.end(), s.begin());
    slot = std::make_unique<oss::OssOracles>(oss::OssOracles::setup(params_.inner, s));
  }
  return *slot;
}

std::pair<uint64_t, gf2::Vector> CommitKey::ck_P(uint64_t vk, uint64_t x) const {
  return inner(vk).P(x);
}

std::optional<uint64_t> CommitKey::ck_P_inv(uint64_t vk, uint64_t vk_bar,
                                            const gf2::Vector& u) const {
  if (!vk_in_range(vk_bar, params_.inner.r)) return std::nullopt;
  return inner(vk).P_inv(vk_bar, u);
}

std::optional<int> CommitKey::ck_D(uint64_t vk, const gf2::Vector& sigma, uint64_t vk_bar,
                                   const gf2::Vector& u) const {
  if (!oss::verify(outer_, vk, 0, sigma)) return std::nullopt;
  if (!vk_in_range(vk_bar, params_.inner.r) || u.len() != params_.inner.k) return std::nullopt;
  return inner(vk).D(vk_bar, u) ? 0 : 1;
}

oss::OssToken CommitKey::inner_gen(uint64_t vk, Rng& rng) const {
  return oss::gen(inner(vk), rng);
}

DecodeKey::DecodeKey(const PfcParams& params, const oracle::Seed& outer_seed,
                     const oracle::Seed& prf_key)
    : params_(params), outer_seed_(outer_seed), prf_key_(prf_key), lazy_(std::make_shared<Lazy>()) {}

const CommitKey& DecodeKey::commit_key() const {
  std::call_once(lazy_->once, [this] {
    lazy_->ck = std::make_unique<CommitKey>(params_, outer_seed_, prf_key_);
  });
  return *lazy_->ck;
}

std::pair<CommitKey, DecodeKey> gen(const PfcParams& params, const oracle::Seed& seed) {
  params.validate();
  const oracle::Seed r1 = oracle::derive_seed(seed, "pfc/R1");
  const oracle::Seed k = oracle::derive_seed(seed, "pfc/prf");
  return {CommitKey(params, r1, k), DecodeKey(params, r1, k)};
}

CommitResult commit(const CommitKey& ck, cosets::Complex amp0, cosets::Complex amp1, Rng& rng) {
  if (std::abs(std::norm(amp0) + std::norm(amp1) - 1.0) > 1e-10) {
    throw std::invalid_argument("pfc commit: amplitudes not normalized");
  }
  CommitResult res;
  oss::OssToken outer_tok = oss::gen(ck.outer(), rng);
  res.outer_retries = outer_tok.gen_retries();
  const uint64_t vk = outer_tok.vk();
  // The coherent 0-signature is only used as the key to ck_D and is
  // uncomputed afterwards; any valid one gives the same oracle.
  const gf2::Vector sigma0 = cosets::BalancedCoset(outer_tok.sk()).slice(0).shift();

  oss::OssToken inner_tok = ck.inner_gen(vk, rng);
  res.inner_retries = inner_tok.gen_retries();
  const uint64_t y = inner_tok.vk();
  const cosets::BalancedCoset inner_coset(inner_tok.sk());
  auto first = cosets::restrict_first_bit(inner_tok.take(), rng);
  res.b_prime = first.b;

  // Branch B = 1 - b' is rotated with phase (-1)^{ck_D}; this lands on
  // +|S_{y,1-b'}>, so the branches keep the input amplitudes.
  if (std::abs(first.b ? amp0 : amp1) > 0) {
    auto pred = [&](const gf2::Vector& v) {
      auto r = ck.ck_D(vk, sigma0, y, v);
      if (!r) throw std::logic_error("pfc commit: ck_D rejected the 0-signature");
      return *r == 0;
    };
    cosets::rotate_first_bit(first.post, pred);
  }
  res.state = cosets::CosetQubitState(amp0, amp1, inner_coset, oss::vk_hex(y, ck.params().inner.r));

  oss::SignResult s1 = oss::sign(ck.outer(), std::move(outer_tok), 1, rng);
  if (!s1.ok()) throw std::logic_error("pfc commit: outer signing aborted");
  res.c = Commitment{vk, s1.sigma, y};
  return res;
}

Opening open_z(const cosets::CosetQubitState& s, Rng& rng) {
  auto o = cosets::measure_z_open(s, rng);
  return Opening{Basis::kZ, o.b, o.u};
}

Opening open_x(const cosets::CosetQubitState& s, Rng& rng) {
  auto o = cosets::measure_x_open(s, rng);
  return Opening{Basis::kX, o.b, o.u};
}

std::optional<int> dec_z(const DecodeKey& dk, const Commitment& c, const Opening& d) {
  const CommitKey& ck = dk.commit_key();
  if (!oss::verify(ck.outer(), c.vk, 1, c.sigma)) return std::nullopt;
  if ((d.b != 0 && d.b != 1) || d.u.len() != dk.params().inner.k) return std::nullopt;
  if (d.u.first() != (d.b == 1)) return std::nullopt;
  if (!ck.ck_P_inv(c.vk, c.vk_bar, d.u)) return std::nullopt;
  return d.b;
}

std::optional<int> dec_x(const DecodeKey& dk, const Commitment& c, const Opening& d) {
  const CommitKey& ck = dk.commit_key();
  if (!oss::verify(ck.outer(), c.vk, 1, c.sigma)) return std::nullopt;
  if ((d.b != 0 && d.b != 1) || d.u.len() != dk.params().inner.k) return std::nullopt;
  if (!vk_in_range(c.vk_bar, dk.params().inner.r)) return std::nullopt;
  const oss::OssOracles& in = dk.inner(c.vk);
  int r;
  if (in.D(c.vk_bar, d.u)) {
    r = 0;
  } else {
    gf2::Vector flipped = d.u;
    flipped.flip(0);
    if (!in.D(c.vk_bar, flipped)) return std::nullopt;
    r = 1;
  }
  return d.b ^ r;
}

bool string_projector_accepts(const std::vector<const DecodeKey*>& dks,
                              const std::vector<Commitment>& cs, const std::set<uint32_t>& w,
                              const std::vector<Opening>& ds) {
  if (dks.size() != cs.size() || cs.size() != ds.size() || ds.empty() || ds.size() > 3) {
    throw std::invalid_argument("string projector: need 1..3 matching openings");
  }
  uint32_t word = 0;
  for (size_t i = 0; i < ds.size(); ++i) {
    auto b = dec_z(*dks[i], cs[i], ds[i]);
    if (!b) return false;
    word = word << 1 | static_cast<uint32_t>(*b);
  }
  return w.count(word) > 0;
}

std::optional<int> PfcAccess::dec_z(const Commitment& c, const Opening& d) {
  ++counts_.dec_z;
  return pfc::dec_z(*dk_, c, d);
}

std::optional<int> PfcAccess::dec_x(const Commitment& c, const Opening& d) {
  if (!dec_x_open_) throw std::logic_error("DecX oracle revoked");
  ++counts_.dec_x;
  return pfc::dec_x(*dk_, c, d);
}

namespace {

size_t prefix_support(const dense::SparseState& s, int suffix_bits) {
  std::set<uint64_t> p;
  for (uint64_t i : s.support()) p.insert(suffix_bits >= 64 ? 0 : i >> suffix_bits);
  return p.size();
}

GameOutcome judge(int challenge, int guess) {
  return challenge == guess ? GameOutcome::kWin : GameOutcome::kLose;
}

}  // namespace

BindingResult run_collapse_binding(const CommitKey& ck, const DecodeKey& dk, const BindingA1& a1,
                                   const BindingA2& a2, Rng& rng, bool control_dec_x) {
  PfcAccess acc(ck, dk);
  BindingResult res;
  BindingSubmission sub = a1(acc, rng);
  const int n = ck.params().inner.k;
  if (sub.r_qubits < 0 || sub.state.n_qubits != 1 + n + sub.r_qubits ||
      std::abs(sub.state.norm() - 1.0) > 1e-9) {
    return res;
  }
  // Validity: (B,U) must lie in |0><0| x Pi_0 + |1><1| x Pi_1.
  for (uint64_t idx : sub.state.support()) {
    const uint64_t bu = idx >> sub.r_qubits;
    const int b = static_cast<int>(bu >> n);
    const gf2::Vector u(n, bu & ((uint64_t{1} << n) - 1));
    if (dec_z(dk, sub.c, Opening{Basis::kZ, b, u}) != b) return res;
  }
  res.challenge = std::bernoulli_distribution(0.5)(rng) ? 1 : 0;
  if (res.challenge) sub.state.measure_prefix(1 + n, rng);
  res.post_support = prefix_support(sub.state, sub.r_qubits);
  if (!control_dec_x) acc.revoke_dec_x();
  res.guess = a2(acc, sub.state, rng);
  res.outcome = judge(res.challenge, res.guess);
  return res;
}

BindingResult run_oss_collapse_binding(const oss::OssOracles& o, const OssA1& a1, const OssA2& a2,
                                       Rng& rng, bool control_d) {
  oss::OracleAccess acc(o);
  BindingResult res;
  OssSubmission sub = a1(acc, rng);
  const int k = o.params().k;
  if (sub.r_qubits < 0 || sub.state.n_qubits != k + sub.r_qubits ||
      std::abs(sub.state.norm() - 1.0) > 1e-9 || !vk_in_range(sub.y, o.params().r)) {
    return res;
  }
  for (uint64_t idx : sub.state.support()) {
    if (!o.P_inv(sub.y, gf2::Vector(k, idx >> sub.r_qubits))) return res;
  }
  res.challenge = std::bernoulli_distribution(0.5)(rng) ? 1 : 0;
  if (res.challenge) sub.state.measure_prefix(k, rng);
  res.post_support = prefix_support(sub.state, sub.r_qubits);
  if (!control_d) acc.revoke_d();
  res.guess = a2(acc, sub.state, rng);
  res.outcome = judge(res.challenge, res.guess);
  return res;
}

std::pair<BindingA1, BindingA2> guessing_adversary(cosets::Complex amp0, cosets::Complex amp1) {
  BindingA1 a1 = [amp0, amp1](PfcAccess& acc, Rng& rng) {
    CommitResult cr = commit(acc.ck(), amp0, amp1, rng);
    return BindingSubmission{cr.c, cosets::to_sparse(cr.state), 0};
  };
  BindingA2 a2 = [](PfcAccess&, dense::SparseState&, Rng& rng) {
    return std::bernoulli_distribution(0.5)(rng) ? 1 : 0;
  };
  return {a1, a2};
}

std::pair<BindingA1, BindingA2> dec_x_test_adversary() {
  auto memo = std::make_shared<Commitment>();
  BindingA1 a1 = [memo](PfcAccess& acc, Rng& rng) {
    const double h = 1.0 / std::sqrt(2.0);
    CommitResult cr = commit(acc.ck(), h, h, rng);
    *memo = cr.c;
    return BindingSubmission{cr.c, cosets::to_sparse(cr.state), 0};
  };
  BindingA2 a2 = [memo](PfcAccess& acc, dense::SparseState& s, Rng& rng) {
    const int n = s.n_qubits - 1;
    const uint64_t idx = measure_dense_hadamard(s, rng);
    const Opening d{Basis::kX, static_cast<int>(idx >> n),
                    gf2::Vector(n, idx & ((uint64_t{1} << n) - 1))};
    return acc.dec_x(*memo, d) == 0 ? 0 : 1;
  };
  return {a1, a2};
}

std::pair<OssA1, OssA2> oss_guessing_adversary() {
  OssA1 a1 = [](oss::OracleAccess& acc, Rng& rng) {
    oss::OssToken t = acc.gen(rng);
    const uint64_t y = t.vk();
    return OssSubmission{y, coset_sparse(t.take()), 0};
  };
  OssA2 a2 = [](oss::OracleAccess&, dense::SparseState&, Rng& rng) {
    return std::bernoulli_distribution(0.5)(rng) ? 1 : 0;
  };
  return {a1, a2};
}

std::pair<OssA1, OssA2> oss_d_test_adversary() {
  auto y_memo = std::make_shared<uint64_t>(0);
  OssA1 a1 = [y_memo](oss::OracleAccess& acc, Rng& rng) {
    oss::OssToken t = acc.gen(rng);
    *y_memo = t.vk();
    return OssSubmission{t.vk(), coset_sparse(t.take()), 0};
  };
  OssA2 a2 = [y_memo](oss::OracleAccess& acc, dense::SparseState& s, Rng& rng) {
    const uint64_t idx = measure_dense_hadamard(s, rng);
    return acc.D(*y_memo, gf2::Vector(s.n_qubits, idx)) ? 0 : 1;
  };
  return {a1, a2};
}

double helstrom_optimum(uint64_t support) {
  if (support == 0) throw std::invalid_argument("helstrom_optimum: empty support");
  return 1.0 - 0.5 / static_cast<double>(support);
}

}  // namespace cosetlab::pfc
