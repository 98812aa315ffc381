#include "cosetlab/pvqfhe.h"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <numeric>
#include <set>
#include <stdexcept>

#include "cosetlab/densesim.h"
#include "json.hpp"

namespace cosetlab::pvqfhe {

using oracle::Bytes;
using oracle::ByteView;

namespace {

int arity(const std::string& kind) {
  static const std::map<std::string, int> k{{"h", 1},  {"x", 1},  {"y", 1},  {"z", 1},
                                            {"s", 1},  {"t", 1},  {"cx", 2}, {"cz", 2},
                                            {"swap", 2}, {"ccx", 3}};
  auto it = k.find(kind);
  return it == k.end() ? -1 : it->second;
}

const std::vector<std::string>& kind_codes() {
  static const std::vector<std::string> v{"h", "x", "y", "z", "s", "t", "cx", "cz", "swap", "ccx"};
  return v;
}

void put_u16(Bytes& out, uint16_t v) {
  out.push_back(static_cast<uint8_t>(v));
  out.push_back(static_cast<uint8_t>(v >> 8));
}
void put_u32(Bytes& out, uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<uint8_t>(v >> (8 * i)));
}
void put_u64(Bytes& out, uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<uint8_t>(v >> (8 * i)));
}
void put_vec(Bytes& out, const gf2::Vector& v) {
  out.push_back(static_cast<uint8_t>(v.len()));
  put_u64(out, v.bits());
}
void put_bytes16(Bytes& out, const Bytes& b) {
  put_u16(out, static_cast<uint16_t>(b.size()));
  out.insert(out.end(), b.begin(), b.end());
}

struct Reader {
  ByteView b;
  size_t pos = 0;
  bool ok = true;

  bool need(size_t n) {
    if (!ok || b.size() - pos < n) ok = false;
    return ok;
  }
  uint64_t le(int n) {
    if (!need(n)) return 0;
    uint64_t v = 0;
    for (int i = 0; i < n; ++i) v |= uint64_t{b[pos + i]} << (8 * i);
    pos += n;
    return v;
  }
  uint8_t u8() { return static_cast<uint8_t>(le(1)); }
  gf2::Vector vec() {
    const int len = u8();
    const uint64_t bits = le(8);
    if (len > 64 || (len < 64 && (bits >> len))) ok = false;
    return ok ? gf2::Vector(len, bits) : gf2::Vector();
  }
  Bytes bytes16(size_t max) {
    const size_t n = le(2);
    if (n > max || !need(n)) {
      ok = false;
      return {};
    }
    Bytes out(b.begin() + pos, b.begin() + pos + n);
    pos += n;
    return out;
  }
};

void put_commitment(Bytes& out, const pfc::Commitment& c) {
  put_u64(out, c.vk);
  put_vec(out, c.sigma);
  put_u64(out, c.vk_bar);
}

Bytes encode_pk(const PkOss& pk) {
  Bytes out;
  put_u32(out, static_cast<uint32_t>(pk.size()));
  for (uint64_t v : pk) put_u64(out, v);
  return out;
}

Bytes encode_commitments(const std::vector<pfc::Commitment>& c) {
  Bytes out;
  put_u32(out, static_cast<uint32_t>(c.size()));
  for (const auto& ci : c) put_commitment(out, ci);
  return out;
}

Bytes encode_sigs(const std::vector<gf2::Vector>& s) {
  Bytes out;
  put_u32(out, static_cast<uint32_t>(s.size()));
  for (const auto& v : s) put_vec(out, v);
  return out;
}

Bytes encode_q(const Bytes& q) {
  Bytes out;
  put_u32(out, static_cast<uint32_t>(q.size()));
  out.insert(out.end(), q.begin(), q.end());
  return out;
}

oracle::Seed to_seed(const Bytes& b) {
  oracle::Seed s{};
  std::copy_n(b.begin(), std::min(b.size(), s.size()), s.begin());
  return s;
}

bool has(uint32_t mask, int i) { return (mask >> i) & 1; }

}  // namespace

// ---- circuits ----

void Circuit::validate() const {
  if (n_qubits < 1 || n_qubits > kMaxCircuitQubits) throw std::invalid_argument("circuit: n_qubits out of range");
  if (n_inputs < 0 || n_inputs > n_qubits) throw std::invalid_argument("circuit: n_inputs out of range");
  if (out_qubit < 0 || out_qubit >= n_qubits) throw std::invalid_argument("circuit: out_qubit out of range");
  for (const auto& g : gates) {
    const int a = arity(g.kind);
    if (a < 0) throw std::invalid_argument("circuit: unknown gate " + g.kind);
    if (static_cast<int>(g.targets.size()) != a) throw std::invalid_argument("circuit: arity of " + g.kind);
    std::set<int> seen;
    for (int t : g.targets) {
      if (t < 0 || t >= n_qubits) throw std::invalid_argument("circuit: target out of range");
      if (!seen.insert(t).second) throw std::invalid_argument("circuit: repeated target");
    }
  }
}

double Circuit::prob_one(const Bits& x) const {
  if (static_cast<int>(x.size()) != n_inputs) throw std::invalid_argument("circuit: input length");
  dense::StateVector s(n_qubits);
  for (int i = 0; i < n_inputs; ++i)
    if (x[i] & 1) s.apply_x(i);
  const Complex I(0, 1);
  const Complex Y[2][2] = {{0, -I}, {I, 0}};
  const Complex S[2][2] = {{1, 0}, {0, I}};
  const Complex T[2][2] = {{1, 0}, {0, std::polar(1.0, M_PI / 4)}};
  for (const auto& g : gates) {
    const auto& q = g.targets;
    if (g.kind == "h") s.apply_h(q[0]);
    else if (g.kind == "x") s.apply_x(q[0]);
    else if (g.kind == "y") s.apply_1q(q[0], Y);
    else if (g.kind == "z") s.apply_z(q[0]);
    else if (g.kind == "s") s.apply_1q(q[0], S);
    else if (g.kind == "t") s.apply_1q(q[0], T);
    else if (g.kind == "cx") s.apply_cx(q[0], q[1]);
    else if (g.kind == "cz") s.apply_cz(q[0], q[1]);
    else if (g.kind == "swap") s.apply_swap(q[0], q[1]);
    else if (g.kind == "ccx") s.apply_ccx(q[0], q[1], q[2]);
    else throw std::invalid_argument("circuit: unknown gate " + g.kind);
  }
  const auto p = s.probabilities();
  const uint64_t mask = uint64_t{1} << (n_qubits - 1 - out_qubit);
  double one = 0;
  for (uint64_t i = 0; i < p.size(); ++i)
    if (i & mask) one += p[i];
  return one;
}

int Circuit::evaluate(const Bits& x) const {
  const double p = prob_one(x);
  if (p >= 1 - kPseudoMargin) return 1;
  if (p <= kPseudoMargin) return 0;
  throw std::domain_error("circuit: output not pseudo-deterministic (p1 = " + std::to_string(p) + ")");
}

void Circuit::check_pseudo_deterministic() const {
  for (uint64_t v = 0; v < (uint64_t{1} << n_inputs); ++v) {
    Bits x(n_inputs);
    for (int i = 0; i < n_inputs; ++i) x[i] = (v >> (n_inputs - 1 - i)) & 1;
    evaluate(x);
  }
}

int Circuit::depth() const {
  std::vector<int> layer(n_qubits, 0);
  int d = 0;
  for (const auto& g : gates) {
    int l = 0;
    for (int t : g.targets) l = std::max(l, layer.at(t));
    for (int t : g.targets) layer[t] = l + 1;
    d = std::max(d, l + 1);
  }
  return std::max(d, 1);
}

Circuit Circuit::from_json(const std::string& text) {
  auto j = nlohmann::json::parse(text);
  Circuit c;
  c.n_qubits = j.at("n_qubits").get<int>();
  c.out_qubit = j.at("out_qubit").get<int>();
  c.n_inputs = j.value("n_inputs", c.n_qubits - 1);
  for (const auto& g : j.at("gates")) c.gates.push_back({g.at("kind").get<std::string>(), g.at("targets").get<std::vector<int>>()});
  c.validate();
  c.check_pseudo_deterministic();
  return c;
}

std::string Circuit::to_json() const {
  nlohmann::json gs = nlohmann::json::array();
  for (const auto& g : gates) gs.push_back({{"kind", g.kind}, {"targets", g.targets}});
  nlohmann::json j{{"gates", gs}, {"n_qubits", n_qubits}, {"n_inputs", n_inputs}, {"out_qubit", out_qubit}};
  return j.dump();
}

Bytes Circuit::serialize() const {
  Bytes out{'Q', static_cast<uint8_t>(n_qubits), static_cast<uint8_t>(n_inputs), static_cast<uint8_t>(out_qubit)};
  put_u16(out, static_cast<uint16_t>(gates.size()));
  const auto& codes = kind_codes();
  for (const auto& g : gates) {
    out.push_back(static_cast<uint8_t>(std::find(codes.begin(), codes.end(), g.kind) - codes.begin()));
    for (int t : g.targets) out.push_back(static_cast<uint8_t>(t));
  }
  return out;
}

std::optional<Circuit> Circuit::parse(ByteView b) {
  Reader r{b};
  if (r.u8() != 'Q') return std::nullopt;
  Circuit c;
  c.n_qubits = r.u8();
  c.n_inputs = r.u8();
  c.out_qubit = r.u8();
  const size_t n = r.le(2);
  const auto& codes = kind_codes();
  for (size_t i = 0; i < n && r.ok; ++i) {
    const uint8_t code = r.u8();
    if (code >= codes.size()) return std::nullopt;
    Gate g{codes[code], {}};
    for (int a = 0; a < arity(g.kind); ++a) g.targets.push_back(r.u8());
    c.gates.push_back(std::move(g));
  }
  if (!r.ok || r.pos != b.size()) return std::nullopt;
  try {
    c.validate();
  } catch (const std::invalid_argument&) {
    return std::nullopt;
  }
  return c;
}

Circuit and_circuit() { return Circuit{3, 2, {{"ccx", {0, 1, 2}}}, 2}; }

Circuit parity_circuit() {
  return Circuit{3, 2, {{"h", {2}}, {"cz", {0, 2}}, {"cz", {1, 2}}, {"h", {2}}}, 2};
}

Circuit constant0_circuit() { return Circuit{3, 2, {{"h", {2}}, {"h", {2}}}, 2}; }

std::vector<std::pair<std::string, Circuit>> circuit_corpus() {
  return {{"and", and_circuit()}, {"parity", parity_circuit()}, {"constant0", constant0_circuit()}};
}

Program circuit_program(const Circuit& c) {
  c.validate();
  c.check_pseudo_deterministic();
  return Program{c.serialize(), c.depth(), [c](const Bits& x) { return c.evaluate(x); }};
}

// ---- TransparentPriv ----

TransparentPriv::TransparentPriv(homenc::PublicKey pk, int max_grind)
    : pk_(std::move(pk)), max_grind_(max_grind) {}

uint32_t TransparentPriv::standard_positions(const Bytes& sp) const {
  Rng rng = oracle::rng_from_seed(oracle::derive_seed(to_seed(sp), "tpriv/S"));
  std::vector<int> idx(kEll);
  std::iota(idx.begin(), idx.end(), 0);
  std::shuffle(idx.begin(), idx.end(), rng);
  uint32_t s = 0;
  for (int i = 0; i < kEll / 2; ++i) s |= uint32_t{1} << idx[i];
  return s;
}

Bytes TransparentPriv::par_ver_gen(const homenc::Ciphertext& ct, const Bytes& q, const Bytes& sp,
                                   int i) const {
  return oracle::keyed_hash(
      sp, oracle::concat({oracle::as_bytes("tpriv/pp"), oracle::u64_le(i), ct.serialize(), encode_q(q)}), 16);
}

std::vector<std::pair<Complex, Complex>> TransparentPriv::prepare(const homenc::Ciphertext& ct,
                                                                  const Program& q) const {
  auto x = homenc::read_transparent(ct);
  if (!x) throw std::invalid_argument("tpriv: malformed ciphertext");
  const int b = q.run(*x);
  const std::pair<Complex, Complex> amp = b ? std::pair<Complex, Complex>{0, 1} : std::pair<Complex, Complex>{1, 0};
  return std::vector<std::pair<Complex, Complex>>(kEll, amp);
}

PrivScheme::YResult TransparentPriv::measure_y(const std::vector<Bytes>& pp, const homenc::Ciphertext& ct,
                                               const Bytes& q, const RandomOracle& h) const {
  Bytes base = oracle::concat({ct.serialize(), encode_q(q)});
  for (const auto& p : pp) base.insert(base.end(), p.begin(), p.end());
  for (int a = 0; a < max_grind_; ++a) {
    Bytes y = oracle::keyed_hash(oracle::as_bytes("tpriv/y"), oracle::concat({base, oracle::u64_le(a)}), 16);
    if (h(y) != 0) return {y, a + 1};
  }
  throw std::runtime_error("tpriv: no y with nonempty T");
}

Bytes TransparentPriv::measure_z(const std::vector<Bytes>& pp, const Bytes& y, uint32_t t) const {
  Bytes key;
  for (const auto& p : pp) key.insert(key.end(), p.begin(), p.end());
  Bytes tb;
  put_u32(tb, t);
  return oracle::keyed_hash(key, oracle::concat({oracle::as_bytes("tpriv/z"), y, tb}), 16);
}

std::optional<homenc::Ciphertext> TransparentPriv::ver(const Bytes& sp, const homenc::Ciphertext& ct,
                                                       const Bytes& q, const Marks& m, const Bytes& y,
                                                       const Bytes& z, const RandomOracle& h) const {
  if (static_cast<int>(m.size()) != kEll) return std::nullopt;
  std::vector<Bytes> pp;
  for (int i = 0; i < kEll; ++i) pp.push_back(par_ver_gen(ct, q, sp, i));
  const uint32_t t = h(y);
  if (t == 0 || z != measure_z(pp, y, t)) return std::nullopt;
  int b = -1;
  for (int i = 0; i < kEll; ++i) {
    if (!has(t, i)) continue;
    if (m[i] != 0 && m[i] != 1) return std::nullopt;
    if (b >= 0 && m[i] != b) return std::nullopt;
    b = m[i];
  }
  const homenc::Computation konst{"const", "tpriv/const/" + std::to_string(b), 1,
                                  [b](const Bits&) { return Bits{static_cast<uint8_t>(b)}; }};
  try {
    return homenc::eval(pk_, ct, konst);
  } catch (const std::exception&) {
    return std::nullopt;
  }
}

std::optional<int> TransparentPriv::dec(const homenc::SecretKey& sk, const homenc::Ciphertext& ct) const {
  auto bits = homenc::dec(sk, ct);
  if (!bits || bits->size() != 1) return std::nullopt;
  return (*bits)[0];
}

bool TransparentPriv::in_M(int b, const Marks& m, uint32_t s, uint32_t t) {
  for (size_t i = 0; i < m.size(); ++i)
    if (has(s & t, static_cast<int>(i)) && m[i] != b) return false;
  return true;
}

// ---- proofs ----

Bytes Proof::serialize() const {
  Bytes out;
  out.push_back(static_cast<uint8_t>(pk_oss.size()));
  for (uint64_t v : pk_oss) put_u64(out, v);
  out.push_back(static_cast<uint8_t>(c.size()));
  for (const auto& ci : c) put_commitment(out, ci);
  for (const auto& s : sigma) put_vec(out, s);
  for (const auto& d : u) {
    out.push_back(d.basis == pfc::Basis::kZ ? 0 : 1);
    out.push_back(static_cast<uint8_t>(d.b));
    put_vec(out, d.u);
  }
  put_bytes16(out, y);
  put_bytes16(out, z);
  return out;
}

std::optional<Proof> Proof::parse(ByteView b) {
  Reader r{b};
  Proof p;
  const int big_l = r.u8();
  for (int j = 0; j < big_l && r.ok; ++j) p.pk_oss.push_back(r.le(8));
  const int ell = r.u8();
  for (int i = 0; i < ell && r.ok; ++i) {
    pfc::Commitment c;
    c.vk = r.le(8);
    c.sigma = r.vec();
    c.vk_bar = r.le(8);
    p.c.push_back(c);
  }
  for (int j = 0; j < big_l && r.ok; ++j) p.sigma.push_back(r.vec());
  for (int i = 0; i < ell && r.ok; ++i) {
    pfc::Opening d;
    const uint8_t basis = r.u8();
    if (basis > 1) return std::nullopt;
    d.basis = basis ? pfc::Basis::kX : pfc::Basis::kZ;
    d.b = r.u8();
    d.u = r.vec();
    p.u.push_back(d);
  }
  p.y = r.bytes16(64);
  p.z = r.bytes16(64);
  if (!r.ok || r.pos != b.size()) return std::nullopt;
  return p;
}

bool operator==(const Proof& a, const Proof& b) {
  auto op_eq = [](const pfc::Opening& x, const pfc::Opening& y) {
    return x.basis == y.basis && x.b == y.b && x.u == y.u;
  };
  return a.pk_oss == b.pk_oss && a.c == b.c && a.sigma == b.sigma && a.y == b.y && a.z == b.z &&
         std::equal(a.u.begin(), a.u.end(), b.u.begin(), b.u.end(), op_eq);
}

size_t proof_size_bound(const Params& p, int ell) {
  const size_t vec = 9, big_l = p.oss_tokens;
  return 1 + 8 * big_l + 1 + ell * (8 + vec + 8) + big_l * vec + ell * (2 + vec) + 2 * (2 + 64);
}

BasisSplit basis_split(uint32_t t, uint32_t s, int ell) {
  const uint32_t all = ell >= 32 ? ~uint32_t{0} : (uint32_t{1} << ell) - 1;
  t &= all;
  return {t, all & ~t & ~s, all & ~t & s};
}

// ---- the compiler ----

void Params::validate() const {
  if (oss_tokens < 1 || oss_tokens > 64) throw std::invalid_argument("pvqfhe: oss_tokens out of range");
  if (depth_bound < 2) throw std::invalid_argument("pvqfhe: depth bound too small");
  oss.validate();
  pfc.validate();
}

struct PublicParams::Impl {
  Impl(const Params& p, homenc::PublicKey pk, const oracle::Seed& seed)
      : params(p),
        priv(std::make_unique<TransparentPriv>(pk)),
        k_pfc(oracle::derive_seed(seed, "pvqfhe/k_pfc")),
        k_priv(oracle::derive_seed(seed, "pvqfhe/k_priv")),
        k_h(oracle::derive_seed(seed, "pvqfhe/k_h")),
        o(oss::OssOracles::setup(p.oss, oracle::derive_seed(seed, "pvqfhe/oss"))) {}

  Params params;
  std::unique_ptr<PrivScheme> priv;
  oracle::Seed k_pfc, k_priv, k_h;
  oss::OssOracles o;

  mutable std::mutex mu;
  mutable std::map<oracle::Seed, std::unique_ptr<std::pair<pfc::CommitKey, pfc::DecodeKey>>> pfc_cache;

  const std::pair<pfc::CommitKey, pfc::DecodeKey>& pfc_keys(const PkOss& pk, int i) const {
    const oracle::Seed s =
        to_seed(oracle::keyed_hash(k_pfc, oracle::concat({encode_pk(pk), oracle::u64_le(i)}), 32));
    std::lock_guard<std::mutex> lock(mu);
    auto& slot = pfc_cache[s];
    if (!slot) slot = std::make_unique<std::pair<pfc::CommitKey, pfc::DecodeKey>>(pfc::gen(params.pfc, s));
    return *slot;
  }

  bool oss_ok(const homenc::Ciphertext& ct, const Bytes& q, const PkOss& pk,
              const std::vector<pfc::Commitment>& c, const std::vector<gf2::Vector>& sigma) const {
    const size_t big_l = params.oss_tokens;
    if (pk.size() != big_l || sigma.size() != big_l) return false;
    if (static_cast<int>(c.size()) != priv->ell()) return false;
    const auto d = signed_digest(ct, q, c, params.oss_tokens);
    for (size_t j = 0; j < big_l; ++j)
      if (!oss::verify(o, pk[j], d[j], sigma[j])) return false;
    return true;
  }

  Bytes sp(const homenc::Ciphertext& ct, const Bytes& q, const PkOss& pk,
           const std::vector<pfc::Commitment>& c, const std::vector<gf2::Vector>& sigma) const {
    Bytes msg = oracle::concat({ct.serialize(), encode_q(q), encode_pk(pk), encode_commitments(c), encode_sigs(sigma)});
    return oracle::keyed_hash(k_priv, msg, 32);
  }

  uint32_t h(const Bytes& y) const {
    uint32_t t = 0;
    for (int i = 0; i < priv->ell(); ++i)
      if (oracle::keyed_hash(k_h, oracle::concat({oracle::u64_le(i), y}), 1)[0] & 1) t |= uint32_t{1} << i;
    return t;
  }
};

const Params& PublicParams::params() const { return impl_->params; }
const PrivScheme& PublicParams::priv() const { return *impl_->priv; }
int PublicParams::ell() const { return impl_->priv->ell(); }
const oss::OssOracles& PublicParams::oss() const { return impl_->o; }

const pfc::CommitKey& PublicParams::ck(const PkOss& pk, int i) const { return impl_->pfc_keys(pk, i).first; }

std::optional<Bytes> PublicParams::priv_gen(const homenc::Ciphertext& ct, const Bytes& q, const PkOss& pk,
                                            const std::vector<pfc::Commitment>& c,
                                            const std::vector<gf2::Vector>& sigma, int i) const {
  if (i < 0 || i >= ell()) return std::nullopt;
  if (!impl_->oss_ok(ct, q, pk, c, sigma)) return std::nullopt;
  return impl_->priv->par_ver_gen(ct, q, impl_->sp(ct, q, pk, c, sigma), i);
}

uint32_t PublicParams::h(const Bytes& y) const { return impl_->h(y); }

std::optional<homenc::Ciphertext> PublicParams::priv_ver(const homenc::Ciphertext& ct, const Bytes& q,
                                                         const Proof& pi, PrivVerTrace* trace) const {
  PrivVerTrace local;
  PrivVerTrace& tr = trace ? *trace : local;
  tr = PrivVerTrace{};
  auto reject = [&](const char* stage) -> std::optional<homenc::Ciphertext> {
    tr.stage = stage;
    return std::nullopt;
  };
  const int ell = this->ell();
  if (!impl_->oss_ok(ct, q, pi.pk_oss, pi.c, pi.sigma)) return reject("signature");
  if (static_cast<int>(pi.u.size()) != ell) return reject("shape");
  const Bytes sp = impl_->sp(ct, q, pi.pk_oss, pi.c, pi.sigma);
  tr.s = impl_->priv->standard_positions(sp);
  tr.t = impl_->h(pi.y);
  const BasisSplit split = basis_split(tr.t, tr.s, ell);
  tr.m.assign(ell, kStar);
  for (int i = 0; i < ell; ++i) {
    if (has(split.star_positions, i)) continue;
    const auto& dk = impl_->pfc_keys(pi.pk_oss, i).second;
    const auto mi = has(split.z_positions, i) ? pfc::dec_z(dk, pi.c[i], pi.u[i]) : pfc::dec_x(dk, pi.c[i], pi.u[i]);
    if (!mi) return reject(has(split.z_positions, i) ? "dec_z" : "dec_x");
    tr.m[i] = static_cast<int8_t>(*mi);
  }
  auto h = [this](const Bytes& y) { return impl_->h(y); };
  auto out = impl_->priv->ver(sp, ct, q, tr.m, pi.y, pi.z, h);
  tr.stage = out ? "ok" : "priv_ver";
  return out;
}

Setup gen(const Params& params, const oracle::Seed& seed) {
  params.validate();
  homenc::Keys k = homenc::gen(oracle::derive_seed(seed, "pvqfhe/priv"), params.depth_bound);
  auto impl = std::make_shared<PublicParams::Impl>(params, k.pk, seed);
  return Setup{k.pk, k.sk, std::shared_ptr<const PublicParams>(new PublicParams(impl))};
}

homenc::Ciphertext enc(const homenc::PublicKey& pk, const Bits& x, Rng& rng) { return homenc::enc(pk, x, rng); }

std::vector<int> signed_digest(const homenc::Ciphertext& ct, const Bytes& q,
                               const std::vector<pfc::Commitment>& c, int bits) {
  Bytes h = oracle::keyed_hash(oracle::as_bytes("pvqfhe/digest"),
                               oracle::concat({ct.serialize(), encode_q(q), encode_commitments(c)}),
                               (bits + 7) / 8);
  std::vector<int> out(bits);
  for (int j = 0; j < bits; ++j) out[j] = (h[j / 8] >> (7 - j % 8)) & 1;
  return out;
}

EvalResult eval(const PublicParams& pp, const homenc::Ciphertext& ct, const Program& q, Rng& rng) {
  const Params& prm = pp.params();
  if (q.depth + 1 > prm.depth_bound) throw std::length_error("pvqfhe eval: circuit exceeds depth bound");
  const int ell = pp.ell();
  const auto amps = pp.priv().prepare(ct, q);
  EvalResult res;
  for (int attempt = 0;; ++attempt) {
    if (attempt > 16) throw std::runtime_error("pvqfhe eval: signing keeps aborting");
    std::vector<oss::OssToken> tokens;
    PkOss pk;
    for (int j = 0; j < prm.oss_tokens; ++j) {
      tokens.push_back(oss::gen(pp.oss(), rng));
      pk.push_back(tokens.back().vk());
    }
    std::vector<cosets::CosetQubitState> reg;
    std::vector<pfc::Commitment> c;
    for (int i = 0; i < ell; ++i) {
      auto cr = pfc::commit(pp.ck(pk, i), amps[i].first, amps[i].second, rng);
      reg.push_back(std::move(cr.state));
      c.push_back(cr.c);
    }
    const auto d = signed_digest(ct, q.description, c, prm.oss_tokens);
    std::vector<gf2::Vector> sigma;
    bool aborted = false;
    for (int j = 0; j < prm.oss_tokens; ++j) {
      auto s = oss::sign(pp.oss(), std::move(tokens[j]), d[j], rng);
      if (!s.ok()) aborted = true;
      sigma.push_back(s.sigma);
    }
    if (aborted) {
      ++res.sign_restarts;
      continue;
    }
    std::vector<Bytes> ppv;
    for (int i = 0; i < ell; ++i) {
      auto p = pp.priv_gen(ct, q.description, pk, c, sigma, i);
      if (!p) throw std::logic_error("pvqfhe eval: PrivGen rejected an honest signature");
      ppv.push_back(*p);
    }
    auto h = [&pp](const Bytes& y) { return pp.h(y); };
    auto yr = pp.priv().measure_y(ppv, ct, q.description, h);
    res.grind_attempts = yr.attempts;
    const uint32_t t = pp.h(yr.y);
    Bytes z = pp.priv().measure_z(ppv, yr.y, t);
    std::vector<pfc::Opening> u;
    for (int i = 0; i < ell; ++i) u.push_back(has(t, i) ? pfc::open_z(reg[i], rng) : pfc::open_x(reg[i], rng));
    res.pi = Proof{pk, c, sigma, u, yr.y, z};
    res.ct_tilde = pp.priv_ver(ct, q.description, res.pi);
    return res;
  }
}

bool verify(const PublicParams& pp, const homenc::Ciphertext& ct, const Bytes& q,
            const homenc::Ciphertext& ct_tilde, const Proof& pi) {
  auto r = pp.priv_ver(ct, q, pi);
  return r.has_value() && *r == ct_tilde;
}

std::optional<int> dec(const PublicParams& pp, const homenc::SecretKey& sk, const homenc::Ciphertext& ct) {
  return pp.priv().dec(sk, ct);
}

}  // namespace cosetlab::pvqfhe
