#include "cosetlab/obfuscate.h"

#include <random>
#include <stdexcept>

namespace cosetlab::obf {

using oracle::Bytes;
using oracle::ByteView;

// ---- Turing machines ----

void TuringMachine::validate() const {
  if (states < 1 || states > kMaxStates) throw std::invalid_argument("tm: states out of range");
  if (in_bits < 1 || in_bits > kMaxInputBits) throw std::invalid_argument("tm: in_bits out of range");
  if (out_bits < 1 || out_bits > kMaxInputBits) throw std::invalid_argument("tm: out_bits out of range");
  if (max_steps < 1 || max_steps > kMaxSteps) throw std::invalid_argument("tm: max_steps out of range");
  if (table.size() != static_cast<size_t>(states) * 3) throw std::invalid_argument("tm: table size");
  for (const auto& t : table) {
    if (t.write > kBlank || t.move < -1 || t.move > 1) throw std::invalid_argument("tm: bad transition");
    if (t.next != kHalt && t.next >= states) throw std::invalid_argument("tm: bad next state");
  }
}

Bits TuringMachine::run(const Bits& x) const {
  if (static_cast<int>(x.size()) != in_bits) throw std::invalid_argument("tm: input length");
  std::vector<uint8_t> tape(x.begin(), x.end());
  tape.resize(in_bits + max_steps + out_bits + 1, kBlank);
  size_t head = 0;
  int state = 0;
  for (int step = 0; step < max_steps; ++step) {
    const Transition& t = table[state * 3 + tape[head]];
    tape[head] = t.write;
    if (t.move < 0 && head > 0) --head;
    if (t.move > 0) ++head;
    if (t.next == kHalt) break;
    state = t.next;
  }
  Bits out(out_bits);
  for (int i = 0; i < out_bits; ++i) out[i] = tape[head + i] == 1;
  return out;
}

Bytes TuringMachine::serialize() const {
  Bytes out{static_cast<uint8_t>(states), static_cast<uint8_t>(in_bits), static_cast<uint8_t>(out_bits),
            static_cast<uint8_t>(max_steps)};
  for (const auto& t : table) {
    out.push_back(t.write);
    out.push_back(static_cast<uint8_t>(t.move + 1));
    out.push_back(t.next);
  }
  return out;
}

std::optional<TuringMachine> TuringMachine::parse(ByteView b) {
  if (b.size() < 4) return std::nullopt;
  TuringMachine m;
  m.states = b[0];
  m.in_bits = b[1];
  m.out_bits = b[2];
  m.max_steps = b[3];
  if (b.size() != 4 + 9 * size_t{b[0]}) return std::nullopt;
  for (size_t i = 4; i < b.size(); i += 3)
    m.table.push_back({b[i], static_cast<int8_t>(int{b[i + 1]} - 1), b[i + 2]});
  try {
    m.validate();
  } catch (const std::invalid_argument&) {
    return std::nullopt;
  }
  return m;
}

TuringMachine identity_program(int in_bits, int out_bits) {
  TuringMachine m{1, in_bits, out_bits, 1, {}};
  for (uint8_t s = 0; s < 3; ++s) m.table.push_back({s, 0, kHalt});
  m.validate();
  return m;
}

TuringMachine parity_program(int in_bits) {
  // state = parity so far; each cell is overwritten with the running parity
  TuringMachine m{2, in_bits, 1, in_bits + 1, {}};
  for (uint8_t p = 0; p < 2; ++p) {
    for (uint8_t s = 0; s < 2; ++s) {
      const uint8_t n = p ^ s;
      m.table.push_back({n, 1, n});
    }
    m.table.push_back({kBlank, -1, kHalt});
  }
  m.validate();
  return m;
}

TuringMachine random_program(int in_bits, int out_bits, int states, Rng& rng) {
  TuringMachine m{states, in_bits, out_bits, 1 + static_cast<int>(rng() % kMaxSteps), {}};
  std::uniform_int_distribution<int> sym(0, 2), mv(-1, 1), nx(-1, states - 1);
  for (int i = 0; i < states * 3; ++i) {
    const int n = nx(rng);
    m.table.push_back({static_cast<uint8_t>(sym(rng)), static_cast<int8_t>(mv(rng)),
                       n < 0 ? kHalt : static_cast<uint8_t>(n)});
  }
  m.validate();
  return m;
}

namespace {

std::string bit_string(const Bits& x) {
  std::string s;
  for (auto b : x) s.push_back(b ? '1' : '0');
  return s;
}

void put_u32(Bytes& out, uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<uint8_t>(v >> (8 * i)));
}

Bytes make_instance(const homenc::Ciphertext& ct, const homenc::Ciphertext& ct_prime) {
  Bytes a = ct.serialize(), b = ct_prime.serialize();
  Bytes out;
  put_u32(out, static_cast<uint32_t>(a.size()));
  out.insert(out.end(), a.begin(), a.end());
  out.insert(out.end(), b.begin(), b.end());
  return out;
}

std::optional<std::pair<homenc::Ciphertext, homenc::Ciphertext>> split_instance(ByteView b) {
  if (b.size() < 4) return std::nullopt;
  const size_t n = b[0] | (b[1] << 8) | (b[2] << 16) | (size_t{b[3]} << 24);
  if (b.size() < 4 + n) return std::nullopt;
  auto a = homenc::Ciphertext::parse(b.subspan(4, n));
  auto c = homenc::Ciphertext::parse(b.subspan(4 + n));
  if (!a || !c) return std::nullopt;
  return std::make_pair(*a, *c);
}

}  // namespace

homenc::Computation universal_tm(const Bits& x) {
  return homenc::Computation{"U_x", "U_tm/" + bit_string(x), kMaxSteps, [x](const Bits& plain) {
                               if (plain.size() % 8) return Bits{};
                               auto m = TuringMachine::parse(homenc::bits_to_bytes(plain));
                               if (!m || m->in_bits != static_cast<int>(x.size())) return Bits{};
                               return m->run(x);
                             }};
}

// ---- SObf ----

struct SObfOracle::Impl {
  homenc::SecretKey sk;
  homenc::Ciphertext ct;
  std::optional<snark::Hash> h;
  std::shared_ptr<const snark::Pcp> pcp;
  GuardStats stats;
};

std::optional<Bits> SObfOracle::operator()(const homenc::Ciphertext& ct_prime, const snark::SnarkProof& pi) const {
  ++impl_->stats.calls;
  if (!snark::verify(*impl_->h, *impl_->pcp, make_instance(impl_->ct, ct_prime), pi)) return std::nullopt;
  ++impl_->stats.passes;
  ++impl_->stats.decryptions;
  return homenc::dec(impl_->sk, ct_prime);
}

const GuardStats& SObfOracle::stats() const { return impl_->stats; }

size_t ObfuscatedProgram::size_bytes() const {
  // O[P]: sk, H key, pk and the PCP shape (m, copies) on top of pp = ct
  return pp_.byte_size() + homenc::kKeyBytes + 32 + pk_.key.size() + 2 + 8;
}

Bytes ObfuscatedProgram::instance(const homenc::Ciphertext& ct_prime) const { return make_instance(pp_, ct_prime); }

ObfuscatedProgram sobf_obfuscate(const TuringMachine& p, const oracle::Seed& seed, const SObfOptions& opt) {
  p.validate();
  homenc::Keys k = homenc::gen(oracle::derive_seed(seed, "sobf/fhe"), opt.depth_bound);
  Rng rng = oracle::rng_from_seed(oracle::derive_seed(seed, "sobf/enc"));
  ObfuscatedProgram o;
  o.pk_ = k.pk;
  o.in_bits_ = p.in_bits;
  o.pp_ = homenc::enc(k.pk, homenc::bytes_to_bits(p.serialize()), rng);
  o.h_ = snark::Hash::random(oracle::derive_seed(seed, "sobf/H"));
  const homenc::PublicKey pk = k.pk;
  o.pcp_ = std::make_shared<snark::CopyReadPcp>(
      "fhe-eval", p.in_bits, [pk](const snark::Instance& inst, const snark::Witness& w) {
        auto cts = split_instance(inst);
        if (!cts) return false;
        try {
          return homenc::eval(pk, cts->first, universal_tm(w)) == cts->second;
        } catch (const std::exception&) {
          return false;
        }
      });
  auto impl = std::make_shared<SObfOracle::Impl>();
  impl->sk = k.sk;
  impl->ct = o.pp_;
  impl->h = o.h_;
  impl->pcp = o.pcp_;
  o.oracle_.impl_ = impl;
  return o;
}

size_t sobf_size_bound(size_t program_bytes) { return 256 + 2 * program_bytes; }

Tamper parse_tamper(const std::string& s) {
  if (s == "none") return Tamper::kNone;
  if (s == "ciphertext") return Tamper::kCiphertext;
  if (s == "proof") return Tamper::kProof;
  if (s == "opening") return Tamper::kOpening;
  if (s == "signature") return Tamper::kSignature;
  throw std::invalid_argument("unknown tamper mode: " + s);
}

std::string tamper_name(Tamper t) {
  switch (t) {
    case Tamper::kNone: return "none";
    case Tamper::kCiphertext: return "ciphertext";
    case Tamper::kProof: return "proof";
    case Tamper::kOpening: return "opening";
    case Tamper::kSignature: return "signature";
  }
  return "?";
}

SObfEvalResult sobf_eval(const ObfuscatedProgram& o, const Bits& x, Tamper t) {
  SObfEvalResult r;
  try {
    r.ct_prime = homenc::eval(o.pk(), o.pp(), universal_tm(x));
  } catch (const std::exception&) {
    r.stage = "eval";
    return r;
  }
  try {
    r.pi = snark::prove(o.hash(), o.pcp(), o.instance(r.ct_prime), x);
  } catch (const std::exception&) {
    r.stage = "prove";
    return r;
  }
  if (t == Tamper::kCiphertext) r.ct_prime.payload.back() ^= 1;
  if (t == Tamper::kProof && !r.pi.entries.empty()) {
    auto& e = r.pi.entries.front();
    if (!e.path.empty()) e.path.front()[0] ^= 1;
    else r.pi.rt[0] ^= 1;
  }
  if (t == Tamper::kOpening || t == Tamper::kSignature)
    throw std::invalid_argument("sobf_eval: tamper mode only applies to the quantum pipeline");
  r.y = o.oracle()(r.ct_prime, r.pi);
  r.stage = r.y ? "ok" : "oracle";
  return r;
}

// ---- quantum obfuscation ----

pvqfhe::Program universal_circuit(const Bits& x) {
  Bytes desc = oracle::as_bytes("U_x/");
  for (auto b : x) desc.push_back(b ? '1' : '0');
  return pvqfhe::Program{desc, kMaxUniversalGates, [x](const Bits& plain) {
                           if (plain.size() % 8) throw std::invalid_argument("U_x: plaintext not a circuit");
                           auto c = pvqfhe::Circuit::parse(homenc::bits_to_bytes(plain));
                           if (!c || c->n_inputs != static_cast<int>(x.size()) ||
                               static_cast<int>(c->gates.size()) > kMaxUniversalGates)
                             throw std::invalid_argument("U_x: plaintext not a circuit");
                           return c->evaluate(x);
                         }};
}

struct GuardedDecryptor::Impl {
  homenc::SecretKey sk;
  homenc::Ciphertext ct;
  std::shared_ptr<const pvqfhe::PublicParams> pp;
  GuardStats stats;
};

std::optional<int> GuardedDecryptor::operator()(const Bits& x, const homenc::Ciphertext& ct_prime,
                                                const pvqfhe::Proof& pi, std::string* stage) const {
  ++impl_->stats.calls;
  pvqfhe::PrivVerTrace tr;
  const auto q = universal_circuit(x).description;
  auto expect = impl_->pp->priv_ver(impl_->ct, q, pi, &tr);
  if (!expect || !(*expect == ct_prime)) {
    if (stage) *stage = expect ? "ct_mismatch" : tr.stage;
    return std::nullopt;
  }
  ++impl_->stats.passes;
  ++impl_->stats.decryptions;
  if (stage) *stage = "ok";
  return pvqfhe::dec(*impl_->pp, impl_->sk, ct_prime);
}

const GuardStats& GuardedDecryptor::stats() const { return impl_->stats; }

size_t ObfuscatedQuantumProgram::size_bytes() const {
  // PP: OSS, PFC, Priv and H keys; DK~: sk and the verification keys it shares with PP
  return ct_.byte_size() + 4 * 32 + homenc::kKeyBytes + 32;
}

ObfuscatedQuantumProgram qobf_obfuscate(const pvqfhe::Circuit& c, const oracle::Seed& seed) {
  c.validate();
  c.check_pseudo_deterministic();
  if (static_cast<int>(c.gates.size()) > kMaxUniversalGates) throw std::invalid_argument("qobf: circuit too large");
  pvqfhe::Params params;
  params.depth_bound = kMaxUniversalGates + 2;
  pvqfhe::Setup s = pvqfhe::gen(params, oracle::derive_seed(seed, "qobf/pvqfhe"));
  Rng rng = oracle::rng_from_seed(oracle::derive_seed(seed, "qobf/enc"));
  ObfuscatedQuantumProgram o;
  o.ct_ = pvqfhe::enc(s.pk, homenc::bytes_to_bits(c.serialize()), rng);
  o.pp_ = s.pp;
  o.n_inputs_ = c.n_inputs;
  auto impl = std::make_shared<GuardedDecryptor::Impl>();
  impl->sk = s.sk;
  impl->ct = o.ct_;
  impl->pp = s.pp;
  o.dk_.impl_ = impl;
  return o;
}

size_t qobf_size_bound(size_t circuit_bytes) { return 512 + 2 * circuit_bytes; }

QObfEvalResult qobf_eval(const ObfuscatedQuantumProgram& o, const Bits& x, Rng& rng, Tamper t) {
  QObfEvalResult r;
  pvqfhe::EvalResult e;
  try {
    e = pvqfhe::eval(o.pp(), o.ct(), universal_circuit(x), rng);
  } catch (const std::exception&) {
    r.stage = "eval";
    return r;
  }
  r.sign_restarts = e.sign_restarts;
  if (!e.ct_tilde) {
    r.stage = "eval";
    return r;
  }
  homenc::Ciphertext ct_prime = *e.ct_tilde;
  pvqfhe::Proof& pi = e.pi;
  switch (t) {
    case Tamper::kNone: break;
    case Tamper::kCiphertext: ct_prime.payload.back() ^= 0x80; break;
    case Tamper::kProof: pi.z[0] ^= 1; break;
    case Tamper::kOpening:
      for (auto& u : pi.u)
        if (u.basis == pfc::Basis::kZ) {
          u.u.flip(0);
          break;
        }
      break;
    case Tamper::kSignature: pi.sigma[0].flip(0); break;
  }
  r.proof_bytes = pi.serialize().size();
  r.bit = o.dk()(x, ct_prime, pi, &r.stage);
  return r;
}

}  // namespace cosetlab::obf
