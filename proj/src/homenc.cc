#include "cosetlab/homenc.h"

#include <algorithm>
#include <random>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace cosetlab::homenc {

using oracle::Bytes;
using oracle::ByteView;

namespace {

Bytes u16_le(uint16_t v) { return {static_cast<uint8_t>(v), static_cast<uint8_t>(v >> 8)}; }

Bytes pk_from_sk(ByteView sk) { return oracle::keyed_hash(oracle::as_bytes("homenc/pk"), sk, kKeyBytes); }

Bytes mac(ByteView pk_key, ByteView payload, ByteView nonce, uint16_t depth) {
  Bytes d = u16_le(depth);
  Bytes msg = oracle::concat({oracle::as_bytes("homenc/tag"), nonce, d, payload});
  return oracle::keyed_hash(pk_key, msg, kMacBytes);
}

Bytes make_tag(ByteView pk_key, ByteView payload, ByteView nonce, uint16_t depth) {
  Bytes m = mac(pk_key, payload, nonce, depth);
  return oracle::concat({nonce, m});
}

bool tag_ok(ByteView pk_key, const Ciphertext& ct) {
  if (ct.tag.size() != kTagBytes) return false;
  ByteView nonce(ct.tag.data(), kNonceBytes);
  Bytes want = mac(pk_key, ct.payload, nonce, ct.depth);
  return std::equal(want.begin(), want.end(), ct.tag.begin() + kNonceBytes);
}

}  // namespace

Bytes pack_bits(const Bits& b) {
  if (b.size() > kMaxPlaintextBits) throw std::length_error("homenc: plaintext too long");
  Bytes out = u16_le(static_cast<uint16_t>(b.size()));
  out.resize(2 + (b.size() + 7) / 8, 0);
  for (size_t i = 0; i < b.size(); ++i)
    if (b[i] & 1) out[2 + i / 8] |= static_cast<uint8_t>(0x80 >> (i % 8));
  return out;
}

std::optional<Bits> unpack_bits(ByteView p) {
  if (p.size() < 2) return std::nullopt;
  const size_t n = p[0] | (size_t{p[1]} << 8);
  if (p.size() != 2 + (n + 7) / 8) return std::nullopt;
  Bits out(n);
  for (size_t i = 0; i < n; ++i) out[i] = (p[2 + i / 8] >> (7 - i % 8)) & 1;
  // trailing pad bits must be zero so that every plaintext has one encoding
  for (size_t i = n; i < 8 * (p.size() - 2); ++i)
    if ((p[2 + i / 8] >> (7 - i % 8)) & 1) return std::nullopt;
  return out;
}

Bits bytes_to_bits(ByteView b) {
  Bits out;
  out.reserve(8 * b.size());
  for (uint8_t byte : b)
    for (int i = 7; i >= 0; --i) out.push_back((byte >> i) & 1);
  return out;
}

Bytes bits_to_bytes(const Bits& b) {
  if (b.size() % 8) throw std::invalid_argument("homenc: bit length not a multiple of 8");
  Bytes out(b.size() / 8, 0);
  for (size_t i = 0; i < b.size(); ++i)
    if (b[i] & 1) out[i / 8] |= static_cast<uint8_t>(0x80 >> (i % 8));
  return out;
}

std::string Ciphertext::to_json() const {
  nlohmann::json j{{"payload", oracle::to_hex(payload)}, {"tag", oracle::to_hex(tag)},
                   {"depth", depth}};
  return j.dump();
}

Ciphertext Ciphertext::from_json(const std::string& s) {
  auto j = nlohmann::json::parse(s);
  Ciphertext ct;
  ct.payload = oracle::from_hex(j.at("payload").get<std::string>());
  ct.tag = oracle::from_hex(j.at("tag").get<std::string>());
  ct.depth = j.at("depth").get<uint16_t>();
  return ct;
}

Bytes Ciphertext::serialize() const {
  Bytes out;
  const auto n = static_cast<uint32_t>(payload.size());
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<uint8_t>(n >> (8 * i)));
  out.insert(out.end(), payload.begin(), payload.end());
  out.insert(out.end(), tag.begin(), tag.end());
  Bytes d = u16_le(depth);
  out.insert(out.end(), d.begin(), d.end());
  return out;
}

std::optional<Ciphertext> Ciphertext::parse(ByteView b) {
  if (b.size() < 4) return std::nullopt;
  uint32_t n = 0;
  for (int i = 0; i < 4; ++i) n |= uint32_t{b[i]} << (8 * i);
  if (b.size() != 4 + size_t{n} + kTagBytes + 2) return std::nullopt;
  Ciphertext ct;
  ct.payload.assign(b.begin() + 4, b.begin() + 4 + n);
  ct.tag.assign(b.begin() + 4 + n, b.begin() + 4 + n + kTagBytes);
  ct.depth = static_cast<uint16_t>(b[b.size() - 2] | (b[b.size() - 1] << 8));
  return ct;
}

Keys gen(const oracle::Seed& seed, int depth_bound) {
  if (depth_bound < 1 || depth_bound > 0xffff) throw std::invalid_argument("homenc: depth bound");
  Keys k;
  k.sk.key = oracle::keyed_hash(seed, oracle::as_bytes("homenc/sk"), kKeyBytes);
  k.sk.depth_bound = static_cast<uint16_t>(depth_bound);
  k.pk.key = pk_from_sk(k.sk.key);
  k.pk.depth_bound = k.sk.depth_bound;
  return k;
}

Ciphertext enc(const PublicKey& pk, const Bits& x, Rng& rng) {
  Bytes nonce(kNonceBytes);
  std::uniform_int_distribution<int> byte(0, 255);
  for (auto& v : nonce) v = static_cast<uint8_t>(byte(rng));
  Ciphertext ct;
  ct.payload = pack_bits(x);
  ct.depth = 0;
  ct.tag = make_tag(pk.key, ct.payload, nonce, 0);
  return ct;
}

std::optional<Bits> dec(const SecretKey& sk, const Ciphertext& ct) {
  if (!tag_ok(pk_from_sk(sk.key), ct)) return std::nullopt;
  if (ct.depth > sk.depth_bound) return std::nullopt;
  return unpack_bits(ct.payload);
}

Ciphertext eval(const PublicKey& pk, const Ciphertext& ct, const Computation& c) {
  if (!tag_ok(pk.key, ct)) throw std::invalid_argument("homenc: ciphertext tag mismatch");
  auto x = unpack_bits(ct.payload);
  if (!x) throw std::invalid_argument("homenc: malformed payload");
  if (c.depth < 0 || int{ct.depth} + c.depth > pk.depth_bound)
    throw std::length_error("homenc: depth bound exceeded by " + c.label);
  Bits y = c.fn(*x);
  Bytes nonce = oracle::keyed_hash(
      oracle::as_bytes("homenc/nonce"),
      oracle::concat({ByteView(ct.tag.data(), kNonceBytes), oracle::as_bytes(c.description)}),
      kNonceBytes);
  Ciphertext out;
  out.payload = pack_bits(y);
  out.depth = static_cast<uint16_t>(ct.depth + c.depth);
  out.tag = make_tag(pk.key, out.payload, nonce, out.depth);
  return out;
}

std::optional<Bits> read_transparent(const Ciphertext& ct) { return unpack_bits(ct.payload); }

size_t ciphertext_size_bound(size_t plaintext_bits) {
  return 2 + (plaintext_bits + 7) / 8 + kTagBytes + 2;
}

// ---- Boolean circuits ----

Bits BoolCircuit::evaluate(const Bits& x) const {
  if (static_cast<int>(x.size()) != n_inputs) throw std::invalid_argument("BoolCircuit: input length");
  Bits w(x);
  w.reserve(x.size() + gates.size());
  for (const auto& g : gates) {
    const uint8_t a = w.at(g.a) & 1;
    uint8_t v = 0;
    switch (g.kind) {
      case BoolGate::Kind::kAnd: v = a & w.at(g.b); break;
      case BoolGate::Kind::kXor: v = a ^ (w.at(g.b) & 1); break;
      case BoolGate::Kind::kNot: v = a ^ 1; break;
      case BoolGate::Kind::kCopy: v = a; break;
    }
    w.push_back(v);
  }
  Bits out;
  for (int o : outputs) out.push_back(w.at(o));
  return out;
}

int BoolCircuit::depth() const {
  std::vector<int> d(n_inputs, 0);
  int best = 0;
  for (const auto& g : gates) {
    int v = d.at(g.a);
    if (g.kind == BoolGate::Kind::kAnd || g.kind == BoolGate::Kind::kXor) v = std::max(v, d.at(g.b));
    d.push_back(v + 1);
  }
  for (int o : outputs) best = std::max(best, d.at(o));
  return std::max(best, 1);
}

std::string BoolCircuit::describe() const {
  std::ostringstream os;
  os << "bool:" << n_inputs << ":";
  for (const auto& g : gates) os << static_cast<int>(g.kind) << "," << g.a << "," << g.b << ";";
  os << ":";
  for (int o : outputs) os << o << ",";
  return os.str();
}

Computation BoolCircuit::to_computation() const {
  BoolCircuit self = *this;
  return Computation{"bool-circuit", describe(), depth(),
                     [self](const Bits& x) { return self.evaluate(x); }};
}

BoolCircuit identity_circuit(int n) {
  BoolCircuit c;
  c.n_inputs = n;
  for (int i = 0; i < n; ++i) c.outputs.push_back(i);
  return c;
}

BoolCircuit not_circuit(int n) {
  BoolCircuit c;
  c.n_inputs = n;
  for (int i = 0; i < n; ++i) {
    c.gates.push_back({BoolGate::Kind::kNot, i, 0});
    c.outputs.push_back(n + i);
  }
  return c;
}

BoolCircuit adder2_circuit() {
  using K = BoolGate::Kind;
  BoolCircuit c;
  c.n_inputs = 4;  // a1 a0 b1 b0
  c.gates = {{K::kXor, 1, 3},   // 4: s0
             {K::kAnd, 1, 3},   // 5: carry
             {K::kXor, 0, 2},   // 6
             {K::kXor, 6, 5}};  // 7: s1
  c.outputs = {7, 4};
  return c;
}

BoolCircuit random_circuit(int n_inputs, int n_gates, int n_outputs, Rng& rng) {
  if (n_inputs < 1) throw std::invalid_argument("random_circuit: need an input");
  BoolCircuit c;
  c.n_inputs = n_inputs;
  std::uniform_int_distribution<int> kind(0, 3);
  for (int g = 0; g < n_gates; ++g) {
    std::uniform_int_distribution<int> wire(0, n_inputs + g - 1);
    c.gates.push_back({static_cast<BoolGate::Kind>(kind(rng)), wire(rng), wire(rng)});
  }
  std::uniform_int_distribution<int> wire(0, n_inputs + n_gates - 1);
  for (int i = 0; i < n_outputs; ++i) c.outputs.push_back(wire(rng));
  return c;
}

}  // namespace cosetlab::homenc
