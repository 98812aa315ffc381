#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "cosetlab/gf2.h"
#include "cosetlab/oracleworld.h"

namespace cosetlab::homenc {

using Bits = std::vector<uint8_t>;  // one bit per byte

inline constexpr size_t kKeyBytes = 32;
inline constexpr size_t kNonceBytes = 16;
inline constexpr size_t kMacBytes = 32;
inline constexpr size_t kTagBytes = kNonceBytes + kMacBytes;
inline constexpr size_t kMaxPlaintextBits = 0xffff;

// Transparent reference scheme: the payload is the plaintext in the clear and
// the tag only authenticates it. Correctness and size behaviour match a real
// leveled FHE; privacy is not provided.
struct PublicKey {
  oracle::Bytes key;  // hash of the secret authentication key
  uint16_t depth_bound = 0;
  friend bool operator==(const PublicKey&, const PublicKey&) = default;
};

struct SecretKey {
  oracle::Bytes key;
  uint16_t depth_bound = 0;
};

struct Keys {
  PublicKey pk;
  SecretKey sk;
};

struct Ciphertext {
  oracle::Bytes payload;  // u16 LE bit count, then bits packed MSB first
  oracle::Bytes tag;      // nonce | mac
  uint16_t depth = 0;     // depth consumed so far

  size_t byte_size() const { return payload.size() + tag.size() + 2; }
  // {"payload": hex, "tag": hex, "depth": n}
  std::string to_json() const;
  static Ciphertext from_json(const std::string& s);
  oracle::Bytes serialize() const;  // payload_len u32 | payload | tag | depth u16
  static std::optional<Ciphertext> parse(oracle::ByteView b);
  friend bool operator==(const Ciphertext&, const Ciphertext&) = default;
};

// Deterministic classical computation on plaintext bits.
struct Computation {
  std::string label;
  std::string description;  // bound into the output nonce
  int depth = 1;
  std::function<Bits(const Bits&)> fn;
};

Keys gen(const oracle::Seed& seed, int depth_bound);
Ciphertext enc(const PublicKey& pk, const Bits& x, Rng& rng);
// nullopt on a bad tag or malformed payload.
std::optional<Bits> dec(const SecretKey& sk, const Ciphertext& ct);
// Throws std::length_error when the depth bound would be exceeded and
// std::invalid_argument on a malformed payload.
Ciphertext eval(const PublicKey& pk, const Ciphertext& ct, const Computation& c);

// Direct payload read available because the scheme is transparent. Used by
// evaluators that need the plaintext (e.g. to prepare a quantum state).
std::optional<Bits> read_transparent(const Ciphertext& ct);

// |ct| <= 2 + ceil(|x|/8) + tag + 2, independent of the evaluated computation.
size_t ciphertext_size_bound(size_t plaintext_bits);

oracle::Bytes pack_bits(const Bits& b);
std::optional<Bits> unpack_bits(oracle::ByteView payload);
Bits bytes_to_bits(oracle::ByteView b);
oracle::Bytes bits_to_bytes(const Bits& b);  // length must be a multiple of 8

// ---- Boolean circuits ----

struct BoolGate {
  enum class Kind { kAnd, kXor, kNot, kCopy };
  Kind kind = Kind::kCopy;
  int a = 0, b = 0;  // input wires (b unused for NOT/COPY)
};

// Wires 0..n_inputs-1 are inputs; gate g writes wire n_inputs + g.
struct BoolCircuit {
  int n_inputs = 0;
  std::vector<BoolGate> gates;
  std::vector<int> outputs;

  Bits evaluate(const Bits& x) const;
  int depth() const;
  std::string describe() const;
  Computation to_computation() const;
};

BoolCircuit identity_circuit(int n);
BoolCircuit not_circuit(int n);
// x = (a1, a0, b1, b0); outputs (s1, s0) of a + b mod 4.
BoolCircuit adder2_circuit();
BoolCircuit random_circuit(int n_inputs, int n_gates, int n_outputs, Rng& rng);

}  // namespace cosetlab::homenc
