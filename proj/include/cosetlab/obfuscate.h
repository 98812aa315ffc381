#pragma once

#include <atomic>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "cosetlab/homenc.h"
#include "cosetlab/oracleworld.h"
#include "cosetlab/pvqfhe.h"
#include "cosetlab/snark.h"

namespace cosetlab::obf {

using Bits = homenc::Bits;

// ---- toy Turing machines ----

inline constexpr uint8_t kHalt = 0xff;
inline constexpr uint8_t kBlank = 2;
inline constexpr int kMaxSteps = 32;
inline constexpr int kMaxStates = 16;
inline constexpr int kMaxInputBits = 16;

struct Transition {
  uint8_t write = 0;  // 0, 1 or kBlank
  int8_t move = 0;    // -1, 0, +1; the head never moves left of cell 0
  uint8_t next = kHalt;
  friend bool operator==(const Transition&, const Transition&) = default;
};

// Tape starts as x followed by blanks, head on cell 0, state 0. The machine
// stops on kHalt or after max_steps; the output is the out_bits cells from
// the final head position on, with blanks read as 0.
struct TuringMachine {
  int states = 1;
  int in_bits = 1;
  int out_bits = 1;
  int max_steps = 1;
  std::vector<Transition> table;  // index state * 3 + symbol

  void validate() const;
  Bits run(const Bits& x) const;
  // u8 states | u8 in | u8 out | u8 max_steps | table (write, move + 1, next)
  oracle::Bytes serialize() const;
  static std::optional<TuringMachine> parse(oracle::ByteView b);
  friend bool operator==(const TuringMachine&, const TuringMachine&) = default;
};

TuringMachine identity_program(int in_bits, int out_bits);
// Overwrites each cell with the running parity and stops on the last one.
TuringMachine parity_program(int in_bits);
TuringMachine random_program(int in_bits, int out_bits, int states, Rng& rng);

// FHE computation U_x: decode P from the plaintext and run it on x.
homenc::Computation universal_tm(const Bits& x);

// ---- succinct ideal obfuscation (FHE + SNARK) ----

struct GuardStats {
  std::atomic<uint64_t> calls{0};
  std::atomic<uint64_t> passes{0};
  std::atomic<uint64_t> decryptions{0};
};

struct SObfOptions {
  int depth_bound = 2 * kMaxSteps;
};

class ObfuscatedProgram;
class ObfuscatedQuantumProgram;

// Evaluate-only handle for O[P]: SNARK verification of (ct, ct') then Dec.
class SObfOracle {
 public:
  std::optional<Bits> operator()(const homenc::Ciphertext& ct_prime, const snark::SnarkProof& pi) const;
  const GuardStats& stats() const;

  struct Impl;

 private:
  friend ObfuscatedProgram sobf_obfuscate(const TuringMachine&, const oracle::Seed&, const SObfOptions&);
  std::shared_ptr<Impl> impl_;
};

class ObfuscatedProgram {
 public:
  const homenc::Ciphertext& pp() const { return pp_; }
  const homenc::PublicKey& pk() const { return pk_; }
  const snark::Hash& hash() const { return *h_; }
  const snark::Pcp& pcp() const { return *pcp_; }
  const SObfOracle& oracle() const { return oracle_; }
  int in_bits() const { return in_bits_; }

  // |pp| plus the key and parameter material describing O[P].
  size_t size_bytes() const;
  oracle::Bytes instance(const homenc::Ciphertext& ct_prime) const;

  friend ObfuscatedProgram sobf_obfuscate(const TuringMachine& p, const oracle::Seed& seed,
                                          const SObfOptions& opt);

 private:
  ObfuscatedProgram() = default;
  homenc::Ciphertext pp_;
  homenc::PublicKey pk_;
  std::optional<snark::Hash> h_;
  std::shared_ptr<const snark::Pcp> pcp_;
  SObfOracle oracle_;
  int in_bits_ = 0;
};

ObfuscatedProgram sobf_obfuscate(const TuringMachine& p, const oracle::Seed& seed,
                                 const SObfOptions& opt = {});
// Fixed polynomial in |P| bounding ObfuscatedProgram::size_bytes().
size_t sobf_size_bound(size_t program_bytes);

enum class Tamper { kNone, kCiphertext, kProof, kOpening, kSignature };
Tamper parse_tamper(const std::string& s);  // "none", "ciphertext", "proof", "opening", "signature"
std::string tamper_name(Tamper t);

struct SObfEvalResult {
  std::optional<Bits> y;
  std::string stage;  // "ok", "eval", "prove", "oracle"
  homenc::Ciphertext ct_prime;
  snark::SnarkProof pi;
};

// kCiphertext and kProof corrupt (ct', pi) before the oracle call.
SObfEvalResult sobf_eval(const ObfuscatedProgram& o, const Bits& x, Tamper t = Tamper::kNone);

// ---- classical obfuscation of pseudo-deterministic quantum circuits ----

inline constexpr int kMaxUniversalGates = 48;

// U_x: decode a circuit from the plaintext and evaluate it on x. One FHE
// depth unit per interpreted gate, charged up front for the largest circuit.
pvqfhe::Program universal_circuit(const Bits& x);

// DK~: Ver^PP(ct, U_x, ct', pi) then Dec. The counter records every call.
class GuardedDecryptor {
 public:
  std::optional<int> operator()(const Bits& x, const homenc::Ciphertext& ct_prime,
                                const pvqfhe::Proof& pi, std::string* stage = nullptr) const;
  const GuardStats& stats() const;

  struct Impl;

 private:
  friend ObfuscatedQuantumProgram qobf_obfuscate(const pvqfhe::Circuit&, const oracle::Seed&);
  std::shared_ptr<Impl> impl_;
};

class ObfuscatedQuantumProgram {
 public:
  const homenc::Ciphertext& ct() const { return ct_; }
  const pvqfhe::PublicParams& pp() const { return *pp_; }
  const GuardedDecryptor& dk() const { return dk_; }
  int n_inputs() const { return n_inputs_; }
  size_t size_bytes() const;

  friend ObfuscatedQuantumProgram qobf_obfuscate(const pvqfhe::Circuit& c, const oracle::Seed& seed);

 private:
  ObfuscatedQuantumProgram() = default;
  homenc::Ciphertext ct_;
  std::shared_ptr<const pvqfhe::PublicParams> pp_;
  GuardedDecryptor dk_;
  int n_inputs_ = 0;
};

ObfuscatedQuantumProgram qobf_obfuscate(const pvqfhe::Circuit& c, const oracle::Seed& seed);
size_t qobf_size_bound(size_t circuit_bytes);

struct QObfEvalResult {
  std::optional<int> bit;
  std::string stage;  // "ok", "eval", or the PrivVer stage that rejected
  size_t proof_bytes = 0;
  int sign_restarts = 0;
};

QObfEvalResult qobf_eval(const ObfuscatedQuantumProgram& o, const Bits& x, Rng& rng,
                         Tamper t = Tamper::kNone);

}  // namespace cosetlab::obf
