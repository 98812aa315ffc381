#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "cosetlab/gf2.h"
#include "cosetlab/homenc.h"
#include "cosetlab/oracleworld.h"
#include "cosetlab/oss.h"
#include "cosetlab/pfc.h"

namespace cosetlab::pvqfhe {

using Bits = homenc::Bits;
using Complex = cosets::Complex;

// ---- pseudo-deterministic circuits ----

inline constexpr int kMaxCircuitQubits = 8;
inline constexpr double kPseudoMargin = 1e-6;

struct Gate {
  std::string kind;  // h x y z s t cx cz ccx swap
  std::vector<int> targets;
  friend bool operator==(const Gate&, const Gate&) = default;
};

// Input bit i is loaded on qubit i with X; all other qubits start in |0>.
// The output is a standard-basis measurement of out_qubit.
struct Circuit {
  int n_qubits = 0;
  int n_inputs = 0;
  std::vector<Gate> gates;
  int out_qubit = 0;

  // Structural checks only.
  void validate() const;
  // Throws std::domain_error if some input has an output bit below the margin.
  void check_pseudo_deterministic() const;

  double prob_one(const Bits& x) const;
  int evaluate(const Bits& x) const;  // throws std::domain_error off margin
  int depth() const;                  // greedy layering by qubit

  // {"gates":[{"kind":..,"targets":[..]}],"n_qubits":n,"out_qubit":q[,"n_inputs":m]}
  // n_inputs defaults to n_qubits - 1. Parsing validates and checks the margin.
  static Circuit from_json(const std::string& text);
  std::string to_json() const;
  // Compact binary description P_Q.
  oracle::Bytes serialize() const;
  static std::optional<Circuit> parse(oracle::ByteView b);
  friend bool operator==(const Circuit&, const Circuit&) = default;
};

Circuit and_circuit();       // q2 ^= q0 q1
Circuit parity_circuit();    // phase kickback onto q2 in the Hadamard basis
Circuit constant0_circuit(); // H H on the output qubit
std::vector<std::pair<std::string, Circuit>> circuit_corpus();

// A quantum computation applied to the encrypted plaintext.
struct Program {
  oracle::Bytes description;
  int depth = 1;
  std::function<int(const Bits& plaintext)> run;
};

Program circuit_program(const Circuit& c);

// ---- upgradable privately-verifiable scheme ----

// Decoded opening per position: a bit, or kStar for a skipped Hadamard
// position that is also a standard-basis position.
inline constexpr int8_t kStar = 2;
using Marks = std::vector<int8_t>;

using RandomOracle = std::function<uint32_t(const oracle::Bytes&)>;  // y -> T as a mask

class PrivScheme {
 public:
  virtual ~PrivScheme() = default;
  virtual std::string name() const = 0;
  virtual int ell() const = 0;
  virtual uint32_t standard_positions(const oracle::Bytes& sp) const = 0;
  virtual oracle::Bytes par_ver_gen(const homenc::Ciphertext& ct, const oracle::Bytes& q,
                                    const oracle::Bytes& sp, int i) const = 0;
  // Product state on M, one (amp0, amp1) pair per position.
  virtual std::vector<std::pair<Complex, Complex>> prepare(const homenc::Ciphertext& ct,
                                                           const Program& q) const = 0;
  struct YResult {
    oracle::Bytes y;
    int attempts = 1;
  };
  virtual YResult measure_y(const std::vector<oracle::Bytes>& pp, const homenc::Ciphertext& ct,
                            const oracle::Bytes& q, const RandomOracle& h) const = 0;
  virtual oracle::Bytes measure_z(const std::vector<oracle::Bytes>& pp, const oracle::Bytes& y,
                                  uint32_t t) const = 0;
  virtual std::optional<homenc::Ciphertext> ver(const oracle::Bytes& sp, const homenc::Ciphertext& ct,
                                                const oracle::Bytes& q, const Marks& m,
                                                const oracle::Bytes& y, const oracle::Bytes& z,
                                                const RandomOracle& h) const = 0;
  virtual std::optional<int> dec(const homenc::SecretKey& sk, const homenc::Ciphertext& ct) const = 0;
};

// Reference instance with a product state |b*>^l, b* = Q(x) read from the
// transparent ciphertext. S[sp] is a pseudorandom half of the positions.
// Ver checks z, needs T nonempty and every decoded T position equal to one
// bit b, and outputs Eval(pk, ct, const b). No cryptographic soundness.
class TransparentPriv : public PrivScheme {
 public:
  static constexpr int kEll = 8;
  explicit TransparentPriv(homenc::PublicKey pk, int max_grind = 64);

  std::string name() const override { return "transparent"; }
  int ell() const override { return kEll; }
  uint32_t standard_positions(const oracle::Bytes& sp) const override;
  oracle::Bytes par_ver_gen(const homenc::Ciphertext& ct, const oracle::Bytes& q,
                            const oracle::Bytes& sp, int i) const override;
  std::vector<std::pair<Complex, Complex>> prepare(const homenc::Ciphertext& ct,
                                                   const Program& q) const override;
  YResult measure_y(const std::vector<oracle::Bytes>& pp, const homenc::Ciphertext& ct,
                    const oracle::Bytes& q, const RandomOracle& h) const override;
  oracle::Bytes measure_z(const std::vector<oracle::Bytes>& pp, const oracle::Bytes& y,
                          uint32_t t) const override;
  std::optional<homenc::Ciphertext> ver(const oracle::Bytes& sp, const homenc::Ciphertext& ct,
                                        const oracle::Bytes& q, const Marks& m,
                                        const oracle::Bytes& y, const oracle::Bytes& z,
                                        const RandomOracle& h) const override;
  std::optional<int> dec(const homenc::SecretKey& sk, const homenc::Ciphertext& ct) const override;

  // M_b: strings whose entries on S n T are all b (entries elsewhere ignored).
  static bool in_M(int b, const Marks& m, uint32_t s, uint32_t t);

 private:
  homenc::PublicKey pk_;
  int max_grind_;
};

// ---- the compiler ----

struct Params {
  int oss_tokens = 16;  // bits of the signed digest of (ct, Q, c)
  int depth_bound = 64;
  oss::OssParams oss{};
  pfc::PfcParams pfc{};
  void validate() const;
};

using PkOss = std::vector<uint64_t>;

struct Proof {
  PkOss pk_oss;
  std::vector<pfc::Commitment> c;
  std::vector<gf2::Vector> sigma;
  std::vector<pfc::Opening> u;
  oracle::Bytes y;
  oracle::Bytes z;

  // u8 L | L vk u64 | u8 l | l commitments | L signatures | l openings |
  // u16 |y| y | u16 |z| z. A vector is u8 length then u64 bits.
  oracle::Bytes serialize() const;
  static std::optional<Proof> parse(oracle::ByteView b);
  friend bool operator==(const Proof&, const Proof&);
};

// Serialized proof size for the given parameters; independent of Q and x.
size_t proof_size_bound(const Params& p, int ell);

// Bookkeeping from one PrivVer call.
struct PrivVerTrace {
  std::string stage;  // "ok" or where it rejected
  uint32_t t = 0, s = 0;
  Marks m;
};

// Partition of [l] into T, T-bar minus S, T-bar cap S.
struct BasisSplit {
  uint32_t z_positions, x_positions, star_positions;
};
BasisSplit basis_split(uint32_t t, uint32_t s, int ell);

struct Setup;
Setup gen(const Params& params, const oracle::Seed& seed);

// PP: the oracles O, CK, PrivGen, H, PrivVer behind one handle. Secrets stay
// inside; callers only see the five functionalities.
class PublicParams {
 public:
  const Params& params() const;
  const PrivScheme& priv() const;
  int ell() const;

  const oss::OssOracles& oss() const;
  const pfc::CommitKey& ck(const PkOss& pk, int i) const;
  std::optional<oracle::Bytes> priv_gen(const homenc::Ciphertext& ct, const oracle::Bytes& q,
                                        const PkOss& pk, const std::vector<pfc::Commitment>& c,
                                        const std::vector<gf2::Vector>& sigma, int i) const;
  uint32_t h(const oracle::Bytes& y) const;
  std::optional<homenc::Ciphertext> priv_ver(const homenc::Ciphertext& ct, const oracle::Bytes& q,
                                             const Proof& pi, PrivVerTrace* trace = nullptr) const;

  struct Impl;

 private:
  friend Setup gen(const Params&, const oracle::Seed&);
  explicit PublicParams(std::shared_ptr<Impl> impl) : impl_(std::move(impl)) {}
  std::shared_ptr<Impl> impl_;
};

struct Setup {
  homenc::PublicKey pk;
  homenc::SecretKey sk;
  std::shared_ptr<const PublicParams> pp;
};

homenc::Ciphertext enc(const homenc::PublicKey& pk, const Bits& x, Rng& rng);

// Digest of (ct, Q, c) signed bit by bit with the OSS tokens.
std::vector<int> signed_digest(const homenc::Ciphertext& ct, const oracle::Bytes& q,
                               const std::vector<pfc::Commitment>& c, int bits);

struct EvalResult {
  std::optional<homenc::Ciphertext> ct_tilde;
  Proof pi;
  int sign_restarts = 0;
  int grind_attempts = 0;
};

// Throws std::length_error if Q exceeds the depth bound.
EvalResult eval(const PublicParams& pp, const homenc::Ciphertext& ct, const Program& q, Rng& rng);
bool verify(const PublicParams& pp, const homenc::Ciphertext& ct, const oracle::Bytes& q,
            const homenc::Ciphertext& ct_tilde, const Proof& pi);
std::optional<int> dec(const PublicParams& pp, const homenc::SecretKey& sk, const homenc::Ciphertext& ct);

}  // namespace cosetlab::pvqfhe
