#pragma once

#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <utility>
#include <vector>

#include "cosetlab/cosetstates.h"
#include "cosetlab/densesim.h"
#include "cosetlab/oracleworld.h"
#include "cosetlab/oss.h"

namespace cosetlab::pfc {

struct PfcParams {
  oss::OssParams outer;
  oss::OssParams inner;

  void validate() const;
};

struct Commitment {
  uint64_t vk = 0;       // outer verification key
  gf2::Vector sigma;     // outer signature of 1
  uint64_t vk_bar = 0;   // inner verification key y
  friend bool operator==(const Commitment&, const Commitment&) = default;
};

enum class Basis { kZ, kX };

struct Opening {
  Basis basis = Basis::kZ;
  int b = 0;
  gf2::Vector u;
};

// Classical commitment key: the outer OSS oracles plus the three oracles
// ck_P, ck_P^-1, ck_D that rebuild an inner OSS instance from PRF(vk).
class CommitKey {
 public:
  CommitKey(const PfcParams& params, const oracle::Seed& outer_seed, const oracle::Seed& prf_key);

  const PfcParams& params() const { return params_; }
  const oss::OssOracles& outer() const { return outer_; }

  std::pair<uint64_t, gf2::Vector> ck_P(uint64_t vk, uint64_t x) const;
  std::optional<uint64_t> ck_P_inv(uint64_t vk, uint64_t vk_bar, const gf2::Vector& u) const;
  // nullopt unless sigma is a valid outer signature of 0 under vk; then 0
  // when u is in the dual of S_{vk_bar} and 1 otherwise.
  std::optional<int> ck_D(uint64_t vk, const gf2::Vector& sigma, uint64_t vk_bar,
                          const gf2::Vector& u) const;

  // Inner Gen, which only needs ck_P and ck_P^-1.
  oss::OssToken inner_gen(uint64_t vk, Rng& rng) const;

 private:
  friend class DecodeKey;
  struct Cache {
    std::mutex mu;
    std::map<uint64_t, std::unique_ptr<oss::OssOracles>> inner;
  };
  const oss::OssOracles& inner(uint64_t vk) const;

  PfcParams params_;
  oracle::Seed prf_key_;
  oss::OssOracles outer_;
  std::shared_ptr<Cache> cache_;
};

class DecodeKey {
 public:
  DecodeKey(const PfcParams& params, const oracle::Seed& outer_seed, const oracle::Seed& prf_key);

  const PfcParams& params() const { return params_; }
  const oracle::Seed& outer_seed() const { return outer_seed_; }
  const oracle::Seed& prf_key() const { return prf_key_; }
  // Regenerated once, then cached.
  const CommitKey& commit_key() const;
  const oss::OssOracles& inner(uint64_t vk) const { return commit_key().inner(vk); }

 private:
  PfcParams params_;
  oracle::Seed outer_seed_;
  oracle::Seed prf_key_;
  struct Lazy {
    std::once_flag once;
    std::unique_ptr<CommitKey> ck;
  };
  std::shared_ptr<Lazy> lazy_;
};

std::pair<CommitKey, DecodeKey> gen(const PfcParams& params, const oracle::Seed& seed);

struct CommitResult {
  cosets::CosetQubitState state;
  Commitment c;
  int b_prime = 0;        // first-qubit measurement of the fresh inner key
  int outer_retries = 0;
  int inner_retries = 0;
};

CommitResult commit(const CommitKey& ck, cosets::Complex amp0, cosets::Complex amp1, Rng& rng);

Opening open_z(const cosets::CosetQubitState& s, Rng& rng);
Opening open_x(const cosets::CosetQubitState& s, Rng& rng);

std::optional<int> dec_z(const DecodeKey& dk, const Commitment& c, const Opening& d);
std::optional<int> dec_x(const DecodeKey& dk, const Commitment& c, const Opening& d);

// Whether the decoded Z-openings spell a string in W (bit i of a word is
// opening i, first opening most significant). At most 3 openings.
bool string_projector_accepts(const std::vector<const DecodeKey*>& dks,
                              const std::vector<Commitment>& cs, const std::set<uint32_t>& w,
                              const std::vector<Opening>& ds);

// ---- binding games ----

class PfcAccess {
 public:
  struct Counts {
    uint64_t dec_z = 0, dec_x = 0;
  };

  PfcAccess(const CommitKey& ck, const DecodeKey& dk) : ck_(&ck), dk_(&dk) {}

  const CommitKey& ck() const { return *ck_; }
  std::optional<int> dec_z(const Commitment& c, const Opening& d);
  std::optional<int> dec_x(const Commitment& c, const Opening& d);
  void revoke_dec_x() { dec_x_open_ = false; }
  Counts counts() const { return counts_; }

 private:
  const CommitKey* ck_;
  const DecodeKey* dk_;
  bool dec_x_open_ = true;
  Counts counts_;
};

// State on (B, U, R): B is the first qubit, then n qubits of U, then
// r_qubits of adversary memory.
struct BindingSubmission {
  Commitment c;
  dense::SparseState state;
  int r_qubits = 0;
};

using BindingA1 = std::function<BindingSubmission(PfcAccess&, Rng&)>;
using BindingA2 = std::function<int(PfcAccess&, dense::SparseState&, Rng&)>;

enum class GameOutcome { kLose, kWin, kVoid };

struct BindingResult {
  GameOutcome outcome = GameOutcome::kVoid;
  int challenge = 0;
  int guess = 0;
  size_t post_support = 0;  // (B,U) support size handed to A2
};

// control_dec_x hands A2 the DecX oracle, which the real game forbids.
BindingResult run_collapse_binding(const CommitKey& ck, const DecodeKey& dk, const BindingA1& a1,
                                   const BindingA2& a2, Rng& rng, bool control_dec_x = false);

struct OssSubmission {
  uint64_t y = 0;
  dense::SparseState state;  // U (k qubits) then r_qubits
  int r_qubits = 0;
};

using OssA1 = std::function<OssSubmission(oss::OracleAccess&, Rng&)>;
using OssA2 = std::function<int(oss::OracleAccess&, dense::SparseState&, Rng&)>;

// control_d leaves D available to A2.
BindingResult run_oss_collapse_binding(const oss::OssOracles& o, const OssA1& a1, const OssA2& a2,
                                       Rng& rng, bool control_d = false);

// Library adversaries.
std::pair<BindingA1, BindingA2> guessing_adversary(cosets::Complex amp0, cosets::Complex amp1);
// Commits |+> and tests the X-basis opening with DecX in phase two.
std::pair<BindingA1, BindingA2> dec_x_test_adversary();
std::pair<OssA1, OssA2> oss_guessing_adversary();
// Honest key, Hadamard-basis measurement checked against D in phase two.
std::pair<OssA1, OssA2> oss_d_test_adversary();

// Success probability of the optimal distinguisher between a uniform
// superposition over `support` basis states and its measured mixture.
double helstrom_optimum(uint64_t support);

}  // namespace cosetlab::pfc
