#pragma once

#include <atomic>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <utility>

#include "cosetlab/cosetstates.h"
#include "cosetlab/gf2.h"
#include "cosetlab/oracleworld.h"

namespace cosetlab::oss {

struct OssParams {
  int n = 8;
  int r = 3;
  int s = 2;
  int k = 8;

  int m() const { return n - r; }  // coset dimension
  void validate() const;
};

struct CosetData {
  gf2::Matrix a;  // k x (n - r), full column rank
  gf2::Vector b;  // length k
  gf2::Coset coset;
  int resamples = 0;
};

// Setup output: P, P^-1 and D, all derived from one permutation and one
// random function. Safe to share between threads.
class OssOracles {
 public:
  static OssOracles setup(const OssParams& params, const oracle::Seed& seed);

  const OssParams& params() const { return params_; }

  std::pair<uint64_t, gf2::Vector> P(uint64_t x) const;
  std::optional<uint64_t> P_inv(uint64_t y, const gf2::Vector& u) const;
  bool D(uint64_t y, const gf2::Vector& v) const;

  uint64_t H(uint64_t x) const;
  const CosetData& coset_data(uint64_t y) const;
  const gf2::Coset& coset(uint64_t y) const { return coset_data(y).coset; }

 private:
  struct Shared {
    std::mutex mu;
    std::map<uint64_t, std::unique_ptr<CosetData>> cache;
  };

  OssOracles(const OssParams& p, oracle::PermHandle pi, oracle::FnHandle f);

  OssParams params_;
  oracle::PermHandle pi_;
  oracle::FnHandle f_;
  std::shared_ptr<Shared> shared_;
};

// Single-use signing key. Move-only; signing consumes it.
class OssToken {
 public:
  OssToken(uint64_t vk, gf2::Coset sk, int gen_retries = 0);
  OssToken(OssToken&& other) noexcept;
  OssToken& operator=(OssToken&& other) noexcept;
  OssToken(const OssToken&) = delete;
  OssToken& operator=(const OssToken&) = delete;

  uint64_t vk() const { return vk_; }
  int gen_retries() const { return gen_retries_; }
  bool used() const { return !sk_.has_value(); }
  // Throws std::logic_error once the token has been consumed.
  const gf2::Coset& sk() const;
  gf2::Coset take();

 private:
  uint64_t vk_;
  std::optional<gf2::Coset> sk_;
  int gen_retries_;
};

struct SignResult {
  enum class Status { kOk, kAbort };
  Status status = Status::kAbort;
  gf2::Vector sigma;
  bool rotated = false;

  bool ok() const { return status == Status::kOk; }
};

// Retries until S_y has both first-bit values.
OssToken gen(const OssOracles& o, Rng& rng);
OssToken gen_unfiltered(const OssOracles& o, Rng& rng);
SignResult sign(const OssOracles& o, OssToken&& token, int m, Rng& rng);
bool verify(const OssOracles& o, uint64_t vk, int m, const gf2::Vector& sigma);

std::string vk_hex(uint64_t vk, int r);

// Metered, revocable view of the oracles handed to adversaries.
class OracleAccess {
 public:
  struct Counts {
    uint64_t p = 0, p_inv = 0, d = 0;
  };

  explicit OracleAccess(const OssOracles& o);

  const OssParams& params() const { return o_->params(); }
  std::pair<uint64_t, gf2::Vector> P(uint64_t x);
  std::optional<uint64_t> P_inv(uint64_t y, const gf2::Vector& u);
  bool D(uint64_t y, const gf2::Vector& v);

  // Honest algorithms run through the metered oracles.
  OssToken gen(Rng& rng);
  SignResult sign(OssToken&& token, int m, Rng& rng);
  // Standard-basis measurement of the whole key register.
  gf2::Vector measure(OssToken&& token, Rng& rng);

  void revoke_d() { d_open_ = false; }
  void revoke_all() { p_open_ = p_inv_open_ = d_open_ = false; }
  Counts counts() const { return counts_; }

 private:
  const OssOracles* o_;
  Counts counts_;
  bool p_open_ = true, p_inv_open_ = true, d_open_ = true;
};

struct Forgery {
  uint64_t vk = 0;
  int m0 = 0;
  gf2::Vector sigma0;
  int m1 = 0;
  gf2::Vector sigma1;
};

using Adversary = std::function<Forgery(OracleAccess&, Rng&)>;

struct ForgeryResult {
  bool win = false;
  Forgery forgery;
  OracleAccess::Counts queries;
};

ForgeryResult forgery_game(const OssOracles& o, const Adversary& adversary, Rng& rng);

// Signs 0 once and submits that signature twice.
Adversary honest_adversary();
// Measures the key, then applies the signing rotation to the collapsed state
// (dense simulation) and measures again.
Adversary naive_cloner();

}  // namespace cosetlab::oss
