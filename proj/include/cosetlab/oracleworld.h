#pragma once

#include <array>
#include <complex>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "cosetlab/gf2.h"

namespace cosetlab::oracle {

using Bytes = std::vector<uint8_t>;
using ByteView = std::span<const uint8_t>;
using Seed = std::array<uint8_t, 32>;

std::string to_hex(ByteView b);
Bytes from_hex(std::string_view hex);
// Accepts up to 64 hex digits; shorter input is left-padded with zeros.
Seed seed_from_hex(std::string_view hex);
Seed seed_from_u64(uint64_t v);
Seed derive_seed(const Seed& parent, std::string_view label, uint64_t index = 0);
Rng rng_from_seed(const Seed& seed);

// Keyed BLAKE2b, extended in counter mode past 64 bytes.
Bytes keyed_hash(ByteView key, ByteView msg, size_t out_len);
Bytes concat(std::initializer_list<ByteView> parts);
Bytes as_bytes(std::string_view s);
Bytes u64_le(uint64_t v);

// Uniform random permutation of {0,1}^n_bits. Up to kTableBits the whole
// table is drawn (Fisher-Yates) on first use, so values do not depend on the
// order of queries; larger domains fall back to lazy two-way sampling.
class PermHandle {
 public:
  static constexpr int kTableBits = 16;

  PermHandle(int n_bits, const Seed& seed);

  int n_bits() const;
  uint64_t eval(uint64_t x) const;
  std::optional<uint64_t> invert(uint64_t y) const;

 private:
  struct State;
  std::shared_ptr<State> state_;
};

// Deterministic function on byte strings. Copies share the evaluator.
class FnHandle {
 public:
  using Evaluator = std::function<Bytes(ByteView)>;

  FnHandle() = default;
  FnHandle(std::string descriptor, size_t out_bytes, Evaluator eval);

  static FnHandle random(const Seed& seed, size_t out_bytes,
                         std::string descriptor = "random");

  Bytes operator()(ByteView in) const;
  // x as 8 little-endian bytes, output truncated to out_bits (<= 64).
  uint64_t word(uint64_t x, int out_bits) const;
  size_t out_bytes() const { return out_bytes_; }
  const std::string& descriptor() const { return descriptor_; }
  explicit operator bool() const { return static_cast<bool>(eval_); }

 private:
  std::string descriptor_;
  size_t out_bytes_ = 0;
  std::shared_ptr<const Evaluator> eval_;
};

class QueryDatabase {
 public:
  struct Entry {
    Bytes input;
    Bytes output;
  };

  // Returns false when the input is already present.
  bool record(const Bytes& input, const Bytes& output);
  std::optional<Bytes> lookup(const Bytes& input) const;
  std::vector<Entry> snapshot() const;
  size_t size() const;

 private:
  mutable std::mutex mu_;
  std::vector<Entry> entries_;
  std::map<Bytes, size_t> index_;
};

std::pair<FnHandle, std::shared_ptr<QueryDatabase>> recording_wrap(const FnHandle& f);

using ValueSampler = std::function<Bytes(Rng&)>;
// r values drawn from `base`; each input picks one of them uniformly.
FnHandle small_range_fn(const ValueSampler& base, size_t r, Rng& rng);

// Toy compressed standard oracle. A database is a partial function stored as
// one byte per input: 0 for "undefined", y+1 otherwise.
class CompressedOracleState {
 public:
  using Complex = std::complex<double>;
  static constexpr int kMaxTotalBits = 6;

  struct Key {
    uint32_t x = 0;
    uint32_t u = 0;
    std::vector<uint8_t> db;
    friend auto operator<=>(const Key&, const Key&) = default;
  };

  CompressedOracleState(int n_in, int n_out);  // |0,0>|empty>
  static CompressedOracleState basis(int n_in, int n_out, uint32_t x, uint32_t u);

  int n_in() const { return n_in_; }
  int n_out() const { return n_out_; }
  int queries() const { return queries_; }
  const std::map<Key, Complex>& terms() const { return terms_; }
  void set(const Key& k, Complex a);
  void clear() { terms_.clear(); }
  double norm() const;
  size_t max_db_size() const;

  void increase() { ++queries_; }
  void decomp();
  void cstoprime();

  // Overwrites the (classical) query registers with |x, 0>.
  void load_classical_query(uint32_t x);
  std::map<uint32_t, double> output_distribution() const;
  CompressedOracleState postselect_output(uint32_t y) const;
  std::map<std::vector<uint8_t>, double> database_distribution() const;

 private:
  int n_in_;
  int n_out_;
  int queries_ = 0;
  std::map<Key, Complex> terms_;
};

CompressedOracleState cstso_query(const CompressedOracleState& s);
CompressedOracleState decomp(const CompressedOracleState& s);

// Exact distribution of the outputs seen by a classical adversary making the
// given queries through the compressed oracle.
std::map<std::vector<uint32_t>, double> cstso_classical_transcript(
    int n_in, int n_out, const std::vector<uint32_t>& xs);

}  // namespace cosetlab::oracle
