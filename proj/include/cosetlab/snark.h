#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "cosetlab/oracleworld.h"

namespace cosetlab::snark {

inline constexpr size_t kNodeBytes = 16;
using Node = std::array<uint8_t, kNodeBytes>;
using Symbol = uint8_t;
using ProofString = std::vector<Symbol>;
using Witness = std::vector<uint8_t>;  // one bit per byte
using Instance = oracle::Bytes;

inline constexpr uint8_t kNodeTag = 0x01;
inline constexpr uint8_t kRandomnessTag = 0x02;

std::string node_hex(const Node& n);
Node leaf_of(Symbol s);
// Symbol encoded by a leaf, or nullopt for anything else.
std::optional<Symbol> symbol_of(const Node& leaf);
// Padding leaf; never a symbol encoding.
Node sentinel_leaf();

// Random oracle H restricted to the node alphabet. Inputs are tagged so node
// hashing and randomness derivation never share a domain.
class Hash {
 public:
  explicit Hash(oracle::FnHandle f);
  static Hash random(const oracle::Seed& seed);
  // Copy whose queries are appended to the returned database.
  std::pair<Hash, std::shared_ptr<oracle::QueryDatabase>> recording() const;

  Node node(const Node& left, const Node& right) const;
  oracle::Bytes randomness(const Node& rt, size_t len) const;

 private:
  oracle::FnHandle f_;
};

// ---- Merkle trees ----

struct MerkleTree {
  int depth = 0;
  std::vector<std::vector<Node>> levels;  // levels[k] has 2^k nodes; levels[depth] are leaves
  const Node& root() const { return levels[0][0]; }
};

struct AuthPath {
  uint32_t index = 0;
  Node value{};
  std::vector<Node> siblings;  // leaf level first
};

// Pads to a power of two with sentinel_leaf(). Throws on an empty list.
MerkleTree merkle_commit(const std::vector<Node>& leaves, const Hash& h);
AuthPath merkle_path(const MerkleTree& t, uint32_t index);

struct HashPair {
  Node left, right, out;
};
// All (input, output) pairs met while walking the path up to the root.
std::vector<HashPair> expand(const Hash& h, uint32_t index, const Node& value,
                             const std::vector<Node>& siblings);
bool check_path(const Hash& h, const Node& rt, uint32_t index, const Node& value,
                const std::vector<Node>& siblings);

// ---- database extraction ----

// Classical view of H's query database restricted to node hashing.
struct HashDatabase {
  std::vector<HashPair> entries;
  static HashDatabase from_queries(const oracle::QueryDatabase& db);
  void add(const Node& l, const Node& r, const Node& out) { entries.push_back({l, r, out}); }
};

struct ExtractedTree {
  int depth = 0;
  // Vertices keyed by their position string over {0,1}, root "".
  std::vector<std::pair<std::string, Node>> vertices;
  std::vector<std::optional<Node>> leaves() const;
};

// nullopt stands for an aborted extraction (collision at an expanded vertex).
std::optional<ExtractedTree> extract_tree(const HashDatabase& d, const Node& rt, int depth);

// ---- PCPs ----

struct QueryPlan {
  std::vector<uint32_t> positions;
  std::vector<uint32_t> aux;  // verifier-private bookkeeping
};

// Verifier coins, read as little-endian words from a byte string.
class Tape {
 public:
  explicit Tape(oracle::Bytes bytes) : bytes_(std::move(bytes)) {}
  uint64_t next_u64();
  uint32_t below(uint32_t bound);  // uniform when bound is a power of two

 private:
  oracle::Bytes bytes_;
  size_t pos_ = 0;
};

class Pcp {
 public:
  virtual ~Pcp() = default;
  virtual std::string name() const = 0;
  virtual int witness_bits() const = 0;
  virtual int depth() const = 0;  // proof length 2^depth
  uint32_t length() const { return uint32_t{1} << depth(); }
  virtual int query_count() const = 0;
  virtual size_t randomness_bytes() const = 0;
  virtual bool relation(const Instance& x, const Witness& w) const = 0;
  virtual ProofString prove(const Instance& x, const Witness& w) const = 0;
  virtual QueryPlan plan(const Instance& x, Tape& tape) const = 0;
  virtual bool decide(const Instance& x, const QueryPlan& plan,
                      const std::vector<Symbol>& answers) const = 0;
  virtual Witness extract(const Instance& x, const ProofString& proof) const = 0;
  // Acceptance probability above which extract() is guaranteed to succeed.
  virtual double knowledge_error() const = 0;
};

// Proof = witness repeated `copies` times, copy c at offset c * m.
class RepetitionPcp : public Pcp {
 public:
  RepetitionPcp(int m, int copies);
  int witness_bits() const override { return m_; }
  int depth() const override { return depth_; }
  int copies() const { return copies_; }
  ProofString prove(const Instance& x, const Witness& w) const override;
  // Positionwise majority over the copies, ties to 0.
  Witness majority(const ProofString& proof) const;

 protected:
  uint32_t at(int copy, int j) const { return static_cast<uint32_t>(copy * m_ + j); }
  int m_;
  int copies_;
  int depth_;
};

// x = f(w) with f(w)_j = w_j ^ w_{j+1 mod m} ^ k_j. Each of `checks` rounds
// picks a constraint j and copies c != c', reads (c,j), (c,j+1), (c',j),
// (c',j+1), and checks the constraint on c plus agreement of c and c'.
class XorPreimagePcp : public RepetitionPcp {
 public:
  static constexpr int kCopies = 8;
  static constexpr int kChecks = 16;
  explicit XorPreimagePcp(int m, uint64_t mask = 0x5a5a5a5a5a5a5a5aULL);

  std::string name() const override { return "xor-preimage"; }
  int query_count() const override { return 4 * kChecks; }
  size_t randomness_bytes() const override { return 8 * 3 * kChecks; }
  bool relation(const Instance& x, const Witness& w) const override;
  QueryPlan plan(const Instance& x, Tape& tape) const override;
  bool decide(const Instance& x, const QueryPlan& plan,
              const std::vector<Symbol>& answers) const override;
  Witness extract(const Instance& x, const ProofString& proof) const override;
  double knowledge_error() const override;

  Instance image(const Witness& w) const;
  bool mask_bit(int j) const { return (mask_ >> (j % 64)) & 1; }

 private:
  uint64_t mask_;
};

// Generic small-witness PCP: the verifier reads one whole copy chosen by the
// coins and runs the relation on it. extract() returns the first copy that
// satisfies the relation, so the knowledge error is 0.
class CopyReadPcp : public RepetitionPcp {
 public:
  using Relation = std::function<bool(const Instance&, const Witness&)>;
  static constexpr int kCopies = 8;
  CopyReadPcp(std::string name, int m, Relation r);

  std::string name() const override { return name_; }
  int query_count() const override { return m_; }
  size_t randomness_bytes() const override { return 8; }
  bool relation(const Instance& x, const Witness& w) const override { return rel_(x, w); }
  QueryPlan plan(const Instance& x, Tape& tape) const override;
  bool decide(const Instance& x, const QueryPlan& plan,
              const std::vector<Symbol>& answers) const override;
  Witness extract(const Instance& x, const ProofString& proof) const override;
  double knowledge_error() const override { return 0.0; }

 private:
  std::string name_;
  Relation rel_;
};

// ---- the SNARK ----

struct QueryEntry {
  uint32_t index = 0;
  Symbol value = 0;
  std::vector<Node> path;
  friend bool operator==(const QueryEntry&, const QueryEntry&) = default;
};

struct SnarkProof {
  Node rt{};
  std::vector<QueryEntry> entries;

  // rt | q u32 | per entry: index u32, value u8, path_len u8, path nodes.
  oracle::Bytes serialize() const;
  static std::optional<SnarkProof> parse(oracle::ByteView bytes);
  friend bool operator==(const SnarkProof&, const SnarkProof&) = default;
};

// |rt| + q (|Sigma| + d |node|).
size_t abstract_size(int q, int depth);
// abstract_size plus the count and per-entry index and length fields.
size_t wire_size(int q, int depth);

QueryPlan derive_plan(const Hash& h, const Pcp& pcp, const Instance& x, const Node& rt);

// Throws std::invalid_argument when (x, w) is not in the relation.
SnarkProof prove(const Hash& h, const Pcp& pcp, const Instance& x, const Witness& w);
// Commits an arbitrary proof string and answers the derived queries from it.
SnarkProof prove_from_string(const Hash& h, const Pcp& pcp, const Instance& x, const ProofString& pi);
bool verify(const Hash& h, const Pcp& pcp, const Instance& x, const SnarkProof& proof);

// Decodes leaves(T), with 0 for absent or non-symbol leaves.
ProofString proof_from_tree(const ExtractedTree& t, uint32_t length);

// E(0^l) first, then every root candidate in the database in order.
std::optional<Witness> find_witness(const HashDatabase& d, const Pcp& pcp, const Instance& x);

}  // namespace cosetlab::snark
