#include "cosetlab/snark.h"

#include <algorithm>
#include <bit>
#include <cmath>
#include <deque>
#include <map>
#include <set>
#include <stdexcept>

namespace cosetlab::snark {
namespace {

Node node_from(oracle::ByteView b) {
  if (b.size() < kNodeBytes) throw std::invalid_argument("snark: short node");
  Node n;
  std::copy_n(b.begin(), kNodeBytes, n.begin());
  return n;
}

void put_u32(oracle::Bytes& out, uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<uint8_t>(v >> (8 * i)));
}

bool is_bits(const std::vector<uint8_t>& v) {
  return std::all_of(v.begin(), v.end(), [](uint8_t b) { return b <= 1; });
}

int ceil_log2(uint64_t v) { return v <= 1 ? 0 : 64 - std::countl_zero(v - 1); }

class Reader {
 public:
  explicit Reader(oracle::ByteView b) : b_(b) {}
  bool has(size_t n) const { return pos_ + n <= b_.size(); }
  bool done() const { return pos_ == b_.size(); }
  uint8_t u8() { return b_[pos_++]; }
  uint32_t u32() {
    uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<uint32_t>(b_[pos_++]) << (8 * i);
    return v;
  }
  Node node() {
    Node n = node_from(b_.subspan(pos_, kNodeBytes));
    pos_ += kNodeBytes;
    return n;
  }

 private:
  oracle::ByteView b_;
  size_t pos_ = 0;
};

}  // namespace

std::string node_hex(const Node& n) { return oracle::to_hex(n); }

Node leaf_of(Symbol s) {
  Node n{};
  n[0] = s;
  return n;
}

std::optional<Symbol> symbol_of(const Node& leaf) {
  if (std::any_of(leaf.begin() + 1, leaf.end(), [](uint8_t b) { return b != 0; })) return std::nullopt;
  return leaf[0];
}

Node sentinel_leaf() {
  Node n;
  n.fill(0xff);
  return n;
}

Hash::Hash(oracle::FnHandle f) : f_(std::move(f)) {
  if (!f_ || f_.out_bytes() < kNodeBytes) throw std::invalid_argument("snark hash: output too short");
}

Hash Hash::random(const oracle::Seed& seed) {
  return Hash(oracle::FnHandle::random(seed, kNodeBytes, "snark/H"));
}

std::pair<Hash, std::shared_ptr<oracle::QueryDatabase>> Hash::recording() const {
  auto [f, db] = oracle::recording_wrap(f_);
  return {Hash(f), db};
}

Node Hash::node(const Node& left, const Node& right) const {
  oracle::Bytes in;
  in.reserve(1 + 2 * kNodeBytes);
  in.push_back(kNodeTag);
  in.insert(in.end(), left.begin(), left.end());
  in.insert(in.end(), right.begin(), right.end());
  return node_from(f_(in));
}

oracle::Bytes Hash::randomness(const Node& rt, size_t len) const {
  oracle::Bytes out;
  for (uint64_t ctr = 0; out.size() < len; ++ctr) {
    const oracle::Bytes tag{kRandomnessTag};
    const oracle::Bytes block = f_(oracle::concat({tag, rt, oracle::u64_le(ctr)}));
    out.insert(out.end(), block.begin(), block.end());
  }
  out.resize(len);
  return out;
}

// ---- Merkle ----

MerkleTree merkle_commit(const std::vector<Node>& leaves, const Hash& h) {
  if (leaves.empty()) throw std::invalid_argument("merkle_commit: empty list");
  MerkleTree t;
  t.depth = ceil_log2(leaves.size());
  t.levels.resize(t.depth + 1);
  t.levels[t.depth] = leaves;
  t.levels[t.depth].resize(size_t{1} << t.depth, sentinel_leaf());
  for (int k = t.depth - 1; k >= 0; --k) {
    const auto& below = t.levels[k + 1];
    auto& level = t.levels[k];
    level.resize(size_t{1} << k);
    for (size_t i = 0; i < level.size(); ++i) level[i] = h.node(below[2 * i], below[2 * i + 1]);
  }
  return t;
}

AuthPath merkle_path(const MerkleTree& t, uint32_t index) {
  if (index >= t.levels[t.depth].size()) throw std::out_of_range("merkle_path: index");
  AuthPath ap;
  ap.index = index;
  ap.value = t.levels[t.depth][index];
  uint32_t i = index;
  for (int k = t.depth; k > 0; --k, i >>= 1) ap.siblings.push_back(t.levels[k][i ^ 1]);
  return ap;
}

std::vector<HashPair> expand(const Hash& h, uint32_t index, const Node& value,
                             const std::vector<Node>& siblings) {
  std::vector<HashPair> out;
  Node cur = value;
  uint32_t i = index;
  for (const Node& s : siblings) {
    HashPair p = (i & 1) ? HashPair{s, cur, {}} : HashPair{cur, s, {}};
    p.out = h.node(p.left, p.right);
    cur = p.out;
    out.push_back(p);
    i >>= 1;
  }
  return out;
}

bool check_path(const Hash& h, const Node& rt, uint32_t index, const Node& value,
                const std::vector<Node>& siblings) {
  if (siblings.size() < 32 && (index >> siblings.size()) != 0) return false;
  const auto pairs = expand(h, index, value, siblings);
  const Node top = pairs.empty() ? value : pairs.back().out;
  return top == rt;
}

// ---- extraction ----

HashDatabase HashDatabase::from_queries(const oracle::QueryDatabase& db) {
  HashDatabase out;
  for (const auto& e : db.snapshot()) {
    if (e.input.size() != 1 + 2 * kNodeBytes || e.input[0] != kNodeTag) continue;
    const oracle::ByteView in(e.input);
    out.add(node_from(in.subspan(1)), node_from(in.subspan(1 + kNodeBytes)), node_from(e.output));
  }
  return out;
}

std::vector<std::optional<Node>> ExtractedTree::leaves() const {
  std::vector<std::optional<Node>> out(size_t{1} << depth);
  for (const auto& [s, u] : vertices) {
    if (static_cast<int>(s.size()) != depth) continue;
    size_t i = 0;
    for (char c : s) i = i << 1 | (c == '1');
    out[i] = u;
  }
  return out;
}

std::optional<ExtractedTree> extract_tree(const HashDatabase& d, const Node& rt, int depth) {
  std::map<Node, std::set<std::pair<Node, Node>>> preimages;
  for (const auto& e : d.entries) preimages[e.out].insert({e.left, e.right});
  ExtractedTree t;
  t.depth = depth;
  std::deque<std::pair<Node, std::string>> unmarked{{rt, ""}};
  t.vertices.push_back({"", rt});
  while (!unmarked.empty()) {
    auto [u, s] = unmarked.front();
    unmarked.pop_front();
    if (static_cast<int>(s.size()) >= depth) continue;
    const auto it = preimages.find(u);
    if (it == preimages.end()) continue;
    if (it->second.size() > 1) return std::nullopt;
    const auto& [x0, x1] = *it->second.begin();
    t.vertices.push_back({s + "0", x0});
    t.vertices.push_back({s + "1", x1});
    unmarked.push_back({x0, s + "0"});
    unmarked.push_back({x1, s + "1"});
  }
  return t;
}

// ---- PCPs ----

uint64_t Tape::next_u64() {
  if (pos_ + 8 > bytes_.size()) throw std::out_of_range("pcp tape exhausted");
  uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<uint64_t>(bytes_[pos_ + i]) << (8 * i);
  pos_ += 8;
  return v;
}

uint32_t Tape::below(uint32_t bound) { return static_cast<uint32_t>(next_u64() % bound); }

RepetitionPcp::RepetitionPcp(int m, int copies) : m_(m), copies_(copies) {
  if (m < 1 || copies < 2) throw std::invalid_argument("repetition pcp: need m >= 1, copies >= 2");
  depth_ = ceil_log2(static_cast<uint64_t>(m) * copies);
}

ProofString RepetitionPcp::prove(const Instance& x, const Witness& w) const {
  if (!relation(x, w)) throw std::invalid_argument(name() + ": witness does not satisfy the relation");
  ProofString p(length(), 0);
  for (int c = 0; c < copies_; ++c)
    for (int j = 0; j < m_; ++j) p[at(c, j)] = w[j];
  return p;
}

Witness RepetitionPcp::majority(const ProofString& proof) const {
  Witness w(m_, 0);
  for (int j = 0; j < m_; ++j) {
    int ones = 0;
    for (int c = 0; c < copies_; ++c) ones += proof.at(at(c, j)) == 1;
    w[j] = 2 * ones > copies_;
  }
  return w;
}

XorPreimagePcp::XorPreimagePcp(int m, uint64_t mask) : RepetitionPcp(m, kCopies), mask_(mask) {
  if (m < 3) throw std::invalid_argument("xor-preimage pcp: need m >= 3");
}

Instance XorPreimagePcp::image(const Witness& w) const {
  Instance x(m_);
  for (int j = 0; j < m_; ++j) x[j] = w[j] ^ w[(j + 1) % m_] ^ mask_bit(j);
  return x;
}

bool XorPreimagePcp::relation(const Instance& x, const Witness& w) const {
  return static_cast<int>(x.size()) == m_ && static_cast<int>(w.size()) == m_ && is_bits(w) &&
         image(w) == x;
}

QueryPlan XorPreimagePcp::plan(const Instance&, Tape& tape) const {
  QueryPlan p;
  for (int i = 0; i < kChecks; ++i) {
    const int j = static_cast<int>(tape.below(m_));
    const int c = static_cast<int>(tape.below(copies_));
    const int c2 = (c + 1 + static_cast<int>(tape.below(copies_ - 1))) % copies_;
    const int j1 = (j + 1) % m_;
    p.positions.insert(p.positions.end(), {at(c, j), at(c, j1), at(c2, j), at(c2, j1)});
    p.aux.push_back(static_cast<uint32_t>(j));
  }
  return p;
}

bool XorPreimagePcp::decide(const Instance& x, const QueryPlan& plan,
                            const std::vector<Symbol>& a) const {
  if (static_cast<int>(x.size()) != m_ || a.size() != plan.positions.size() || !is_bits(a)) return false;
  for (size_t i = 0; i < plan.aux.size(); ++i) {
    const int j = static_cast<int>(plan.aux[i]);
    const Symbol* v = &a[4 * i];
    if ((v[0] ^ v[1]) != (x[j] ^ mask_bit(j))) return false;
    if (v[0] != v[2] || v[1] != v[3]) return false;
  }
  return true;
}

Witness XorPreimagePcp::extract(const Instance&, const ProofString& proof) const {
  return majority(proof);
}

double XorPreimagePcp::knowledge_error() const {
  // A violated constraint of the majority decoding is picked w.p. 1/m; then
  // either copy c breaks it or c disagrees with the majority, which c' exposes
  // w.p. >= 1/2.
  return std::pow(1.0 - 1.0 / (2.0 * m_), kChecks);
}

CopyReadPcp::CopyReadPcp(std::string name, int m, Relation r)
    : RepetitionPcp(m, kCopies), name_(std::move(name)), rel_(std::move(r)) {}

QueryPlan CopyReadPcp::plan(const Instance&, Tape& tape) const {
  QueryPlan p;
  const int c = static_cast<int>(tape.below(copies_));
  for (int j = 0; j < m_; ++j) p.positions.push_back(at(c, j));
  p.aux.push_back(static_cast<uint32_t>(c));
  return p;
}

bool CopyReadPcp::decide(const Instance& x, const QueryPlan& plan, const std::vector<Symbol>& a) const {
  return a.size() == plan.positions.size() && is_bits(a) && rel_(x, a);
}

Witness CopyReadPcp::extract(const Instance& x, const ProofString& proof) const {
  for (int c = 0; c < copies_; ++c) {
    Witness w(proof.begin() + at(c, 0), proof.begin() + at(c, 0) + m_);
    if (is_bits(w) && rel_(x, w)) return w;
  }
  return majority(proof);
}

// ---- SNARK ----

oracle::Bytes SnarkProof::serialize() const {
  oracle::Bytes out(rt.begin(), rt.end());
  put_u32(out, static_cast<uint32_t>(entries.size()));
  for (const auto& e : entries) {
    if (e.path.size() > 255) throw std::length_error("snark proof: path too long");
    put_u32(out, e.index);
    out.push_back(e.value);
    out.push_back(static_cast<uint8_t>(e.path.size()));
    for (const Node& n : e.path) out.insert(out.end(), n.begin(), n.end());
  }
  return out;
}

std::optional<SnarkProof> SnarkProof::parse(oracle::ByteView bytes) {
  Reader r(bytes);
  SnarkProof p;
  if (!r.has(kNodeBytes + 4)) return std::nullopt;
  p.rt = r.node();
  const uint32_t q = r.u32();
  for (uint32_t i = 0; i < q; ++i) {
    if (!r.has(6)) return std::nullopt;
    QueryEntry e;
    e.index = r.u32();
    e.value = r.u8();
    const uint8_t len = r.u8();
    if (!r.has(size_t{len} * kNodeBytes)) return std::nullopt;
    for (int k = 0; k < len; ++k) e.path.push_back(r.node());
    p.entries.push_back(std::move(e));
  }
  if (!r.done()) return std::nullopt;
  return p;
}

size_t abstract_size(int q, int depth) {
  return kNodeBytes + static_cast<size_t>(q) * (sizeof(Symbol) + depth * kNodeBytes);
}

size_t wire_size(int q, int depth) { return abstract_size(q, depth) + 4 + static_cast<size_t>(q) * 5; }

QueryPlan derive_plan(const Hash& h, const Pcp& pcp, const Instance& x, const Node& rt) {
  Tape tape(h.randomness(rt, pcp.randomness_bytes()));
  return pcp.plan(x, tape);
}

SnarkProof prove(const Hash& h, const Pcp& pcp, const Instance& x, const Witness& w) {
  return prove_from_string(h, pcp, x, pcp.prove(x, w));
}

SnarkProof prove_from_string(const Hash& h, const Pcp& pcp, const Instance& x, const ProofString& pi) {
  if (pi.size() != pcp.length()) throw std::invalid_argument("snark: proof string has wrong length");
  std::vector<Node> leaves;
  leaves.reserve(pi.size());
  for (Symbol s : pi) leaves.push_back(leaf_of(s));
  const MerkleTree t = merkle_commit(leaves, h);
  SnarkProof proof;
  proof.rt = t.root();
  for (uint32_t pos : derive_plan(h, pcp, x, proof.rt).positions) {
    proof.entries.push_back({pos, pi[pos], merkle_path(t, pos).siblings});
  }
  return proof;
}

bool verify(const Hash& h, const Pcp& pcp, const Instance& x, const SnarkProof& proof) {
  const QueryPlan plan = derive_plan(h, pcp, x, proof.rt);
  if (proof.entries.size() != plan.positions.size()) return false;
  std::vector<Symbol> answers;
  answers.reserve(plan.positions.size());
  for (size_t i = 0; i < plan.positions.size(); ++i) {
    const QueryEntry& e = proof.entries[i];
    if (e.index != plan.positions[i]) return false;
    if (static_cast<int>(e.path.size()) != pcp.depth()) return false;
    if (!check_path(h, proof.rt, e.index, leaf_of(e.value), e.path)) return false;
    answers.push_back(e.value);
  }
  return pcp.decide(x, plan, answers);
}

ProofString proof_from_tree(const ExtractedTree& t, uint32_t length) {
  ProofString p(length, 0);
  const auto leaves = t.leaves();
  for (uint32_t i = 0; i < length && i < leaves.size(); ++i) {
    if (!leaves[i]) continue;
    if (auto s = symbol_of(*leaves[i])) p[i] = *s;
  }
  return p;
}

std::optional<Witness> find_witness(const HashDatabase& d, const Pcp& pcp, const Instance& x) {
  Witness w = pcp.extract(x, ProofString(pcp.length(), 0));
  if (pcp.relation(x, w)) return w;
  std::set<Node> tried;
  for (const auto& e : d.entries) {
    if (!tried.insert(e.out).second) continue;
    const auto t = extract_tree(d, e.out, pcp.depth());
    if (!t) continue;
    w = pcp.extract(x, proof_from_tree(*t, pcp.length()));
    if (pcp.relation(x, w)) return w;
  }
  return std::nullopt;
}

}  // namespace cosetlab::snark
