#include "cosetlab/oracleworld.h"

#include <sodium.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <unordered_map>

namespace cosetlab::oracle {
namespace {

void ensure_sodium() {
  static const int rc = sodium_init();
  if (rc < 0) throw std::runtime_error("libsodium initialisation failed");
}

}  // namespace

std::string to_hex(ByteView b) {
  static const char* digits = "0123456789abcdef";
  std::string s;
  s.reserve(b.size() * 2);
  for (uint8_t c : b) {
    s += digits[c >> 4];
    s += digits[c & 0xf];
  }
  return s;
}

Bytes from_hex(std::string_view hex) {
  if (hex.size() % 2) throw std::invalid_argument("hex string must have even length");
  auto nib = [](char c) -> int {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    throw std::invalid_argument("bad hex digit");
  };
  Bytes out(hex.size() / 2);
  for (size_t i = 0; i < out.size(); ++i) {
    out[i] = static_cast<uint8_t>(nib(hex[2 * i]) << 4 | nib(hex[2 * i + 1]));
  }
  return out;
}

Seed seed_from_hex(std::string_view hex) {
  if (hex.starts_with("0x") || hex.starts_with("0X")) hex.remove_prefix(2);
  if (hex.empty() || hex.size() > 64) throw std::invalid_argument("seed must be 1..64 hex digits");
  std::string padded(64 - hex.size(), '0');
  padded += hex;
  Bytes b = from_hex(padded);
  Seed s;
  std::copy(b.begin(), b.end(), s.begin());
  return s;
}

Seed seed_from_u64(uint64_t v) {
  Seed s{};
  for (int i = 0; i < 8; ++i) s[31 - i] = static_cast<uint8_t>(v >> (8 * i));
  return s;
}

Seed derive_seed(const Seed& parent, std::string_view label, uint64_t index) {
  Bytes msg = concat({as_bytes(label), u64_le(index)});
  Bytes h = keyed_hash(parent, msg, 32);
  Seed s;
  std::copy(h.begin(), h.end(), s.begin());
  return s;
}

Rng rng_from_seed(const Seed& seed) {
  std::array<uint32_t, 8> words;
  for (int i = 0; i < 8; ++i) {
    words[i] = static_cast<uint32_t>(seed[4 * i]) | static_cast<uint32_t>(seed[4 * i + 1]) << 8 |
               static_cast<uint32_t>(seed[4 * i + 2]) << 16 |
               static_cast<uint32_t>(seed[4 * i + 3]) << 24;
  }
  std::seed_seq seq(words.begin(), words.end());
  return Rng(seq);
}

Bytes keyed_hash(ByteView key, ByteView msg, size_t out_len) {
  ensure_sodium();
  // BLAKE2b keys must be 16..64 bytes; shorter keys are hashed up first.
  Bytes k(key.begin(), key.end());
  if (k.size() < crypto_generichash_KEYBYTES_MIN || k.size() > crypto_generichash_KEYBYTES_MAX) {
    Bytes kk(32);
    crypto_generichash(kk.data(), kk.size(), k.data(), k.size(), nullptr, 0);
    k = kk;
  }
  Bytes out;
  out.reserve(out_len);
  for (uint64_t block = 0; out.size() < out_len; ++block) {
    const size_t want = std::min<size_t>(64, out_len - out.size());
    Bytes in = concat({u64_le(block), msg});
    uint8_t buf[64];
    crypto_generichash(buf, std::max<size_t>(want, crypto_generichash_BYTES_MIN), in.data(),
                       in.size(), k.data(), k.size());
    out.insert(out.end(), buf, buf + want);
  }
  return out;
}

Bytes concat(std::initializer_list<ByteView> parts) {
  Bytes out;
  for (auto p : parts) out.insert(out.end(), p.begin(), p.end());
  return out;
}

Bytes as_bytes(std::string_view s) { return Bytes(s.begin(), s.end()); }

Bytes u64_le(uint64_t v) {
  Bytes b(8);
  for (int i = 0; i < 8; ++i) b[i] = static_cast<uint8_t>(v >> (8 * i));
  return b;
}

struct PermHandle::State {
  int n_bits;
  Rng rng;
  std::mutex mu;
  std::vector<uint64_t> forward, backward;  // table mode
  std::unordered_map<uint64_t, uint64_t> fwd, bwd;  // lazy mode

  bool table_mode() const { return n_bits <= kTableBits; }
  uint64_t domain() const { return n_bits == 64 ? 0 : uint64_t{1} << n_bits; }
  uint64_t draw() {
    return n_bits == 64 ? rng() : rng() & (domain() - 1);
  }

  void build_table() {
    if (!forward.empty()) return;
    const uint64_t d = domain();
    forward.resize(d);
    std::iota(forward.begin(), forward.end(), 0);
    for (uint64_t i = d - 1; i > 0; --i) {
      std::uniform_int_distribution<uint64_t> pick(0, i);
      std::swap(forward[i], forward[pick(rng)]);
    }
    backward.resize(d);
    for (uint64_t x = 0; x < d; ++x) backward[forward[x]] = x;
  }
};

PermHandle::PermHandle(int n_bits, const Seed& seed) : state_(std::make_shared<State>()) {
  if (n_bits < 1 || n_bits > 64) throw std::invalid_argument("PermHandle: 1..64 bits");
  state_->n_bits = n_bits;
  state_->rng = rng_from_seed(seed);
}

int PermHandle::n_bits() const { return state_->n_bits; }

uint64_t PermHandle::eval(uint64_t x) const {
  State& s = *state_;
  if (s.n_bits < 64 && x >= s.domain()) throw std::out_of_range("PermHandle: input too wide");
  std::lock_guard lock(s.mu);
  if (s.table_mode()) {
    s.build_table();
    return s.forward[x];
  }
  if (auto it = s.fwd.find(x); it != s.fwd.end()) return it->second;
  uint64_t y;
  do {
    y = s.draw();
  } while (s.bwd.count(y));
  s.fwd[x] = y;
  s.bwd[y] = x;
  return y;
}

std::optional<uint64_t> PermHandle::invert(uint64_t y) const {
  State& s = *state_;
  if (s.n_bits < 64 && y >= s.domain()) return std::nullopt;
  std::lock_guard lock(s.mu);
  if (s.table_mode()) {
    s.build_table();
    return s.backward[y];
  }
  if (auto it = s.bwd.find(y); it != s.bwd.end()) return it->second;
  uint64_t x;
  do {
    x = s.draw();
  } while (s.fwd.count(x));
  s.fwd[x] = y;
  s.bwd[y] = x;
  return x;
}

FnHandle::FnHandle(std::string descriptor, size_t out_bytes, Evaluator eval)
    : descriptor_(std::move(descriptor)),
      out_bytes_(out_bytes),
      eval_(std::make_shared<const Evaluator>(std::move(eval))) {}

FnHandle FnHandle::random(const Seed& seed, size_t out_bytes, std::string descriptor) {
  return FnHandle(std::move(descriptor), out_bytes,
                  [seed, out_bytes](ByteView in) { return keyed_hash(seed, in, out_bytes); });
}

Bytes FnHandle::operator()(ByteView in) const {
  if (!eval_) throw std::logic_error("FnHandle: empty handle");
  return (*eval_)(in);
}

uint64_t FnHandle::word(uint64_t x, int out_bits) const {
  if (out_bits < 0 || out_bits > 64 || static_cast<size_t>(out_bits) > 8 * out_bytes_) {
    throw std::invalid_argument("FnHandle::word: bad output width");
  }
  Bytes out = (*this)(u64_le(x));
  uint64_t w = 0;
  for (size_t i = 0; i < std::min<size_t>(8, out.size()); ++i) w |= uint64_t{out[i]} << (8 * i);
  return out_bits == 64 ? w : w & ((uint64_t{1} << out_bits) - 1);
}

bool QueryDatabase::record(const Bytes& input, const Bytes& output) {
  std::lock_guard lock(mu_);
  if (index_.count(input)) return false;
  index_[input] = entries_.size();
  entries_.push_back({input, output});
  return true;
}

std::optional<Bytes> QueryDatabase::lookup(const Bytes& input) const {
  std::lock_guard lock(mu_);
  auto it = index_.find(input);
  if (it == index_.end()) return std::nullopt;
  return entries_[it->second].output;
}

std::vector<QueryDatabase::Entry> QueryDatabase::snapshot() const {
  std::lock_guard lock(mu_);
  return entries_;
}

size_t QueryDatabase::size() const {
  std::lock_guard lock(mu_);
  return entries_.size();
}

std::pair<FnHandle, std::shared_ptr<QueryDatabase>> recording_wrap(const FnHandle& f) {
  auto db = std::make_shared<QueryDatabase>();
  FnHandle wrapped(f.descriptor() + "+recorded", f.out_bytes(), [f, db](ByteView in) {
    Bytes out = f(in);
    db->record(Bytes(in.begin(), in.end()), out);
    return out;
  });
  return {wrapped, db};
}

FnHandle small_range_fn(const ValueSampler& base, size_t r, Rng& rng) {
  if (r == 0) throw std::invalid_argument("small_range_fn: r must be positive");
  auto values = std::make_shared<std::vector<Bytes>>();
  for (size_t i = 0; i < r; ++i) values->push_back(base(rng));
  Seed key;
  for (auto& b : key) b = static_cast<uint8_t>(rng());
  const size_t out = values->front().size();
  return FnHandle("small-range/" + std::to_string(r), out, [values, key, r](ByteView in) {
    // Rejection sampling keeps the index exactly uniform on [r].
    const uint64_t limit = (~uint64_t{0} / r) * r;
    for (uint64_t ctr = 0;; ++ctr) {
      Bytes h = keyed_hash(key, concat({u64_le(ctr), in}), 8);
      uint64_t v = 0;
      for (int i = 0; i < 8; ++i) v |= uint64_t{h[i]} << (8 * i);
      if (v < limit) return (*values)[v % r];
    }
  });
}

CompressedOracleState::CompressedOracleState(int n_in, int n_out) : n_in_(n_in), n_out_(n_out) {
  if (n_in < 1 || n_out < 1 || n_in + n_out > kMaxTotalBits) {
    throw std::invalid_argument("compressed oracle: n_in + n_out must be at most 6");
  }
  Key k;
  k.db.assign(size_t{1} << n_in, 0);
  terms_[k] = 1;
}

CompressedOracleState CompressedOracleState::basis(int n_in, int n_out, uint32_t x, uint32_t u) {
  CompressedOracleState s(n_in, n_out);
  if (x >= (1u << n_in) || u >= (1u << n_out)) throw std::out_of_range("compressed oracle: register value");
  Key k;
  k.x = x;
  k.u = u;
  k.db.assign(size_t{1} << n_in, 0);
  s.terms_.clear();
  s.terms_[k] = 1;
  return s;
}

void CompressedOracleState::set(const Key& k, Complex a) {
  if (k.db.size() != (size_t{1} << n_in_) || k.x >= (1u << n_in_) || k.u >= (1u << n_out_)) {
    throw std::invalid_argument("compressed oracle: malformed key");
  }
  if (a == Complex(0)) {
    terms_.erase(k);
  } else {
    terms_[k] = a;
  }
}

double CompressedOracleState::norm() const {
  double acc = 0;
  for (const auto& [k, a] : terms_) acc += std::norm(a);
  return std::sqrt(acc);
}

size_t CompressedOracleState::max_db_size() const {
  size_t m = 0;
  for (const auto& [k, a] : terms_) {
    m = std::max<size_t>(m, std::count_if(k.db.begin(), k.db.end(), [](uint8_t v) { return v; }));
  }
  return m;
}

void CompressedOracleState::decomp() {
  const uint32_t n_y = 1u << n_out_;
  const double inv = 1.0 / std::sqrt(static_cast<double>(n_y));
  std::map<Key, Complex> out;
  auto add = [&](const Key& k, Complex a) { out[k] += a; };
  for (const auto& [k, a] : terms_) {
    if (k.db[k.x] == 0) {
      // |D> -> uniform superposition over D with x assigned.
      for (uint32_t y = 0; y < n_y; ++y) {
        Key kk = k;
        kk.db[k.x] = static_cast<uint8_t>(y + 1);
        add(kk, a * inv);
      }
    } else {
      // |D> -> |D> - phi1/sqrt(N) + |D without x>/sqrt(N)
      add(k, a);
      Key removed = k;
      removed.db[k.x] = 0;
      add(removed, a * inv);
      for (uint32_t y = 0; y < n_y; ++y) {
        Key kk = k;
        kk.db[k.x] = static_cast<uint8_t>(y + 1);
        add(kk, -a * inv * inv);
      }
    }
  }
  terms_.clear();
  for (auto& [k, a] : out) {
    if (std::abs(a) > 1e-15) terms_[k] = a;
  }
}

void CompressedOracleState::cstoprime() {
  std::map<Key, Complex> out;
  for (const auto& [k, a] : terms_) {
    Key kk = k;
    if (k.db[k.x]) kk.u ^= static_cast<uint32_t>(k.db[k.x] - 1);
    out[kk] += a;
  }
  terms_ = std::move(out);
}

void CompressedOracleState::load_classical_query(uint32_t x) {
  if (x >= (1u << n_in_)) throw std::out_of_range("compressed oracle: query input");
  std::map<Key, Complex> out;
  const Key* first = terms_.empty() ? nullptr : &terms_.begin()->first;
  for (const auto& [k, a] : terms_) {
    if (k.x != first->x || k.u != first->u) {
      throw std::logic_error("compressed oracle: query registers are not classical");
    }
    Key kk = k;
    kk.x = x;
    kk.u = 0;
    out[kk] += a;
  }
  terms_ = std::move(out);
}

std::map<uint32_t, double> CompressedOracleState::output_distribution() const {
  std::map<uint32_t, double> d;
  for (const auto& [k, a] : terms_) d[k.u] += std::norm(a);
  return d;
}

CompressedOracleState CompressedOracleState::postselect_output(uint32_t y) const {
  CompressedOracleState s = *this;
  s.terms_.clear();
  double p = 0;
  for (const auto& [k, a] : terms_) {
    if (k.u == y) {
      s.terms_[k] = a;
      p += std::norm(a);
    }
  }
  if (p == 0) throw std::logic_error("compressed oracle: postselecting a zero-probability outcome");
  for (auto& [k, a] : s.terms_) a /= std::sqrt(p);
  return s;
}

std::map<std::vector<uint8_t>, double> CompressedOracleState::database_distribution() const {
  std::map<std::vector<uint8_t>, double> d;
  for (const auto& [k, a] : terms_) d[k.db] += std::norm(a);
  return d;
}

CompressedOracleState decomp(const CompressedOracleState& s) {
  CompressedOracleState out = s;
  out.decomp();
  return out;
}

CompressedOracleState cstso_query(const CompressedOracleState& s) {
  CompressedOracleState out = s;
  out.increase();
  out.decomp();
  out.cstoprime();
  out.decomp();
  return out;
}

namespace {

void transcript_rec(const CompressedOracleState& s, const std::vector<uint32_t>& xs, size_t i,
                    std::vector<uint32_t>& prefix, double weight,
                    std::map<std::vector<uint32_t>, double>& out) {
  if (i == xs.size()) {
    out[prefix] += weight;
    return;
  }
  CompressedOracleState t = s;
  t.load_classical_query(xs[i]);
  t = cstso_query(t);
  for (const auto& [y, p] : t.output_distribution()) {
    if (p < 1e-14) continue;
    prefix.push_back(y);
    transcript_rec(t.postselect_output(y), xs, i + 1, prefix, weight * p, out);
    prefix.pop_back();
  }
}

}  // namespace

std::map<std::vector<uint32_t>, double> cstso_classical_transcript(
    int n_in, int n_out, const std::vector<uint32_t>& xs) {
  std::map<std::vector<uint32_t>, double> out;
  std::vector<uint32_t> prefix;
  transcript_rec(CompressedOracleState(n_in, n_out), xs, 0, prefix, 1.0, out);
  return out;
}

}  // namespace cosetlab::oracle
