#include "cosetlab/oracleworld.h"

#include <gtest/gtest.h>

#include <cmath>
#include <set>

using namespace cosetlab;
using namespace cosetlab::oracle;

TEST(Seeds, HexIsLeftPadded) {
  Seed a = seed_from_hex("2a");
  Seed b = seed_from_u64(42);
  EXPECT_EQ(a, b);
  EXPECT_EQ(to_hex(a), std::string(62, '0') + "2a");
  EXPECT_THROW(seed_from_hex(std::string(65, '1')), std::invalid_argument);
  EXPECT_THROW(seed_from_hex("zz"), std::invalid_argument);
}

TEST(Seeds, DerivationSeparatesLabelsAndIndices) {
  Seed root = seed_from_u64(1);
  std::set<Seed> seen;
  for (const char* label : {"a", "b", "trial"})
    for (uint64_t i = 0; i < 10; ++i) EXPECT_TRUE(seen.insert(derive_seed(root, label, i)).second);
  EXPECT_EQ(derive_seed(root, "a", 3), derive_seed(root, "a", 3));
}

TEST(KeyedHash, LengthsAndCounterMode) {
  Bytes key = as_bytes("key");
  Bytes msg = as_bytes("message");
  for (size_t len : {1u, 16u, 32u, 64u, 65u, 200u}) EXPECT_EQ(keyed_hash(key, msg, len).size(), len);
  Bytes long_out = keyed_hash(key, msg, 150);
  Bytes block = keyed_hash(key, msg, 64);
  EXPECT_TRUE(std::equal(block.begin(), block.end(), long_out.begin()));
  EXPECT_NE(keyed_hash(key, msg, 32), keyed_hash(as_bytes("kez"), msg, 32));
}

TEST(PermHandle, TableModeIsBijectionAndInvertible) {
  for (int n : {1, 4, 10}) {
    PermHandle p(n, seed_from_u64(n));
    std::set<uint64_t> image;
    for (uint64_t x = 0; x < (uint64_t{1} << n); ++x) {
      uint64_t y = p.eval(x);
      EXPECT_LT(y, uint64_t{1} << n);
      image.insert(y);
      EXPECT_EQ(p.invert(y), x);
    }
    EXPECT_EQ(image.size(), uint64_t{1} << n);
    EXPECT_THROW(p.eval(uint64_t{1} << n), std::out_of_range);
    EXPECT_FALSE(p.invert(uint64_t{1} << n));
  }
}

TEST(PermHandle, QueryOrderDoesNotMatter) {
  PermHandle a(8, seed_from_u64(9)), b(8, seed_from_u64(9));
  std::vector<uint64_t> fwd;
  for (uint64_t x = 0; x < 256; ++x) fwd.push_back(a.eval(x));
  EXPECT_EQ(*b.invert(fwd[200]), 200u);
  for (uint64_t x = 256; x-- > 0;) EXPECT_EQ(b.eval(x), fwd[x]);
}

TEST(PermHandle, LazyModeStaysConsistent) {
  PermHandle p(40, seed_from_u64(3));
  std::set<uint64_t> image;
  for (uint64_t x = 0; x < 2000; ++x) image.insert(p.eval(x * 7919));
  EXPECT_EQ(image.size(), 2000u);
  for (uint64_t x = 0; x < 2000; ++x) EXPECT_EQ(p.invert(p.eval(x * 7919)), x * 7919);
  uint64_t y = 123456789;
  auto x = p.invert(y);
  ASSERT_TRUE(x);
  EXPECT_EQ(p.eval(*x), y);
}

TEST(FnHandle, DeterministicAndTruncated) {
  FnHandle f = FnHandle::random(seed_from_u64(5), 32);
  EXPECT_EQ(f(as_bytes("x")), f(as_bytes("x")));
  EXPECT_NE(f(as_bytes("x")), f(as_bytes("y")));
  EXPECT_LT(f.word(17, 5), 32u);
  EXPECT_THROW(f.word(1, 65), std::invalid_argument);
  EXPECT_THROW(FnHandle()(as_bytes("x")), std::logic_error);
}

TEST(Recording, RecordsEachInputOnce) {
  auto [f, db] = recording_wrap(FnHandle::random(seed_from_u64(6), 16));
  f(as_bytes("a"));
  f(as_bytes("b"));
  f(as_bytes("a"));
  EXPECT_EQ(db->size(), 2u);
  EXPECT_EQ(*db->lookup(as_bytes("b")), f(as_bytes("b")));
  EXPECT_FALSE(db->lookup(as_bytes("c")));
}

TEST(SmallRange, OutputsComeFromTheRangeAndCoverIt) {
  Rng rng(7);
  std::vector<Bytes> drawn;
  ValueSampler base = [&](Rng& r) {
    Bytes b{static_cast<uint8_t>(r()), static_cast<uint8_t>(r())};
    drawn.push_back(b);
    return b;
  };
  FnHandle f = small_range_fn(base, 4, rng);
  std::set<Bytes> allowed(drawn.begin(), drawn.end()), seen;
  for (uint64_t x = 0; x < 400; ++x) {
    Bytes y = f(u64_le(x));
    EXPECT_TRUE(allowed.count(y));
    seen.insert(y);
  }
  EXPECT_EQ(seen, allowed);
  EXPECT_THROW(small_range_fn(base, 0, rng), std::invalid_argument);
}

namespace {

CompressedOracleState random_state(int n_in, int n_out, Rng& rng) {
  CompressedOracleState s(n_in, n_out);
  s.clear();
  std::normal_distribution<double> g;
  const size_t dom = size_t{1} << n_in;
  std::vector<CompressedOracleState::Key> keys;
  for (int i = 0; i < 12; ++i) {
    CompressedOracleState::Key k;
    k.x = static_cast<uint32_t>(rng() % dom);
    k.u = static_cast<uint32_t>(rng() % (1u << n_out));
    k.db.resize(dom);
    for (auto& v : k.db) v = static_cast<uint8_t>(rng() % ((1u << n_out) + 1));
    keys.push_back(k);
  }
  double norm = 0;
  std::vector<CompressedOracleState::Complex> amps;
  for (size_t i = 0; i < keys.size(); ++i) {
    amps.emplace_back(g(rng), g(rng));
    norm += std::norm(amps.back());
  }
  for (size_t i = 0; i < keys.size(); ++i) s.set(keys[i], amps[i] / std::sqrt(norm));
  return s;
}

double distance(const CompressedOracleState& a, const CompressedOracleState& b) {
  std::map<CompressedOracleState::Key, CompressedOracleState::Complex> diff = a.terms();
  for (const auto& [k, v] : b.terms()) diff[k] -= v;
  double acc = 0;
  for (const auto& [k, v] : diff) acc += std::norm(v);
  return std::sqrt(acc);
}

}  // namespace

TEST(CompressedOracle, DecompIsAnInvolution) {
  Rng rng(11);
  for (int trial = 0; trial < 30; ++trial) {
    auto s = random_state(2, 2, rng);
    auto twice = decomp(decomp(s));
    EXPECT_LT(distance(s, twice), 1e-12);
    EXPECT_NEAR(decomp(s).norm(), 1.0, 1e-12);
  }
}

TEST(CompressedOracle, QueryPreservesNormAndBoundsDatabase) {
  Rng rng(12);
  CompressedOracleState s(3, 2);
  for (int q = 1; q <= 4; ++q) {
    if (q > 1) s = s.postselect_output(s.output_distribution().begin()->first);
    s.load_classical_query(static_cast<uint32_t>(rng() % 8));
    s = cstso_query(s);
    EXPECT_EQ(s.queries(), q);
    EXPECT_NEAR(s.norm(), 1.0, 1e-12);
    EXPECT_LE(s.max_db_size(), static_cast<size_t>(q));
  }
}

TEST(CompressedOracle, SingleQueryDatabaseDistribution) {
  // Without measuring the output register the database is empty with
  // probability 1/N and holds (x, y') with probability (N-1)/N^2 each.
  for (int n_out = 1; n_out <= 3; ++n_out) {
    const double big_n = 1 << n_out;
    const uint32_t x = 1;
    auto s = cstso_query(CompressedOracleState::basis(2, n_out, x, 0));
    auto dist = s.database_distribution();
    double total = 0;
    for (const auto& [db, p] : dist) {
      total += p;
      int defined = 0;
      for (size_t i = 0; i < db.size(); ++i) defined += db[i] != 0;
      if (defined == 0) {
        EXPECT_NEAR(p, 1 / big_n, 1e-12);
      } else {
        ASSERT_EQ(defined, 1);
        ASSERT_NE(db[x], 0);
        EXPECT_NEAR(p, (big_n - 1) / (big_n * big_n), 1e-12);
      }
    }
    EXPECT_NEAR(total, 1.0, 1e-12);
    // The output register itself is uniform.
    for (const auto& [y, p] : s.output_distribution()) EXPECT_NEAR(p, 1 / big_n, 1e-12);
  }
}

TEST(CompressedOracle, ClassicalTranscriptMatchesRandomFunction) {
  struct Case {
    int n_in, n_out;
    std::vector<uint32_t> xs;
  };
  std::vector<Case> cases = {
      {1, 1, {0, 1, 0}}, {2, 1, {3, 3, 1, 0}}, {2, 2, {0, 1, 0, 2}}, {3, 2, {5, 5, 2}}, {1, 3, {1, 0, 1}}};
  for (const auto& c : cases) {
    const uint64_t dom = uint64_t{1} << c.n_in, rng_size = uint64_t{1} << c.n_out;
    uint64_t n_fns = 1;
    for (uint64_t i = 0; i < dom; ++i) n_fns *= rng_size;
    std::map<std::vector<uint32_t>, double> brute;
    for (uint64_t code = 0; code < n_fns; ++code) {
      std::vector<uint32_t> table(dom);
      uint64_t rem = code;
      for (auto& v : table) {
        v = static_cast<uint32_t>(rem % rng_size);
        rem /= rng_size;
      }
      std::vector<uint32_t> t;
      for (uint32_t x : c.xs) t.push_back(table[x]);
      brute[t] += 1.0 / static_cast<double>(n_fns);
    }
    auto got = cstso_classical_transcript(c.n_in, c.n_out, c.xs);
    double tv = 0;
    for (const auto& [t, p] : brute) tv += std::abs(p - (got.count(t) ? got.at(t) : 0.0));
    for (const auto& [t, p] : got)
      if (!brute.count(t)) tv += p;
    EXPECT_LE(tv / 2, 1e-12) << "n_in=" << c.n_in << " n_out=" << c.n_out;
  }
}

TEST(CompressedOracle, RejectsOversizedOrMalformed) {
  EXPECT_THROW(CompressedOracleState(4, 3), std::invalid_argument);
  CompressedOracleState s(2, 1);
  CompressedOracleState::Key bad;
  bad.db.resize(3);
  EXPECT_THROW(s.set(bad, 1.0), std::invalid_argument);
  EXPECT_THROW(s.load_classical_query(4), std::out_of_range);
}
