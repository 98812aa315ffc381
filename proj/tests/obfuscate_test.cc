#include "cosetlab/obfuscate.h"

#include <gtest/gtest.h>

#include <thread>

using namespace cosetlab;
using namespace cosetlab::obf;

namespace {

Bits bits_of(uint64_t v, int n) {
  Bits x(n);
  for (int i = 0; i < n; ++i) x[i] = (v >> (n - 1 - i)) & 1;
  return x;
}

// Direct step-by-step interpretation with a map-backed tape.
Bits reference_run(const TuringMachine& m, const Bits& x) {
  std::map<long, int> tape;
  for (size_t i = 0; i < x.size(); ++i) tape[static_cast<long>(i)] = x[i];
  auto read = [&](long i) { auto it = tape.find(i); return it == tape.end() ? int{kBlank} : it->second; };
  long head = 0;
  int state = 0;
  for (int step = 0; step < m.max_steps; ++step) {
    const auto& t = m.table[state * 3 + read(head)];
    tape[head] = t.write;
    head = std::max(0L, head + t.move);
    if (t.next == kHalt) break;
    state = t.next;
  }
  Bits out;
  for (int i = 0; i < m.out_bits; ++i) out.push_back(read(head + i) == 1);
  return out;
}

}  // namespace

TEST(TuringMachine, IdentityParityAndReference) {
  const auto id = identity_program(5, 3);
  EXPECT_EQ(id.run({1, 0, 1, 1, 0}), (Bits{1, 0, 1}));
  const auto par = parity_program(4);
  for (uint64_t v = 0; v < 16; ++v) EXPECT_EQ(par.run(bits_of(v, 4)), Bits{uint8_t(__builtin_popcountll(v) & 1)});
  Rng rng(1);
  for (int t = 0; t < 500; ++t) {
    const int n = 1 + static_cast<int>(rng() % 6);
    auto m = random_program(n, 1 + static_cast<int>(rng() % 3), 1 + static_cast<int>(rng() % 4), rng);
    Bits x = bits_of(rng(), n);
    ASSERT_EQ(m.run(x), reference_run(m, x));
  }
}

TEST(TuringMachine, SerializationRoundTripAndRejects) {
  Rng rng(2);
  auto m = random_program(3, 2, 3, rng);
  EXPECT_EQ(*TuringMachine::parse(m.serialize()), m);
  auto b = m.serialize();
  b[6] = 9;  // move byte out of range
  EXPECT_FALSE(TuringMachine::parse(b).has_value());
  b = m.serialize();
  b.pop_back();
  EXPECT_FALSE(TuringMachine::parse(b).has_value());
}

TEST(SObf, HonestEvaluationMatchesDirectRun) {
  Rng rng(3);
  for (int t = 0; t < 1000; ++t) {
    const int n = 1 + static_cast<int>(rng() % 4);
    auto p = random_program(n, 1 + static_cast<int>(rng() % 2), 1 + static_cast<int>(rng() % 3), rng);
    auto o = sobf_obfuscate(p, oracle::seed_from_u64(1000 + t));
    Bits x = bits_of(rng(), n);
    auto r = sobf_eval(o, x);
    ASSERT_EQ(r.stage, "ok");
    ASSERT_EQ(*r.y, reference_run(p, x));
  }
}

TEST(SObf, IdentityProgram) {
  auto o = sobf_obfuscate(identity_program(4, 2), oracle::seed_from_u64(4));
  EXPECT_EQ(*sobf_eval(o, {1, 0, 0, 1}).y, (Bits{1, 0}));
  EXPECT_EQ(*sobf_eval(o, {0, 1, 1, 1}).y, (Bits{0, 1}));
}

TEST(SObf, SuccinctAcrossCorpus) {
  Rng rng(5);
  for (int states = 1; states <= kMaxStates; ++states) {
    auto p = random_program(4, 1, states, rng);
    auto o = sobf_obfuscate(p, oracle::seed_from_u64(states));
    EXPECT_LE(o.size_bytes(), sobf_size_bound(p.serialize().size()));
    // |pp| tracks |P|, not the running time
    EXPECT_EQ(o.pp().byte_size(), homenc::ciphertext_size_bound(8 * p.serialize().size()));
  }
}

TEST(SObf, GarbageAndTamperedProofsRejected) {
  auto p = parity_program(3);
  auto o = sobf_obfuscate(p, oracle::seed_from_u64(6));
  snark::SnarkProof garbage;
  auto honest = sobf_eval(o, {1, 1, 0});
  ASSERT_EQ(honest.stage, "ok");
  EXPECT_FALSE(o.oracle()(honest.ct_prime, garbage).has_value());
  EXPECT_EQ(sobf_eval(o, {1, 1, 0}, Tamper::kCiphertext).stage, "oracle");
  EXPECT_EQ(sobf_eval(o, {1, 1, 0}, Tamper::kProof).stage, "oracle");
}

TEST(SObf, ReplayedProofForOtherInputRejected) {
  auto o = sobf_obfuscate(parity_program(3), oracle::seed_from_u64(7));
  auto a = sobf_eval(o, {1, 0, 0});
  auto b = sobf_eval(o, {1, 1, 0});
  ASSERT_NE(a.ct_prime, b.ct_prime);
  EXPECT_FALSE(o.oracle()(b.ct_prime, a.pi).has_value());
  EXPECT_FALSE(o.oracle()(a.ct_prime, b.pi).has_value());
  EXPECT_EQ(*o.oracle()(a.ct_prime, a.pi), (Bits{1}));
}

TEST(SObf, DecryptionOnlyAfterVerification) {
  auto o = sobf_obfuscate(parity_program(2), oracle::seed_from_u64(8));
  for (uint64_t v = 0; v < 4; ++v) {
    sobf_eval(o, bits_of(v, 2));
    sobf_eval(o, bits_of(v, 2), Tamper::kProof);
  }
  const auto& s = o.oracle().stats();
  EXPECT_EQ(s.calls, 8u);
  EXPECT_EQ(s.passes, 4u);
  EXPECT_EQ(s.decryptions, s.passes.load());
}

TEST(Universal, CircuitInterpreterMatchesCorpus) {
  for (const auto& [name, c] : pvqfhe::circuit_corpus()) {
    const Bits plain = homenc::bytes_to_bits(c.serialize());
    for (uint64_t v = 0; v < 4; ++v) {
      const Bits x = bits_of(v, 2);
      EXPECT_EQ(universal_circuit(x).run(plain), c.evaluate(x)) << name;
    }
  }
  EXPECT_THROW(universal_circuit({1, 0}).run({1, 0, 1}), std::invalid_argument);
}

TEST(QObf, TruthTablesMatchDenseSimulation) {
  uint64_t seed = 10;
  for (const auto& [name, c] : pvqfhe::circuit_corpus()) {
    auto o = qobf_obfuscate(c, oracle::seed_from_u64(seed++));
    Rng rng(seed);
    for (uint64_t v = 0; v < 4; ++v) {
      const Bits x = bits_of(v, 2);
      auto r = qobf_eval(o, x, rng);
      ASSERT_EQ(r.stage, "ok") << name;
      EXPECT_EQ(*r.bit, c.prob_one(x) > 0.5 ? 1 : 0) << name << " x=" << v;
      EXPECT_LE(r.proof_bytes, pvqfhe::proof_size_bound(pvqfhe::Params{}, 8));
    }
    EXPECT_LE(o.size_bytes(), qobf_size_bound(c.serialize().size()));
  }
}

TEST(QObf, ConstantZeroAndRepeatability) {
  auto o = qobf_obfuscate(pvqfhe::constant0_circuit(), oracle::seed_from_u64(20));
  Rng rng(20);
  for (uint64_t v = 0; v < 4; ++v) EXPECT_EQ(*qobf_eval(o, bits_of(v, 2), rng).bit, 0);
  auto a = qobf_obfuscate(pvqfhe::and_circuit(), oracle::seed_from_u64(21));
  for (int i = 0; i < 100; ++i) ASSERT_EQ(*qobf_eval(a, {1, 1}, rng).bit, 1);
}

TEST(QObf, EveryTamperModeRejected) {
  auto o = qobf_obfuscate(pvqfhe::parity_circuit(), oracle::seed_from_u64(30));
  Rng rng(30);
  const std::map<Tamper, std::string> want{{Tamper::kCiphertext, "ct_mismatch"},
                                           {Tamper::kProof, "priv_ver"},
                                           {Tamper::kOpening, "dec_z"},
                                           {Tamper::kSignature, "signature"}};
  for (int rep = 0; rep < 5; ++rep)
    for (const auto& [t, stage] : want) {
      auto r = qobf_eval(o, bits_of(rep % 4, 2), rng, t);
      EXPECT_FALSE(r.bit.has_value()) << tamper_name(t);
      EXPECT_EQ(r.stage, stage) << tamper_name(t);
    }
  const auto& s = o.dk().stats();
  EXPECT_EQ(s.passes, 0u);
  EXPECT_EQ(s.decryptions, 0u);
  EXPECT_EQ(s.calls, 20u);
}

TEST(QObf, GuardCounterAndFailedVerification) {
  auto o = qobf_obfuscate(pvqfhe::and_circuit(), oracle::seed_from_u64(40));
  Rng rng(40);
  qobf_eval(o, {1, 0}, rng);
  qobf_eval(o, {1, 0}, rng, Tamper::kSignature);
  // proof for x presented with a different x: U_x differs, so Ver fails
  auto e = pvqfhe::eval(o.pp(), o.ct(), universal_circuit({1, 1}), rng);
  std::string stage;
  EXPECT_FALSE(o.dk()({0, 1}, *e.ct_tilde, e.pi, &stage).has_value());
  EXPECT_EQ(stage, "signature");
  EXPECT_EQ(*o.dk()({1, 1}, *e.ct_tilde, e.pi), 1);
  const auto& s = o.dk().stats();
  EXPECT_EQ(s.calls, 4u);
  EXPECT_EQ(s.passes, 2u);
  EXPECT_EQ(s.decryptions, 2u);
}

TEST(QObf, ConcurrentEvaluation) {
  auto o = qobf_obfuscate(pvqfhe::and_circuit(), oracle::seed_from_u64(50));
  std::vector<std::thread> th;
  std::atomic<int> bad{0};
  for (int w = 0; w < 4; ++w)
    th.emplace_back([&, w] {
      Rng rng(50 + w);
      for (uint64_t v = 0; v < 4; ++v)
        if (qobf_eval(o, bits_of(v, 2), rng).bit != static_cast<int>(v == 3)) ++bad;
    });
  for (auto& t : th) t.join();
  EXPECT_EQ(bad, 0);
  EXPECT_EQ(o.dk().stats().decryptions, 16u);
}

TEST(Tamper, Names) {
  for (auto t : {Tamper::kNone, Tamper::kCiphertext, Tamper::kProof, Tamper::kOpening, Tamper::kSignature})
    EXPECT_EQ(parse_tamper(tamper_name(t)), t);
  EXPECT_THROW(parse_tamper("nope"), std::invalid_argument);
}
