#include "cosetlab/oss.h"

#include <gtest/gtest.h>

#include <cmath>
#include <set>

#include "cosetlab/densesim.h"

using namespace cosetlab;
using namespace cosetlab::oss;
using gf2::Vector;

namespace {

OssOracles make(int n, int r, uint64_t seed) {
  return OssOracles::setup(OssParams{n, r, 2, n}, oracle::seed_from_u64(seed));
}

std::set<uint64_t> brute_coset(const CosetData& c) {
  std::set<uint64_t> out;
  for (uint64_t z = 0; z < (uint64_t{1} << c.a.cols()); ++z)
    out.insert((c.a * Vector(c.a.cols(), z) ^ c.b).bits());
  return out;
}

// Exact probability that the naive cloner's second measurement yields a
// member of S_y other than the first one, by dense simulation.
double cloner_win_probability(const OssOracles& o, uint64_t y) {
  const gf2::Coset s = o.coset(y);
  const int k = o.params().k;
  double total = 0;
  for (const auto& u : s.members()) {
    auto st = dense::hadamard_all(dense::StateVector::basis(k, u.bits()));
    st = dense::phase_oracle(st, [&](const Vector& v) { return o.D(y, v); });
    st = dense::hadamard_all(st);
    for (const auto& u2 : s.members())
      if (u2 != u) total += std::norm(st.amplitude(u2.bits()));
  }
  return total / static_cast<double>(s.size());
}

}  // namespace

TEST(OssParams, Validation) {
  EXPECT_NO_THROW(OssParams{}.validate());
  EXPECT_THROW((OssParams{8, 8, 2, 8}.validate()), std::invalid_argument);
  EXPECT_THROW((OssParams{8, 7, 2, 8}.validate()), std::invalid_argument);
  EXPECT_THROW((OssParams{8, 3, 2, 7}.validate()), std::invalid_argument);
  EXPECT_THROW(OssOracles::setup(OssParams{4, 3, 1, 4}, oracle::seed_from_u64(1)),
               std::invalid_argument);
}

TEST(OssSetup, ZeroVectorIsAlwaysDual) {
  auto o = make(8, 3, 1);
  for (uint64_t y = 0; y < 8; ++y) EXPECT_TRUE(o.D(y, Vector(8)));
}

TEST(OssSetup, InverseUndoesP) {
  auto o = make(8, 3, 2);
  Rng rng(2);
  for (int i = 0; i < 1000; ++i) {
    const uint64_t x = rng() & 0xff;
    auto [y, u] = o.P(x);
    EXPECT_EQ(o.P_inv(y, u), x);
  }
}

TEST(OssSetup, DMatchesBruteForceDual) {
  auto o = make(8, 3, 3);
  for (uint64_t y = 0; y < 8; ++y) {
    const CosetData& c = o.coset_data(y);
    EXPECT_EQ(c.a.rank(), 5);
    std::vector<uint64_t> span;
    for (uint64_t z = 0; z < 32; ++z) span.push_back((c.a * Vector(5, z)).bits());
    for (uint64_t v = 0; v < 256; ++v) {
      bool orth = true;
      for (uint64_t s : span) orth = orth && !Vector(8, v).dot(Vector(8, s));
      ASSERT_EQ(o.D(y, Vector(8, v)), orth);
    }
  }
}

TEST(OssSetup, ImageOfPIsExactlyTheCosets) {
  for (uint64_t seed : {4, 5}) {
    auto o = make(8, 3, seed);
    std::map<uint64_t, std::set<uint64_t>> image;
    for (uint64_t x = 0; x < 256; ++x) {
      auto [y, u] = o.P(x);
      EXPECT_TRUE(image[y].insert(u.bits()).second) << "P is not injective";
    }
    ASSERT_EQ(image.size(), 8u);
    for (const auto& [y, us] : image) EXPECT_EQ(us, brute_coset(o.coset_data(y)));
    for (uint64_t y = 0; y < 8; ++y)
      for (uint64_t u = 0; u < 256; ++u)
        EXPECT_EQ(o.P_inv(y, Vector(8, u)).has_value(), image[y].count(u) == 1);
  }
}

TEST(OssGen, KeyIsTheCosetOfTheVerificationKey) {
  auto o = make(8, 3, 6);
  Rng rng(6);
  for (int i = 0; i < 50; ++i) {
    OssToken t = gen(o, rng);
    std::set<uint64_t> members;
    for (const auto& v : t.sk().members()) members.insert(v.bits());
    EXPECT_EQ(members, brute_coset(o.coset_data(t.vk())));
    EXPECT_TRUE(cosets::BalancedCoset::is_balanced(t.sk()));
  }
}

TEST(OssGen, SameSeedSameVerificationKey) {
  auto o1 = make(8, 3, 7), o2 = make(8, 3, 7);
  Rng a(7), b(7);
  EXPECT_EQ(gen(o1, a).vk(), gen(o2, b).vk());
}

TEST(OssGen, DenseCircuitMatchesSymbolicGen) {
  // Registers X (n) | Y (r) | U (k = n), 10 qubits at n = 4.
  const int n = 4, r = 2, k = 4;
  for (uint64_t seed : {8, 9, 10}) {
    auto o = make(n, r, seed);
    const int total = n + r + k;
    std::vector<dense::Complex> amps(uint64_t{1} << total);
    const double a = 1.0 / std::sqrt(16.0);
    for (uint64_t x = 0; x < 16; ++x) {
      auto [y, u] = o.P(x);
      amps[x << (r + k) | y << k | u.bits()] = a;  // P applied to |x>|0>|0>
    }
    auto st = dense::StateVector::from_amplitudes(total, amps);
    auto y_dist = dense::outcome_distribution(st, {n, n + 1});
    std::vector<double> brute(4, 0.0);
    for (uint64_t x = 0; x < 16; ++x) brute[o.H(x)] += 1.0 / 16;
    for (uint64_t y = 0; y < 4; ++y) {
      EXPECT_NEAR(y_dist[y], brute[y], 1e-12);
      // Post-measurement state, then uncompute X with P^-1.
      std::vector<dense::Complex> post(uint64_t{1} << total);
      for (uint64_t i = 0; i < st.dim(); ++i) {
        if (((i >> k) & 3) != y || st.amplitude(i) == dense::Complex(0)) continue;
        const uint64_t x = i >> (r + k);
        const Vector u(k, i & 15);
        auto xi = o.P_inv(y, u);
        ASSERT_TRUE(xi);
        post[(x ^ *xi) << (r + k) | (i & ((1u << (r + k)) - 1))] +=
            st.amplitude(i) / std::sqrt(y_dist[y]);
      }
      auto ps = dense::StateVector::from_amplitudes(total, post);
      std::vector<dense::Complex> u_only(16);
      for (uint64_t i = 0; i < ps.dim(); ++i) {
        if (ps.amplitude(i) == dense::Complex(0)) continue;
        ASSERT_EQ(i >> (r + k), 0u) << "X register not uncomputed";
        u_only[i & 15] += ps.amplitude(i);
      }
      auto expect = dense::coset_to_state(o.coset(y));
      EXPECT_TRUE(dense::equal_up_to_phase(dense::StateVector::from_amplitudes(k, u_only), expect));
    }
  }
}

TEST(OssSign, HonestSignaturesVerify) {
  for (uint64_t seed = 0; seed < 1000; ++seed) {
    auto o = make(8, 3, seed);
    Rng rng(seed);
    OssToken t = gen(o, rng);
    const uint64_t vk = t.vk();
    const int m = static_cast<int>(seed & 1);
    const auto members = brute_coset(o.coset_data(vk));
    SignResult s = sign(o, std::move(t), m, rng);
    ASSERT_TRUE(s.ok());
    EXPECT_EQ(s.sigma.first(), m == 1);
    EXPECT_TRUE(members.count(s.sigma.bits()));
    EXPECT_TRUE(verify(o, vk, m, s.sigma));
    EXPECT_FALSE(verify(o, vk, 1 - m, s.sigma));
  }
}

TEST(OssSign, BothBranchesReached) {
  auto o = make(8, 3, 11);
  Rng rng(11);
  int rotated = 0;
  for (int i = 0; i < 200; ++i) {
    SignResult s = sign(o, gen(o, rng), 1, rng);
    ASSERT_TRUE(s.ok());
    rotated += s.rotated;
  }
  EXPECT_GT(rotated, 50);
  EXPECT_LT(rotated, 150);
}

TEST(OssSign, TokenIsSingleUse) {
  auto o = make(8, 3, 12);
  Rng rng(12);
  OssToken t = gen(o, rng);
  OssToken moved = std::move(t);
  EXPECT_TRUE(t.used());
  EXPECT_THROW(sign(o, std::move(t), 0, rng), std::logic_error);
  EXPECT_TRUE(sign(o, std::move(moved), 0, rng).ok());
  EXPECT_THROW(sign(o, std::move(moved), 1, rng), std::logic_error);
}

TEST(OssSign, UnbalancedCosetAbortsOnTheMissingBit) {
  // With n - r = 2 the first row of A_y vanishes for about a quarter of y.
  for (uint64_t seed = 0; seed < 200; ++seed) {
    auto o = make(6, 4, seed);
    for (uint64_t y = 0; y < 16; ++y) {
      const gf2::Coset c = o.coset(y);
      if (cosets::BalancedCoset::is_balanced(c)) continue;
      const int bit = c.shift().first();
      Rng rng(seed);
      EXPECT_TRUE(sign(o, OssToken(y, c), bit, rng).ok());
      SignResult bad = sign(o, OssToken(y, c), 1 - bit, rng);
      EXPECT_EQ(bad.status, SignResult::Status::kAbort);
      return;
    }
  }
  FAIL() << "no unbalanced coset found";
}

TEST(OssVerify, RejectsTamperedSignatures) {
  auto o = make(8, 3, 13);
  Rng rng(13);
  for (int i = 0; i < 50; ++i) {
    OssToken t = gen(o, rng);
    const uint64_t vk = t.vk();
    const gf2::Coset s_y = t.sk();
    SignResult s = sign(o, std::move(t), 1, rng);
    for (int bit = 1; bit < 8; ++bit) {
      Vector f = s.sigma;
      f.flip(bit);
      if (!s_y.contains(f)) EXPECT_FALSE(verify(o, vk, 1, f));
    }
    EXPECT_FALSE(verify(o, vk, 0, s.sigma));
    EXPECT_FALSE(verify(o, 8, 1, s.sigma));
  }
}

TEST(OssForgery, HonestAndDuplicateAdversariesLose) {
  auto o = make(8, 3, 14);
  Rng rng(14);
  for (int i = 0; i < 20; ++i) EXPECT_FALSE(forgery_game(o, honest_adversary(), rng).win);
  Adversary dup = [](OracleAccess& acc, Rng& r) {
    OssToken t = acc.gen(r);
    const uint64_t vk = t.vk();
    SignResult s = acc.sign(std::move(t), 1, r);
    return Forgery{vk, 1, s.sigma, 1, s.sigma};
  };
  EXPECT_FALSE(forgery_game(o, dup, rng).win);
}

TEST(OssForgery, NaiveClonerMatchesDenseProbability) {
  const int n = 6, r = 3;
  auto o = make(n, r, 15);
  double exact = 0;
  for (uint64_t y = 0; y < 8; ++y) {
    const double p = cloner_win_probability(o, y);
    EXPECT_NEAR(p, 4.0 * 7 / 64, 1e-12);  // 4(|S|-1)/|S|^2, |S| = 8
    exact += p / 8;
  }
  Rng rng(15);
  const int trials = 10000;
  int wins = 0;
  for (int i = 0; i < trials; ++i) {
    auto res = forgery_game(o, naive_cloner(), rng);
    wins += res.win;
    ASSERT_EQ(res.queries.d, 64u);
  }
  const double sigma = std::sqrt(exact * (1 - exact) / trials);
  EXPECT_NEAR(wins / double(trials), exact, 3 * sigma);
}

TEST(OssAccess, RevocationAndCounters) {
  auto o = make(8, 3, 16);
  OracleAccess acc(o);
  Rng rng(16);
  acc.P(1);
  acc.P_inv(0, Vector(8));
  acc.D(0, Vector(8));
  EXPECT_EQ(acc.counts().p, 1u);
  EXPECT_EQ(acc.counts().p_inv, 1u);
  EXPECT_EQ(acc.counts().d, 1u);
  acc.revoke_d();
  EXPECT_THROW(acc.D(0, Vector(8)), std::logic_error);
  OssToken t = acc.gen(rng);
  EXPECT_THROW(acc.sign(std::move(t), 0, rng), std::logic_error);
  acc.revoke_all();
  EXPECT_THROW(acc.P(1), std::logic_error);
}
