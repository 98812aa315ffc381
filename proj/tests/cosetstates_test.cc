#include "cosetlab/cosetstates.h"

#include <gtest/gtest.h>

#include <cmath>

using namespace cosetlab;
using cosets::BalancedCoset;
using cosets::Complex;
using cosets::CosetQubitState;
using gf2::Coset;
using gf2::Vector;

namespace {

Coset random_balanced(int n, Rng& rng) {
  for (;;) {
    const int d = std::uniform_int_distribution<int>(1, n)(rng);
    Coset c = gf2::sample_subspace(n, d, rng).translate(Vector::random(n, rng));
    if (BalancedCoset::is_balanced(c)) return c;
  }
}

CosetQubitState random_state(int n, Rng& rng) {
  std::normal_distribution<double> g;
  Complex a0(g(rng), g(rng)), a1(g(rng), g(rng));
  const double norm = std::sqrt(std::norm(a0) + std::norm(a1));
  return CosetQubitState(a0 / norm, a1 / norm, BalancedCoset(random_balanced(n, rng)), "y");
}

// Measures every qubit of a dense (B, U) state, keyed like OutcomeDistribution.
cosets::OutcomeDistribution dense_distribution(const dense::StateVector& s, int n) {
  cosets::OutcomeDistribution d;
  const auto p = s.probabilities();
  const uint64_t mask = (uint64_t{1} << n) - 1;
  for (uint64_t i = 0; i < p.size(); ++i) {
    if (p[i] > 1e-15) d[{static_cast<int>(i >> n), i & mask}] += p[i];
  }
  return d;
}

}  // namespace

TEST(BalancedCoset, RejectsConstantFirstBit) {
  EXPECT_THROW(BalancedCoset(Coset::span(3, {Vector::from_bits("011")})), std::invalid_argument);
  EXPECT_THROW(BalancedCoset(Coset::zero(3)), std::invalid_argument);
}

TEST(BalancedCoset, SlicesSplitTheCoset) {
  Rng rng(1);
  for (int trial = 0; trial < 100; ++trial) {
    const int n = std::uniform_int_distribution<int>(1, 8)(rng);
    Coset c = random_balanced(n, rng);
    BalancedCoset bc(c);
    for (int b = 0; b < 2; ++b) {
      Coset s = bc.slice(b);
      EXPECT_EQ(s.size() * 2, c.size());
      for (const auto& m : s.members()) {
        EXPECT_EQ(m.first(), b);
        EXPECT_TRUE(c.contains(m));
      }
    }
    EXPECT_TRUE(bc.w().first());
    EXPECT_TRUE(bc.zero_directions().contains(bc.v0() ^ bc.v(1) ^ bc.w()));
  }
}

TEST(CosetQubit, TextRoundTrip) {
  Rng rng(2);
  for (int trial = 0; trial < 20; ++trial) {
    auto s = random_state(std::uniform_int_distribution<int>(1, 10)(rng), rng);
    auto t = CosetQubitState::from_text(s.to_text());
    EXPECT_EQ(t.coset(), s.coset());
    EXPECT_EQ(t.amp(0), s.amp(0));
    EXPECT_EQ(t.amp(1), s.amp(1));
    EXPECT_EQ(t.y(), s.y());
  }
}

TEST(CosetQubit, RejectsUnnormalizedAmplitudes) {
  BalancedCoset bc(Coset::full(2));
  EXPECT_THROW(CosetQubitState(1.0, 1.0, bc, ""), std::invalid_argument);
}

TEST(CosetQubit, ZOpenMatchesDenseMeasurement) {
  Rng rng(3);
  for (int trial = 0; trial < 60; ++trial) {
    const int n = std::uniform_int_distribution<int>(1, 7)(rng);
    auto s = random_state(n, rng);
    auto dense_d = dense_distribution(cosets::to_dense(s), n);
    EXPECT_LE(cosets::total_variation(cosets::z_open_distribution(s), dense_d), 1e-12);
  }
}

TEST(CosetQubit, XOpenMatchesDenseHadamardThenMeasure) {
  Rng rng(4);
  for (int trial = 0; trial < 60; ++trial) {
    const int n = std::uniform_int_distribution<int>(1, 7)(rng);
    auto s = random_state(n, rng);
    auto h = dense::hadamard_all(cosets::to_dense(s));
    EXPECT_LE(cosets::total_variation(cosets::x_open_distribution(s), dense_distribution(h, n)),
              1e-12);
  }
}

TEST(CosetQubit, SparseMatchesDense) {
  Rng rng(5);
  auto s = random_state(5, rng);
  auto d = cosets::to_sparse(s).to_dense();
  EXPECT_LT(std::abs(dense::inner(d, cosets::to_dense(s)) - Complex(1)), 1e-12);
}

TEST(CosetQubit, SamplersFollowExactDistributions) {
  Rng rng(6);
  auto s = random_state(3, rng);
  for (int mode = 0; mode < 2; ++mode) {
    auto exact = mode ? cosets::x_open_distribution(s) : cosets::z_open_distribution(s);
    std::map<std::pair<int, uint64_t>, int> counts;
    const int trials = 20000;
    for (int i = 0; i < trials; ++i) {
      auto o = mode ? cosets::measure_x_open(s, rng) : cosets::measure_z_open(s, rng);
      ++counts[{o.b, o.u.bits()}];
    }
    for (const auto& [k, c] : counts) ASSERT_TRUE(exact.count(k)) << "outcome outside support";
    for (const auto& [k, p] : exact) {
      const double sigma = std::sqrt(p * (1 - p) / trials);
      EXPECT_NEAR(counts[k] / double(trials), p, 4 * sigma + 1e-9);
    }
  }
}

TEST(FirstBit, RestrictMatchesDenseMeasurement) {
  Rng rng(7);
  for (int trial = 0; trial < 30; ++trial) {
    const int n = std::uniform_int_distribution<int>(1, 8)(rng);
    Coset c = random_balanced(n, rng);
    auto r = cosets::restrict_first_bit(c, rng);
    auto probs = dense::outcome_distribution(dense::coset_to_state(c), {0});
    EXPECT_NEAR(probs[0], 0.5, 1e-12);
    auto slice_members = r.post.coset.slice(r.b).members();
    for (const auto& m : slice_members) EXPECT_EQ(m.first(), r.b);
    EXPECT_EQ(r.post.bit, r.b);
  }
}

TEST(FirstBit, RotationMatchesDenseCircuit) {
  Rng rng(8);
  for (int trial = 0; trial < 40; ++trial) {
    const int n = std::uniform_int_distribution<int>(1, 8)(rng);
    BalancedCoset bc(random_balanced(n, rng));
    const int b = trial % 2;
    Coset perp = bc.full_dual();
    auto pred = [&](const Vector& u) { return perp.contains(u); };
    auto rotated = cosets::rotate_first_bit({bc, b}, pred);
    EXPECT_EQ(rotated.bit, 1 - b);
    auto circuit = dense::hadamard_all(
        dense::phase_oracle(dense::hadamard_all(dense::coset_to_state(bc.slice(b))), pred));
    EXPECT_TRUE(dense::equal_up_to_phase(circuit, cosets::to_dense(rotated)));
  }
}

TEST(FirstBit, RotationRejectsWrongPredicate) {
  BalancedCoset bc(Coset::full(3));
  EXPECT_THROW(cosets::rotate_first_bit({bc, 0}, [](const Vector&) { return true; }),
               std::invalid_argument);
}
