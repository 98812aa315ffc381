#include "cosetlab/densesim.h"

#include <gtest/gtest.h>

#include <cmath>

using namespace cosetlab;
using dense::Complex;
using dense::DensityMatrix;
using dense::StateVector;
using gf2::Coset;
using gf2::Vector;

namespace {

const double kS = 1.0 / std::sqrt(2.0);

StateVector state(int n, std::vector<Complex> a) {
  return StateVector::from_amplitudes(n, std::move(a));
}

StateVector random_state(int n, Rng& rng) {
  std::normal_distribution<double> g;
  std::vector<Complex> a(uint64_t{1} << n);
  double norm = 0;
  for (auto& x : a) {
    x = Complex(g(rng), g(rng));
    norm += std::norm(x);
  }
  for (auto& x : a) x /= std::sqrt(norm);
  return state(n, a);
}

DensityMatrix random_density(int n, Rng& rng) {
  // Mixture of three random pure states.
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(1 << n, 1 << n);
  std::uniform_real_distribution<double> w(0.1, 1.0);
  double total = 0;
  for (int i = 0; i < 3; ++i) {
    double p = w(rng);
    total += p;
    m += p * DensityMatrix::pure(random_state(n, rng)).matrix();
  }
  return DensityMatrix::from_matrix(n, m / total);
}

}  // namespace

TEST(DenseCoset, SingletonCoset) {
  Coset c(2, {}, Vector::from_bits("10"));
  EXPECT_TRUE(dense::equal_up_to_phase(dense::coset_to_state(c), StateVector::basis(2, 0b10)));
}

TEST(DenseCoset, BellTypeCosets) {
  Coset s = Coset::span(2, {Vector::from_bits("11")});
  auto a = dense::coset_to_state(s);
  EXPECT_NEAR(std::abs(a.amplitude(0b00) - kS), 0, 1e-12);
  EXPECT_NEAR(std::abs(a.amplitude(0b11) - kS), 0, 1e-12);
  auto b = dense::coset_to_state(s.translate(Vector::from_bits("01")));
  EXPECT_NEAR(std::abs(b.amplitude(0b01) - kS), 0, 1e-12);
  EXPECT_NEAR(std::abs(b.amplitude(0b10) - kS), 0, 1e-12);
  EXPECT_NEAR(std::abs(b.amplitude(0b00)), 0, 1e-12);
}

TEST(DenseCoset, TooLargeThrows) {
  EXPECT_THROW(dense::coset_to_state(Coset::zero(13)), std::invalid_argument);
}

TEST(DenseHadamard, Examples) {
  auto plus = dense::hadamard_all(StateVector(1));
  EXPECT_TRUE(dense::equal_up_to_phase(plus, state(1, {kS, kS})));
  auto bell = state(2, {kS, 0, 0, kS});
  EXPECT_LT(std::abs(dense::inner(dense::hadamard_all(bell), bell) - Complex(1)), 1e-12);
  Coset s = Coset::span(3, {Vector::from_bits("100")});
  EXPECT_TRUE(dense::equal_up_to_phase(dense::hadamard_all(dense::coset_to_state(s)),
                                       dense::coset_to_state(gf2::dual(s))));
}

TEST(DenseHadamard, InvolutionAndNorm) {
  Rng rng(1);
  for (int n = 1; n <= 8; ++n) {
    auto s = random_state(n, rng);
    auto h = dense::hadamard_all(s);
    EXPECT_NEAR(h.norm(), 1.0, 1e-10);
    EXPECT_LT(std::abs(dense::inner(dense::hadamard_all(h), s) - Complex(1)), 1e-10);
  }
}

TEST(DenseHadamard, MatchesPerQubitGates) {
  Rng rng(2);
  auto s = random_state(5, rng);
  auto t = s;
  for (int q = 0; q < 5; ++q) t.apply_h(q);
  EXPECT_LT(std::abs(dense::inner(t, dense::hadamard_all(s)) - Complex(1)), 1e-12);
}

TEST(DenseHadamard, CosetStateMapsToSignedDual) {
  Rng rng(3);
  for (int n = 1; n <= 6; ++n) {
    for (int trial = 0; trial < 10; ++trial) {
      Coset s = gf2::sample_subspace(n, std::uniform_int_distribution<int>(0, n)(rng), rng);
      Vector v = Vector::random(n, rng);
      auto h = dense::hadamard_all(dense::coset_to_state(s.translate(v)));
      Coset perp = gf2::dual(s);
      const double a = 1.0 / std::sqrt(static_cast<double>(perp.size()));
      for (uint64_t x = 0; x < h.dim(); ++x) {
        Vector xv(n, x);
        Complex expect = perp.contains(xv) ? Complex(xv.dot(v) ? -a : a) : Complex(0);
        EXPECT_LT(std::abs(h.amplitude(x) - expect), 1e-12);
      }
    }
  }
}

TEST(DensePhase, Examples) {
  Rng rng(4);
  auto s = random_state(3, rng);
  auto id = dense::phase_oracle(s, [](const Vector&) { return false; });
  EXPECT_LT(std::abs(dense::inner(id, s) - Complex(1)), 1e-12);
  auto neg = dense::phase_oracle(s, [](const Vector&) { return true; });
  EXPECT_TRUE(dense::equal_up_to_phase(neg, s));
  EXPECT_LT(std::abs(dense::inner(neg, s) + Complex(1)), 1e-12);
  auto z = dense::phase_oracle(state(1, {kS, kS}), [](const Vector& x) { return x.get(0); });
  EXPECT_LT(std::abs(dense::inner(z, state(1, {kS, -kS})) - Complex(1)), 1e-12);
  EXPECT_NEAR(neg.norm(), 1.0, 1e-10);
}

TEST(DenseMeasure, BasisState) {
  Rng rng(5);
  auto m = dense::measure_standard(StateVector::basis(2, 0b10), {0, 1}, rng);
  EXPECT_EQ(m.outcome, (std::vector<int>{1, 0}));
  EXPECT_TRUE(dense::equal_up_to_phase(m.post, StateVector::basis(2, 0b10)));
}

TEST(DenseMeasure, BellStateFrequencies) {
  Rng rng(6);
  auto bell = state(2, {kS, 0, 0, kS});
  const int trials = 10000;
  int ones = 0;
  for (int i = 0; i < trials; ++i) {
    auto m = dense::measure_standard(bell, {0}, rng);
    ones += m.outcome[0];
    const uint64_t idx = m.outcome[0] ? 0b11 : 0b00;
    ASSERT_TRUE(dense::equal_up_to_phase(m.post, StateVector::basis(2, idx)));
    auto again = dense::measure_standard(m.post, {0}, rng);
    ASSERT_EQ(again.outcome, m.outcome);
  }
  const double sigma = std::sqrt(0.25 / trials);
  EXPECT_NEAR(ones / double(trials), 0.5, 3 * sigma);
}

TEST(DenseMeasure, CosetSliceCollapse) {
  Rng rng(7);
  Coset s = Coset::full(2);
  for (int i = 0; i < 20; ++i) {
    auto m = dense::measure_standard(dense::coset_to_state(s), {0}, rng);
    Coset slice = Coset::span(2, {Vector::from_bits("01")})
                      .translate(Vector(2, m.outcome[0] ? 0b10 : 0));
    EXPECT_TRUE(dense::equal_up_to_phase(m.post, dense::coset_to_state(slice)));
  }
}

TEST(DenseMeasure, EmptyQubitSet) {
  Rng rng(8);
  auto s = random_state(2, rng);
  auto m = dense::measure_standard(s, {}, rng);
  EXPECT_TRUE(m.outcome.empty());
  EXPECT_LT(std::abs(dense::inner(m.post, s) - Complex(1)), 1e-12);
}

TEST(DenseTrace, Examples) {
  auto zero = DensityMatrix::pure(StateVector::basis(1, 0));
  auto one = DensityMatrix::pure(StateVector::basis(1, 1));
  EXPECT_NEAR(dense::trace_distance(zero, zero), 0, 1e-12);
  EXPECT_NEAR(dense::trace_distance(zero, one), 1, 1e-12);
  auto plus = DensityMatrix::pure(state(1, {kS, kS}));
  EXPECT_NEAR(dense::trace_distance(plus, DensityMatrix::maximally_mixed(1)), 0.5, 1e-12);
  EXPECT_THROW(dense::trace_distance(zero, DensityMatrix::maximally_mixed(2)), std::invalid_argument);
}

TEST(DenseTrace, TriangleInequalityAndSymmetry) {
  Rng rng(9);
  for (int trial = 0; trial < 100; ++trial) {
    const int n = std::uniform_int_distribution<int>(1, 4)(rng);
    auto a = random_density(n, rng), b = random_density(n, rng), c = random_density(n, rng);
    const double ab = dense::trace_distance(a, b);
    EXPECT_NEAR(ab, dense::trace_distance(b, a), 1e-12);
    EXPECT_LE(dense::trace_distance(a, c), ab + dense::trace_distance(b, c) + 1e-9);
  }
}

TEST(DenseDensity, ValidationRejectsBadMatrices) {
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(2, 2);
  m(0, 0) = 2;
  m(1, 1) = -1;
  EXPECT_THROW(DensityMatrix::from_matrix(1, m), std::invalid_argument);
  m(0, 0) = 0.5;
  m(1, 1) = 0.5;
  m(0, 1) = 0.3;
  EXPECT_THROW(DensityMatrix::from_matrix(1, m), std::invalid_argument);
}

TEST(DenseGates, CnotToffoliSwap) {
  auto s = StateVector::basis(3, 0b110);
  s.apply_ccx(0, 1, 2);
  EXPECT_NEAR(std::norm(s.amplitude(0b111)), 1, 1e-12);
  s.apply_cx(2, 0);
  EXPECT_NEAR(std::norm(s.amplitude(0b011)), 1, 1e-12);
  s.apply_swap(0, 2);
  EXPECT_NEAR(std::norm(s.amplitude(0b110)), 1, 1e-12);
}

TEST(DenseSparse, RoundTripAndMeasure) {
  Rng rng(10);
  auto s = random_state(4, rng);
  auto sp = dense::SparseState::from_dense(s);
  EXPECT_LT(std::abs(dense::inner(sp.to_dense(), s) - Complex(1)), 1e-12);
  EXPECT_LT(sp.measure_all(rng), 16u);
}
