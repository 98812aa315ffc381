#include "cosetlab/gf2.h"

#include <gtest/gtest.h>

#include <boost/math/special_functions/gamma.hpp>
#include <map>
#include <set>

using namespace cosetlab;
using gf2::Coset;
using gf2::Matrix;
using gf2::Vector;

namespace {

Vector bits(const char* s) { return Vector::from_bits(s); }

std::set<uint64_t> brute_members(const Matrix& a, const Vector& b) {
  std::set<uint64_t> out;
  for (uint64_t x = 0; x < (uint64_t{1} << a.cols()); ++x) {
    out.insert((a * Vector(a.cols(), x) ^ b).bits());
  }
  return out;
}

Matrix random_full_rank(int rows, int cols, Rng& rng) {
  for (;;) {
    Matrix m = Matrix::random(rows, cols, rng);
    if (m.rank() == cols) return m;
  }
}

}  // namespace

TEST(Gf2Dual, FullSpaceHasZeroDual) {
  EXPECT_EQ(gf2::dual(Coset::full(4)), Coset::zero(4));
}

TEST(Gf2Dual, ZeroSpaceHasFullDual) {
  EXPECT_EQ(gf2::dual(Coset::zero(3)), Coset::full(3));
}

TEST(Gf2Dual, DiagonalLineIsSelfDual) {
  Coset s = Coset::span(2, {bits("11")});
  Coset d = gf2::dual(s);
  // brute force over the four vectors of F_2^2
  for (uint64_t v = 0; v < 4; ++v) {
    bool orth = !Vector(2, v).dot(bits("11"));
    EXPECT_EQ(d.contains(Vector(2, v)), orth);
  }
  EXPECT_EQ(d, s);
}

TEST(Gf2Dual, RejectsProperCoset) {
  Coset c(2, {bits("10")}, bits("01"));
  EXPECT_THROW(gf2::dual(c), std::invalid_argument);
}

TEST(Gf2Solve, IdentitySystem) {
  auto z = gf2::solve_affine(Matrix::identity(2), Vector(2), bits("10"));
  ASSERT_TRUE(z);
  EXPECT_EQ(*z, bits("10"));
}

TEST(Gf2Solve, SingleColumnWithShift) {
  Matrix a = Matrix::from_columns(2, {bits("11")});
  auto z = gf2::solve_affine(a, bits("01"), bits("10"));
  ASSERT_TRUE(z);
  EXPECT_EQ(*z, bits("1"));
  EXPECT_FALSE(gf2::solve_affine(a, bits("00"), bits("10")));
}

TEST(Gf2Solve, DimensionMismatchThrows) {
  EXPECT_THROW(gf2::solve_affine(Matrix::identity(2), Vector(3), Vector(2)), std::invalid_argument);
}

TEST(Gf2Solve, SucceedsIffMemberBruteForce) {
  Rng rng(11);
  for (int n = 1; n <= 8; ++n) {
    for (int trial = 0; trial < 20; ++trial) {
      const int m = std::uniform_int_distribution<int>(1, n)(rng);
      Matrix a = Matrix::random(n, m, rng);  // rank may be deficient
      Vector b = Vector::random(n, rng);
      auto members = brute_members(a, b);
      for (uint64_t u = 0; u < (uint64_t{1} << n); ++u) {
        auto z = gf2::solve_affine(a, b, Vector(n, u));
        ASSERT_EQ(z.has_value(), members.count(u) == 1);
        if (z) EXPECT_EQ((a * *z ^ b).bits(), u);
      }
    }
  }
}

TEST(Gf2Sample, TrivialDimensions) {
  Rng rng(1);
  EXPECT_EQ(gf2::sample_subspace(3, 0, rng), Coset::zero(3));
  EXPECT_EQ(gf2::sample_subspace(3, 3, rng), Coset::full(3));
  EXPECT_THROW(gf2::sample_subspace(3, 4, rng), std::invalid_argument);
}

TEST(Gf2Sample, UniformOverAll35PlanesOfF2To4) {
  auto all = gf2::enumerate_subspaces(4, 2);
  ASSERT_EQ(all.size(), 35u);
  std::map<std::string, int> counts;
  for (const auto& s : all) counts[s.to_text()] = 0;
  Rng rng(2024);
  const int draws = 100000;
  for (int i = 0; i < draws; ++i) {
    auto it = counts.find(gf2::sample_subspace(4, 2, rng).to_text());
    ASSERT_NE(it, counts.end());
    ++it->second;
  }
  const double expected = draws / 35.0;
  double chi2 = 0;
  for (const auto& [k, c] : counts) chi2 += (c - expected) * (c - expected) / expected;
  const double p = boost::math::gamma_q(34 / 2.0, chi2 / 2.0);
  EXPECT_GT(p, 0.001) << "chi2 = " << chi2;
}

TEST(Gf2Reps, Examples) {
  auto r1 = gf2::coset_representatives(Coset::full(2), Coset::full(2));
  EXPECT_EQ(r1, std::vector<Vector>{bits("00")});
  auto r2 = gf2::coset_representatives(Coset::zero(2), Coset::full(2));
  EXPECT_EQ(r2, (std::vector<Vector>{bits("00"), bits("01"), bits("10"), bits("11")}));
  auto r3 = gf2::coset_representatives(Coset::span(2, {bits("11")}), Coset::full(2));
  EXPECT_EQ(r3, (std::vector<Vector>{bits("00"), bits("01")}));
}

TEST(Gf2Reps, RejectsNonContainedSubspace) {
  Coset t = Coset::span(3, {bits("100")});
  Coset amb = Coset::span(3, {bits("010"), bits("001")});
  EXPECT_THROW(gf2::coset_representatives(t, amb), std::invalid_argument);
}

TEST(Gf2Reps, PartitionAndLexMinimal) {
  Rng rng(5);
  for (int trial = 0; trial < 60; ++trial) {
    const int n = std::uniform_int_distribution<int>(1, 8)(rng);
    const int da = std::uniform_int_distribution<int>(0, n)(rng);
    const int dt = std::uniform_int_distribution<int>(0, da)(rng);
    Coset amb = gf2::sample_subspace(n, da, rng);
    Coset t = gf2::sample_subspace_of(amb, dt, rng);
    auto reps = gf2::coset_representatives(t, amb);
    ASSERT_EQ(reps.size(), amb.size() / t.size());
    std::set<uint64_t> seen;
    for (const auto& r : reps) {
      auto members = t.translate(r).members();
      EXPECT_EQ(members.front(), r);  // lexicographically smallest
      for (const auto& m : members) {
        EXPECT_TRUE(amb.contains(m));
        EXPECT_TRUE(seen.insert(m.bits()).second) << "cosets overlap";
      }
    }
    EXPECT_EQ(seen.size(), amb.size());
  }
}

TEST(Gf2Props, DualDimensionsAndOrthogonality) {
  Rng rng(7);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = std::uniform_int_distribution<int>(1, 10)(rng);
    const int k = std::uniform_int_distribution<int>(0, n)(rng);
    Coset s = gf2::sample_subspace(n, k, rng);
    Coset d = gf2::dual(s);
    EXPECT_EQ(s.dim() + d.dim(), n);
    for (const auto& a : s.basis())
      for (const auto& b : d.basis()) EXPECT_FALSE(a.dot(b));
    EXPECT_EQ(gf2::dual(d), s);
  }
}

TEST(Gf2Props, MembershipMatchesEnumeration) {
  Rng rng(9);
  for (int n = 1; n <= 10; ++n) {
    for (int trial = 0; trial < 5; ++trial) {
      const int m = std::uniform_int_distribution<int>(0, n)(rng);
      Matrix a = m ? random_full_rank(n, m, rng) : Matrix(n, 0);
      Vector b = Vector::random(n, rng);
      Coset c = Coset::from_matrix(a, b);
      auto members = brute_members(a, b);
      for (uint64_t u = 0; u < (uint64_t{1} << n); ++u) {
        ASSERT_EQ(c.contains(Vector(n, u)), members.count(u) == 1);
      }
    }
  }
}

TEST(Gf2Props, GaussianBinomialMatchesEnumeration) {
  for (int n = 0; n <= 6; ++n)
    for (int k = 0; k <= n; ++k) {
      auto all = gf2::enumerate_subspaces(n, k);
      std::set<std::string> distinct;
      for (const auto& s : all) {
        EXPECT_EQ(s.dim(), k);
        distinct.insert(s.to_text());
      }
      EXPECT_EQ(distinct.size(), all.size());
      EXPECT_EQ(all.size(), gf2::gaussian_binomial(n, k)) << n << "," << k;
    }
  EXPECT_EQ(gf2::gaussian_binomial(4, 2), 35u);
}

TEST(Gf2Text, RoundTrip) {
  Rng rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    const int n = std::uniform_int_distribution<int>(1, 20)(rng);
    Coset s = gf2::sample_subspace(n, std::uniform_int_distribution<int>(0, n)(rng), rng)
                  .translate(Vector::random(n, rng));
    EXPECT_EQ(Coset::from_text(s.to_text()), s);
  }
  EXPECT_EQ(Coset::span(2, {bits("11")}).translate(bits("10")).to_text(), "n=2;basis=3;shift=1");
}

TEST(Gf2Coset, DependentBasisRejected) {
  EXPECT_THROW(Coset(2, {bits("11"), bits("11")}, Vector(2)), std::invalid_argument);
}

TEST(Gf2Matrix, LeftMultiplyMatchesTranspose) {
  Rng rng(4);
  for (int trial = 0; trial < 50; ++trial) {
    Matrix a = Matrix::random(6, 4, rng);
    Vector x = Vector::random(6, rng);
    EXPECT_EQ(a.left_mul(x), a.transpose() * x);
  }
}
