#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <vector>

namespace cosetlab {

using Rng = std::mt19937_64;

namespace gf2 {

inline constexpr int kMaxDim = 64;

// Coordinates are packed big-endian inside the low `len` bits of a word:
// coordinate 0 is the most significant one. Integer order on packed words is
// therefore lexicographic order on coordinate tuples, and the packed word of
// an n-bit vector is also its basis-state index in the dense simulator.
class Vector {
 public:
  Vector() = default;
  explicit Vector(int len, uint64_t bits = 0);

  static Vector from_bits(std::string_view s);  // "0110", coordinate 0 first
  static Vector from_hex(int len, std::string_view hex);
  static Vector unit(int len, int i);
  static Vector random(int len, Rng& rng);

  int len() const { return len_; }
  uint64_t bits() const { return bits_; }
  bool get(int i) const;
  void set(int i, bool v);
  void flip(int i);
  bool first() const { return get(0); }
  bool is_zero() const { return bits_ == 0; }
  int weight() const;
  bool dot(const Vector& o) const;

  Vector operator^(const Vector& o) const;
  Vector& operator^=(const Vector& o);

  std::string to_bits() const;
  std::string to_hex() const;

  friend bool operator==(const Vector&, const Vector&) = default;
  friend auto operator<=>(const Vector&, const Vector&) = default;

 private:
  int len_ = 0;
  uint64_t bits_ = 0;
};

class Matrix {
 public:
  Matrix() = default;
  Matrix(int rows, int cols);

  static Matrix identity(int n);
  static Matrix from_rows(int cols, const std::vector<Vector>& rows);
  static Matrix from_columns(int rows, const std::vector<Vector>& cols);
  static Matrix random(int rows, int cols, Rng& rng);

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  bool get(int r, int c) const;
  void set(int r, int c, bool v);
  Vector row(int r) const { return Vector(cols_, data_[r]); }
  Vector col(int c) const;
  std::vector<Vector> columns() const;

  Vector operator*(const Vector& x) const;
  // x^T A as a row vector.
  Vector left_mul(const Vector& x) const;
  Matrix transpose() const;
  int rank() const;

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  int rows_ = 0;
  int cols_ = 0;
  std::vector<uint64_t> data_;
};

// An affine subspace shift + span(basis) of F_2^n. The basis is kept in
// reduced row-echelon form and the shift is the lexicographically smallest
// member, so two cosets are equal iff their fields are equal.
class Coset {
 public:
  Coset() = default;
  // The vectors must be linearly independent.
  Coset(int n, const std::vector<Vector>& basis, const Vector& shift);

  static Coset span(int n, const std::vector<Vector>& vectors);
  static Coset zero(int n);
  static Coset full(int n);
  // colspan(A) + b
  static Coset from_matrix(const Matrix& a, const Vector& b);
  static Coset from_text(std::string_view text);

  int ambient_dim() const { return n_; }
  int dim() const { return static_cast<int>(rows_.size()); }
  uint64_t size() const { return uint64_t{1} << dim(); }
  const std::vector<Vector>& basis() const { return rows_; }
  Matrix basis_matrix() const;  // n x dim, columns are the basis
  const Vector& shift() const { return shift_; }
  bool is_subspace() const { return shift_.is_zero(); }

  Coset linear_part() const;
  Coset translate(const Vector& v) const;
  // Lexicographically smallest member of v + linear_part().
  Vector reduce(const Vector& v) const;
  bool contains(const Vector& v) const;
  bool contains_subspace(const Coset& t) const;
  std::vector<Vector> members() const;
  Vector member(uint64_t index) const;  // index selects a basis combination

  std::string to_text() const;

  friend bool operator==(const Coset&, const Coset&) = default;

 private:
  int n_ = 0;
  std::vector<Vector> rows_;
  Vector shift_;
};

Coset dual(const Coset& s);
std::optional<Vector> solve_affine(const Matrix& a, const Vector& b,
                                   const Vector& u);
Coset sample_subspace(int n, int k, Rng& rng);
// k-dimensional subspace of the given subspace, uniform.
Coset sample_subspace_of(const Coset& ambient, int k, Rng& rng);
std::vector<Vector> coset_representatives(const Coset& t, const Coset& ambient);
std::vector<Coset> enumerate_subspaces(int n, int k);
uint64_t gaussian_binomial(int n, int k);

}  // namespace gf2
}  // namespace cosetlab
