#include "cosetlab/gf2.h"

#include <algorithm>
#include <bit>
#include <cstdio>
#include <stdexcept>

namespace cosetlab::gf2 {
namespace {

uint64_t mask(int len) {
  return len >= 64 ? ~uint64_t{0} : (uint64_t{1} << len) - 1;
}

void check_len(int len) {
  if (len < 0 || len > kMaxDim) {
    throw std::invalid_argument("gf2: dimension out of range");
  }
}

int hex_digit(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  if (c >= 'A' && c <= 'F') return c - 'A' + 10;
  throw std::invalid_argument("gf2: bad hex digit");
}

// Row-echelon accumulator. Rows are kept reduced and sorted by pivot, pivot
// being the highest set bit (the leading coordinate).
class Echelon {
 public:
  explicit Echelon(int n) : n_(n) {}

  // Returns false if v was already in the span.
  bool insert(uint64_t v) {
    v = reduce(v);
    if (v == 0) return false;
    uint64_t pivot = uint64_t{1} << (63 - std::countl_zero(v));
    for (auto& r : rows_) {
      if (r & pivot) r ^= v;
    }
    rows_.push_back(v);
    std::sort(rows_.begin(), rows_.end(), std::greater<>());
    return true;
  }

  uint64_t reduce(uint64_t v) const {
    for (uint64_t r : rows_) {
      uint64_t pivot = uint64_t{1} << (63 - std::countl_zero(r));
      if (v & pivot) v ^= r;
    }
    return v;
  }

  std::vector<Vector> vectors() const {
    std::vector<Vector> out;
    out.reserve(rows_.size());
    for (uint64_t r : rows_) out.emplace_back(n_, r);
    return out;
  }

  const std::vector<uint64_t>& rows() const { return rows_; }

 private:
  int n_;
  std::vector<uint64_t> rows_;
};

}  // namespace

Vector::Vector(int len, uint64_t bits) : len_(len), bits_(bits) {
  check_len(len);
  if (bits & ~mask(len)) throw std::invalid_argument("gf2: bits exceed length");
}

Vector Vector::from_bits(std::string_view s) {
  Vector v(static_cast<int>(s.size()));
  for (size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '1') {
      v.set(static_cast<int>(i), true);
    } else if (s[i] != '0') {
      throw std::invalid_argument("gf2: bit string must contain only 0/1");
    }
  }
  return v;
}

Vector Vector::from_hex(int len, std::string_view hex) {
  uint64_t bits = 0;
  for (char c : hex) {
    if (bits >> 60) throw std::invalid_argument("gf2: hex too long");
    bits = (bits << 4) | static_cast<uint64_t>(hex_digit(c));
  }
  return Vector(len, bits);
}

Vector Vector::unit(int len, int i) {
  Vector v(len);
  v.set(i, true);
  return v;
}

Vector Vector::random(int len, Rng& rng) {
  return Vector(len, rng() & mask(len));
}

bool Vector::get(int i) const {
  if (i < 0 || i >= len_) throw std::out_of_range("gf2: coordinate");
  return (bits_ >> (len_ - 1 - i)) & 1;
}

void Vector::set(int i, bool v) {
  if (i < 0 || i >= len_) throw std::out_of_range("gf2: coordinate");
  uint64_t b = uint64_t{1} << (len_ - 1 - i);
  bits_ = v ? (bits_ | b) : (bits_ & ~b);
}

void Vector::flip(int i) { set(i, !get(i)); }

int Vector::weight() const { return std::popcount(bits_); }

bool Vector::dot(const Vector& o) const {
  if (o.len_ != len_) throw std::invalid_argument("gf2: length mismatch");
  return std::popcount(bits_ & o.bits_) & 1;
}

Vector Vector::operator^(const Vector& o) const {
  Vector r = *this;
  r ^= o;
  return r;
}

Vector& Vector::operator^=(const Vector& o) {
  if (o.len_ != len_) throw std::invalid_argument("gf2: length mismatch");
  bits_ ^= o.bits_;
  return *this;
}

std::string Vector::to_bits() const {
  std::string s(len_, '0');
  for (int i = 0; i < len_; ++i) {
    if (get(i)) s[i] = '1';
  }
  return s;
}

std::string Vector::to_hex() const {
  int digits = std::max(1, (len_ + 3) / 4);
  std::string s(digits, '0');
  uint64_t b = bits_;
  for (int i = digits - 1; i >= 0; --i) {
    s[i] = "0123456789abcdef"[b & 0xf];
    b >>= 4;
  }
  return s;
}

Matrix::Matrix(int rows, int cols) : rows_(rows), cols_(cols), data_(rows, 0) {
  check_len(rows);
  check_len(cols);
}

Matrix Matrix::identity(int n) {
  Matrix m(n, n);
  for (int i = 0; i < n; ++i) m.set(i, i, true);
  return m;
}

Matrix Matrix::from_rows(int cols, const std::vector<Vector>& rows) {
  Matrix m(static_cast<int>(rows.size()), cols);
  for (size_t r = 0; r < rows.size(); ++r) {
    if (rows[r].len() != cols) throw std::invalid_argument("gf2: row length");
    m.data_[r] = rows[r].bits();
  }
  return m;
}

Matrix Matrix::from_columns(int rows, const std::vector<Vector>& cols) {
  Matrix m(rows, static_cast<int>(cols.size()));
  for (size_t c = 0; c < cols.size(); ++c) {
    if (cols[c].len() != rows) throw std::invalid_argument("gf2: column length");
    for (int r = 0; r < rows; ++r) m.set(r, static_cast<int>(c), cols[c].get(r));
  }
  return m;
}

Matrix Matrix::random(int rows, int cols, Rng& rng) {
  Matrix m(rows, cols);
  for (auto& w : m.data_) w = rng() & mask(cols);
  return m;
}

bool Matrix::get(int r, int c) const {
  if (r < 0 || r >= rows_ || c < 0 || c >= cols_) throw std::out_of_range("gf2: entry");
  return (data_[r] >> (cols_ - 1 - c)) & 1;
}

void Matrix::set(int r, int c, bool v) {
  if (r < 0 || r >= rows_ || c < 0 || c >= cols_) throw std::out_of_range("gf2: entry");
  uint64_t b = uint64_t{1} << (cols_ - 1 - c);
  data_[r] = v ? (data_[r] | b) : (data_[r] & ~b);
}

Vector Matrix::col(int c) const {
  Vector v(rows_);
  for (int r = 0; r < rows_; ++r) v.set(r, get(r, c));
  return v;
}

std::vector<Vector> Matrix::columns() const {
  std::vector<Vector> out;
  for (int c = 0; c < cols_; ++c) out.push_back(col(c));
  return out;
}

Vector Matrix::operator*(const Vector& x) const {
  if (x.len() != cols_) throw std::invalid_argument("gf2: dimension mismatch");
  Vector y(rows_);
  for (int r = 0; r < rows_; ++r) {
    if (std::popcount(data_[r] & x.bits()) & 1) y.set(r, true);
  }
  return y;
}

Vector Matrix::left_mul(const Vector& x) const {
  if (x.len() != rows_) throw std::invalid_argument("gf2: dimension mismatch");
  uint64_t acc = 0;
  for (int r = 0; r < rows_; ++r) {
    if (x.get(r)) acc ^= data_[r];
  }
  return Vector(cols_, acc);
}

Matrix Matrix::transpose() const {
  Matrix t(cols_, rows_);
  for (int r = 0; r < rows_; ++r)
    for (int c = 0; c < cols_; ++c) t.set(c, r, get(r, c));
  return t;
}

int Matrix::rank() const {
  Echelon e(cols_);
  int rank = 0;
  for (uint64_t w : data_) rank += e.insert(w);
  return rank;
}

Coset::Coset(int n, const std::vector<Vector>& basis, const Vector& shift)
    : n_(n) {
  check_len(n);
  if (shift.len() != n) throw std::invalid_argument("gf2: shift length");
  Echelon e(n);
  for (const auto& v : basis) {
    if (v.len() != n) throw std::invalid_argument("gf2: basis vector length");
    if (!e.insert(v.bits())) {
      throw std::invalid_argument("gf2: basis vectors are linearly dependent");
    }
  }
  rows_ = e.vectors();
  shift_ = Vector(n, e.reduce(shift.bits()));
}

Coset Coset::span(int n, const std::vector<Vector>& vectors) {
  Echelon e(n);
  for (const auto& v : vectors) {
    if (v.len() != n) throw std::invalid_argument("gf2: vector length");
    e.insert(v.bits());
  }
  return Coset(n, e.vectors(), Vector(n));
}

Coset Coset::zero(int n) { return Coset(n, {}, Vector(n)); }

Coset Coset::full(int n) {
  std::vector<Vector> b;
  for (int i = 0; i < n; ++i) b.push_back(Vector::unit(n, i));
  return Coset(n, b, Vector(n));
}

Coset Coset::from_matrix(const Matrix& a, const Vector& b) {
  return Coset(a.rows(), a.columns(), b);
}

Matrix Coset::basis_matrix() const { return Matrix::from_columns(n_, rows_); }

Coset Coset::linear_part() const { return Coset(n_, rows_, Vector(n_)); }

Coset Coset::translate(const Vector& v) const {
  return Coset(n_, rows_, shift_ ^ v);
}

Vector Coset::reduce(const Vector& v) const {
  if (v.len() != n_) throw std::invalid_argument("gf2: length mismatch");
  uint64_t x = v.bits();
  for (const auto& r : rows_) {
    uint64_t pivot = uint64_t{1} << (63 - std::countl_zero(r.bits()));
    if (x & pivot) x ^= r.bits();
  }
  return Vector(n_, x);
}

bool Coset::contains(const Vector& v) const { return reduce(v) == shift_; }

bool Coset::contains_subspace(const Coset& t) const {
  if (t.n_ != n_ || !t.is_subspace()) return false;
  Coset lin = linear_part();
  for (const auto& b : t.rows_) {
    if (!lin.contains(b)) return false;
  }
  return true;
}

Vector Coset::member(uint64_t index) const {
  uint64_t x = shift_.bits();
  for (size_t i = 0; i < rows_.size(); ++i) {
    if ((index >> i) & 1) x ^= rows_[i].bits();
  }
  return Vector(n_, x);
}

std::vector<Vector> Coset::members() const {
  if (dim() > 30) throw std::length_error("gf2: coset too large to enumerate");
  std::vector<Vector> out;
  out.reserve(size());
  for (uint64_t i = 0; i < size(); ++i) out.push_back(member(i));
  std::sort(out.begin(), out.end());
  return out;
}

std::string Coset::to_text() const {
  std::string s = "n=" + std::to_string(n_) + ";basis=";
  for (size_t i = 0; i < rows_.size(); ++i) {
    if (i) s += ',';
    s += rows_[i].to_hex();
  }
  s += ";shift=" + shift_.to_hex();
  return s;
}

Coset Coset::from_text(std::string_view text) {
  auto field = [&](std::string_view key) -> std::string_view {
    size_t p = text.find(key);
    if (p == std::string_view::npos) throw std::invalid_argument("gf2: missing field in coset text");
    p += key.size();
    size_t e = text.find(';', p);
    return text.substr(p, e == std::string_view::npos ? std::string_view::npos : e - p);
  };
  int n = std::stoi(std::string(field("n=")));
  std::vector<Vector> basis;
  std::string_view rows = field("basis=");
  while (!rows.empty()) {
    size_t c = rows.find(',');
    basis.push_back(Vector::from_hex(n, rows.substr(0, c)));
    if (c == std::string_view::npos) break;
    rows.remove_prefix(c + 1);
  }
  return Coset(n, basis, Vector::from_hex(n, field("shift=")));
}

Coset dual(const Coset& s) {
  if (!s.is_subspace()) throw std::invalid_argument("not a subspace");
  const int n = s.ambient_dim();
  std::vector<int> pivots;
  for (const auto& r : s.basis()) pivots.push_back(63 - std::countl_zero(r.bits()));
  std::vector<Vector> out;
  // A free bit position f yields the null vector e_f + sum over rows with
  // bit f set of e_pivot(row).
  for (int f = 0; f < n; ++f) {
    if (std::find(pivots.begin(), pivots.end(), f) != pivots.end()) continue;
    uint64_t v = uint64_t{1} << f;
    for (size_t i = 0; i < pivots.size(); ++i) {
      if ((s.basis()[i].bits() >> f) & 1) v |= uint64_t{1} << pivots[i];
    }
    out.emplace_back(n, v);
  }
  return Coset(n, out, Vector(n));
}

std::optional<Vector> solve_affine(const Matrix& a, const Vector& b,
                                   const Vector& u) {
  if (b.len() != a.rows() || u.len() != a.rows()) {
    throw std::invalid_argument("solve_affine: dimension mismatch");
  }
  const int m = a.rows();
  const int c = a.cols();
  Vector rhs = u ^ b;
  std::vector<uint64_t> rows(m);
  std::vector<int> target(m);
  for (int r = 0; r < m; ++r) {
    rows[r] = a.row(r).bits();
    target[r] = rhs.get(r);
  }
  std::vector<int> pivot_col;
  int rank = 0;
  for (int col = 0; col < c && rank < m; ++col) {
    uint64_t bit = uint64_t{1} << (c - 1 - col);
    int sel = -1;
    for (int r = rank; r < m; ++r) {
      if (rows[r] & bit) {
        sel = r;
        break;
      }
    }
    if (sel < 0) continue;
    std::swap(rows[sel], rows[rank]);
    std::swap(target[sel], target[rank]);
    for (int r = 0; r < m; ++r) {
      if (r != rank && (rows[r] & bit)) {
        rows[r] ^= rows[rank];
        target[r] ^= target[rank];
      }
    }
    pivot_col.push_back(col);
    ++rank;
  }
  for (int r = rank; r < m; ++r) {
    if (target[r]) return std::nullopt;
  }
  Vector z(c);
  for (int r = 0; r < rank; ++r) z.set(pivot_col[r], target[r]);
  return z;
}

Coset sample_subspace(int n, int k, Rng& rng) {
  check_len(n);
  if (k < 0 || k > n) throw std::invalid_argument("sample_subspace: need 0 <= k <= n");
  for (;;) {
    Echelon e(n);
    bool independent = true;
    for (int i = 0; i < k && independent; ++i) {
      independent = e.insert(rng() & mask(n));
    }
    if (independent) return Coset(n, e.vectors(), Vector(n));
  }
}

Coset sample_subspace_of(const Coset& ambient, int k, Rng& rng) {
  if (!ambient.is_subspace()) throw std::invalid_argument("not a subspace");
  Coset local = sample_subspace(ambient.dim(), k, rng);
  std::vector<Vector> image;
  for (const auto& v : local.basis()) {
    image.push_back(ambient.member(v.bits()));
  }
  return Coset(ambient.ambient_dim(), image, Vector(ambient.ambient_dim()));
}

std::vector<Vector> coset_representatives(const Coset& t, const Coset& ambient) {
  if (!ambient.is_subspace()) throw std::invalid_argument("ambient must be a subspace");
  if (!ambient.contains_subspace(t)) {
    throw std::invalid_argument("coset_representatives: T is not contained in the ambient space");
  }
  // Complete T's basis to a basis of the ambient space; every combination of
  // the completing vectors hits a distinct coset.
  const int n = t.ambient_dim();
  Echelon e(n);
  for (const auto& v : t.basis()) e.insert(v.bits());
  std::vector<uint64_t> extra;
  for (const auto& v : ambient.basis()) {
    if (e.insert(v.bits())) extra.push_back(v.bits());
  }
  std::vector<Vector> reps;
  reps.reserve(uint64_t{1} << extra.size());
  for (uint64_t m = 0; m < (uint64_t{1} << extra.size()); ++m) {
    uint64_t x = 0;
    for (size_t i = 0; i < extra.size(); ++i) {
      if ((m >> i) & 1) x ^= extra[i];
    }
    reps.push_back(t.reduce(Vector(n, x)));
  }
  std::sort(reps.begin(), reps.end());
  return reps;
}

std::vector<Coset> enumerate_subspaces(int n, int k) {
  check_len(n);
  if (k < 0 || k > n) throw std::invalid_argument("enumerate_subspaces: need 0 <= k <= n");
  if (n > 16) throw std::length_error("enumerate_subspaces: n too large");
  std::vector<Coset> out;
  // Walk over pivot sets (k coordinates) and fill the free entries of each
  // reduced row: positions after its pivot that are not themselves pivots.
  std::vector<int> piv(k);
  auto next_combination = [&]() {
    int i = k - 1;
    while (i >= 0 && piv[i] == n - k + i) --i;
    if (i < 0) return false;
    ++piv[i];
    for (int j = i + 1; j < k; ++j) piv[j] = piv[j - 1] + 1;
    return true;
  };
  for (int i = 0; i < k; ++i) piv[i] = i;
  do {
    std::vector<std::pair<int, int>> free_slots;  // (row, coordinate)
    for (int r = 0; r < k; ++r) {
      for (int c = piv[r] + 1; c < n; ++c) {
        if (std::find(piv.begin(), piv.end(), c) == piv.end()) free_slots.push_back({r, c});
      }
    }
    for (uint64_t fill = 0; fill < (uint64_t{1} << free_slots.size()); ++fill) {
      std::vector<Vector> rows;
      for (int r = 0; r < k; ++r) rows.push_back(Vector::unit(n, piv[r]));
      for (size_t s = 0; s < free_slots.size(); ++s) {
        if ((fill >> s) & 1) rows[free_slots[s].first].set(free_slots[s].second, true);
      }
      out.emplace_back(n, rows, Vector(n));
    }
  } while (k > 0 && next_combination());
  return out;
}

uint64_t gaussian_binomial(int n, int k) {
  if (k < 0 || k > n) return 0;
  // [n choose k]_2 = prod_{i<k} (2^{n-i} - 1) / (2^{i+1} - 1), kept exact by
  // dividing after each multiplication (every partial product is integral).
  unsigned __int128 num = 1;
  for (int i = 0; i < k; ++i) {
    num = num * ((static_cast<unsigned __int128>(1) << (n - i)) - 1);
    num = num / ((static_cast<unsigned __int128>(1) << (i + 1)) - 1);
  }
  return static_cast<uint64_t>(num);
}

}  // namespace cosetlab::gf2
