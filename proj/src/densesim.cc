#include "cosetlab/densesim.h"

#include <bit>
#include <cmath>
#include <stdexcept>

namespace cosetlab::dense {
namespace {

constexpr double kInvSqrt2 = 0.70710678118654752440;

void check_state_size(int n) {
  if (n < 0 || n > kMaxStateQubits) {
    throw std::invalid_argument("densesim: state vectors are limited to 12 qubits");
  }
}

}  // namespace

StateVector::StateVector(int n_qubits) : n_(n_qubits) {
  check_state_size(n_qubits);
  amps_.assign(uint64_t{1} << n_qubits, Complex(0));
  amps_[0] = 1;
}

StateVector StateVector::basis(int n_qubits, uint64_t index) {
  StateVector s(n_qubits);
  s.amps_[0] = 0;
  s.amps_.at(index) = 1;
  return s;
}

StateVector StateVector::from_amplitudes(int n_qubits, std::vector<Complex> amps) {
  check_state_size(n_qubits);
  if (amps.size() != (uint64_t{1} << n_qubits)) {
    throw std::invalid_argument("densesim: amplitude count must be 2^n");
  }
  StateVector s;
  s.n_ = n_qubits;
  s.amps_ = std::move(amps);
  if (std::abs(s.norm() - 1.0) > 1e-10) throw std::invalid_argument("densesim: state not normalized");
  return s;
}

double StateVector::norm() const {
  double acc = 0;
  for (const auto& a : amps_) acc += std::norm(a);
  return std::sqrt(acc);
}

std::vector<double> StateVector::probabilities() const {
  std::vector<double> p(amps_.size());
  for (size_t i = 0; i < amps_.size(); ++i) p[i] = std::norm(amps_[i]);
  return p;
}

void StateVector::check_qubit(int q) const {
  if (q < 0 || q >= n_) throw std::out_of_range("densesim: qubit index");
}

void StateVector::apply_1q(int q, const Complex (&u)[2][2]) {
  check_qubit(q);
  const uint64_t b = bit(q);
  for (uint64_t i = 0; i < amps_.size(); ++i) {
    if (i & b) continue;
    Complex a0 = amps_[i], a1 = amps_[i | b];
    amps_[i] = u[0][0] * a0 + u[0][1] * a1;
    amps_[i | b] = u[1][0] * a0 + u[1][1] * a1;
  }
}

void StateVector::apply_h(int q) {
  static const Complex h[2][2] = {{kInvSqrt2, kInvSqrt2}, {kInvSqrt2, -kInvSqrt2}};
  apply_1q(q, h);
}

void StateVector::apply_x(int q) {
  check_qubit(q);
  const uint64_t b = bit(q);
  for (uint64_t i = 0; i < amps_.size(); ++i) {
    if (!(i & b)) std::swap(amps_[i], amps_[i | b]);
  }
}

void StateVector::apply_z(int q) {
  check_qubit(q);
  const uint64_t b = bit(q);
  for (uint64_t i = 0; i < amps_.size(); ++i) {
    if (i & b) amps_[i] = -amps_[i];
  }
}

void StateVector::apply_cx(int control, int target) {
  check_qubit(control);
  check_qubit(target);
  if (control == target) throw std::invalid_argument("densesim: cx needs distinct qubits");
  const uint64_t c = bit(control), t = bit(target);
  for (uint64_t i = 0; i < amps_.size(); ++i) {
    if ((i & c) && !(i & t)) std::swap(amps_[i], amps_[i | t]);
  }
}

void StateVector::apply_cz(int a, int b) {
  check_qubit(a);
  check_qubit(b);
  if (a == b) throw std::invalid_argument("densesim: cz needs distinct qubits");
  const uint64_t m = bit(a) | bit(b);
  for (uint64_t i = 0; i < amps_.size(); ++i) {
    if ((i & m) == m) amps_[i] = -amps_[i];
  }
}

void StateVector::apply_ccx(int c1, int c2, int target) {
  check_qubit(c1);
  check_qubit(c2);
  check_qubit(target);
  if (c1 == c2 || c1 == target || c2 == target) {
    throw std::invalid_argument("densesim: ccx needs distinct qubits");
  }
  const uint64_t c = bit(c1) | bit(c2), t = bit(target);
  for (uint64_t i = 0; i < amps_.size(); ++i) {
    if ((i & c) == c && !(i & t)) std::swap(amps_[i], amps_[i | t]);
  }
}

void StateVector::apply_swap(int a, int b) {
  check_qubit(a);
  check_qubit(b);
  if (a == b) return;
  const uint64_t ba = bit(a), bb = bit(b);
  for (uint64_t i = 0; i < amps_.size(); ++i) {
    if ((i & ba) && !(i & bb)) std::swap(amps_[i], amps_[(i & ~ba) | bb]);
  }
}

StateVector coset_to_state(const gf2::Coset& c) {
  check_state_size(c.ambient_dim());
  StateVector s(c.ambient_dim());
  s.mutable_amplitudes()[0] = 0;
  const double a = 1.0 / std::sqrt(static_cast<double>(c.size()));
  for (uint64_t i = 0; i < c.size(); ++i) {
    s.mutable_amplitudes()[c.member(i).bits()] = a;
  }
  return s;
}

StateVector hadamard_all(StateVector s) {
  // In-place Walsh-Hadamard butterfly.
  auto& a = s.mutable_amplitudes();
  const double scale = 1.0 / std::sqrt(static_cast<double>(a.size()));
  for (uint64_t h = 1; h < a.size(); h <<= 1) {
    for (uint64_t i = 0; i < a.size(); i += h << 1) {
      for (uint64_t j = i; j < i + h; ++j) {
        Complex x = a[j], y = a[j + h];
        a[j] = x + y;
        a[j + h] = x - y;
      }
    }
  }
  for (auto& x : a) x *= scale;
  return s;
}

StateVector phase_oracle(StateVector s, const BasisPredicate& pred) {
  auto& a = s.mutable_amplitudes();
  for (uint64_t i = 0; i < a.size(); ++i) {
    if (pred(gf2::Vector(s.n_qubits(), i))) a[i] = -a[i];
  }
  return s;
}

StateVector tensor(const StateVector& a, const StateVector& b) {
  const int n = a.n_qubits() + b.n_qubits();
  check_state_size(n);
  std::vector<Complex> out(uint64_t{1} << n);
  for (uint64_t i = 0; i < a.dim(); ++i)
    for (uint64_t j = 0; j < b.dim(); ++j) out[(i << b.n_qubits()) | j] = a.amplitude(i) * b.amplitude(j);
  return StateVector::from_amplitudes(n, std::move(out));
}

namespace {

uint64_t pack_outcome(uint64_t index, int n, const std::vector<int>& qubits) {
  uint64_t key = 0;
  for (int q : qubits) key = (key << 1) | ((index >> (n - 1 - q)) & 1);
  return key;
}

}  // namespace

std::vector<double> outcome_distribution(const StateVector& s,
                                         const std::vector<int>& qubits) {
  for (int q : qubits) {
    if (q < 0 || q >= s.n_qubits()) throw std::out_of_range("densesim: qubit index");
  }
  std::vector<double> p(uint64_t{1} << qubits.size(), 0.0);
  for (uint64_t i = 0; i < s.dim(); ++i) {
    p[pack_outcome(i, s.n_qubits(), qubits)] += std::norm(s.amplitude(i));
  }
  return p;
}

Measurement measure_standard(const StateVector& s, const std::vector<int>& qubits,
                             Rng& rng) {
  if (qubits.empty()) return {{}, s};
  std::vector<double> p = outcome_distribution(s, qubits);
  std::discrete_distribution<uint64_t> pick(p.begin(), p.end());
  const uint64_t key = pick(rng);
  std::vector<Complex> post(s.dim(), Complex(0));
  const double scale = 1.0 / std::sqrt(p[key]);
  for (uint64_t i = 0; i < s.dim(); ++i) {
    if (pack_outcome(i, s.n_qubits(), qubits) == key) post[i] = s.amplitude(i) * scale;
  }
  Measurement m;
  for (size_t j = 0; j < qubits.size(); ++j) {
    m.outcome.push_back((key >> (qubits.size() - 1 - j)) & 1);
  }
  m.post = StateVector::from_amplitudes(s.n_qubits(), std::move(post));
  return m;
}

Complex inner(const StateVector& a, const StateVector& b) {
  if (a.n_qubits() != b.n_qubits()) throw std::invalid_argument("densesim: size mismatch");
  Complex acc = 0;
  for (uint64_t i = 0; i < a.dim(); ++i) acc += std::conj(a.amplitude(i)) * b.amplitude(i);
  return acc;
}

double fidelity(const StateVector& a, const StateVector& b) {
  return std::norm(inner(a, b));
}

bool equal_up_to_phase(const StateVector& a, const StateVector& b, double tol) {
  return std::abs(std::abs(inner(a, b)) - 1.0) <= tol;
}

SparseState SparseState::from_dense(const StateVector& s, double cutoff) {
  SparseState out;
  out.n_qubits = s.n_qubits();
  for (uint64_t i = 0; i < s.dim(); ++i) {
    if (std::abs(s.amplitude(i)) > cutoff) out.amps[i] = s.amplitude(i);
  }
  return out;
}

StateVector SparseState::to_dense() const {
  check_state_size(n_qubits);
  std::vector<Complex> a(uint64_t{1} << n_qubits, Complex(0));
  for (const auto& [i, v] : amps) a.at(i) = v;
  return StateVector::from_amplitudes(n_qubits, std::move(a));
}

double SparseState::norm() const {
  double acc = 0;
  for (const auto& [i, v] : amps) acc += std::norm(v);
  return std::sqrt(acc);
}

std::vector<uint64_t> SparseState::support() const {
  std::vector<uint64_t> out;
  for (const auto& [i, v] : amps) {
    if (std::norm(v) > 0) out.push_back(i);
  }
  return out;
}

uint64_t SparseState::measure_all(Rng& rng) const {
  std::vector<uint64_t> keys;
  std::vector<double> w;
  for (const auto& [i, v] : amps) {
    keys.push_back(i);
    w.push_back(std::norm(v));
  }
  if (keys.empty()) throw std::logic_error("densesim: measuring an empty state");
  std::discrete_distribution<size_t> pick(w.begin(), w.end());
  return keys[pick(rng)];
}

uint64_t SparseState::measure_prefix(int k, Rng& rng) {
  if (k < 0 || k > n_qubits) throw std::invalid_argument("densesim: bad prefix length");
  const int shift = n_qubits - k;
  std::map<uint64_t, double> weight;
  for (const auto& [i, v] : amps) weight[shift == 64 ? 0 : i >> shift] += std::norm(v);
  if (weight.empty()) throw std::logic_error("densesim: measuring an empty state");
  std::vector<uint64_t> keys;
  std::vector<double> w;
  for (const auto& [p, x] : weight) {
    keys.push_back(p);
    w.push_back(x);
  }
  const uint64_t outcome = keys[std::discrete_distribution<size_t>(w.begin(), w.end())(rng)];
  const double scale = 1.0 / std::sqrt(weight[outcome]);
  std::map<uint64_t, Complex> kept;
  for (const auto& [i, v] : amps) {
    if ((shift == 64 ? 0 : i >> shift) == outcome) kept[i] = v * scale;
  }
  amps = std::move(kept);
  return outcome;
}

DensityMatrix DensityMatrix::pure(const StateVector& s) {
  if (s.n_qubits() > kMaxDensityQubits) {
    throw std::invalid_argument("densesim: density matrices are limited to 10 qubits");
  }
  Eigen::VectorXcd v(s.dim());
  for (uint64_t i = 0; i < s.dim(); ++i) v(i) = s.amplitude(i);
  DensityMatrix d;
  d.n_ = s.n_qubits();
  d.m_ = v * v.adjoint();
  return d;
}

DensityMatrix DensityMatrix::from_matrix(int n_qubits, Eigen::MatrixXcd m,
                                         bool validate) {
  if (n_qubits < 0 || n_qubits > kMaxDensityQubits) {
    throw std::invalid_argument("densesim: density matrices are limited to 10 qubits");
  }
  const Eigen::Index d = Eigen::Index{1} << n_qubits;
  if (m.rows() != d || m.cols() != d) throw std::invalid_argument("densesim: matrix must be 2^n x 2^n");
  DensityMatrix out;
  out.n_ = n_qubits;
  out.m_ = std::move(m);
  if (validate) out.validate();
  return out;
}

DensityMatrix DensityMatrix::maximally_mixed(int n_qubits) {
  const Eigen::Index d = Eigen::Index{1} << n_qubits;
  return from_matrix(n_qubits, Eigen::MatrixXcd::Identity(d, d) / static_cast<double>(d));
}

void DensityMatrix::validate(double herm_tol, double trace_tol, double psd_tol) const {
  if ((m_ - m_.adjoint()).cwiseAbs().maxCoeff() > herm_tol) {
    throw std::invalid_argument("densesim: density matrix not Hermitian");
  }
  if (std::abs(m_.trace() - Complex(1)) > trace_tol) {
    throw std::invalid_argument("densesim: density matrix trace is not 1");
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(m_, Eigen::EigenvaluesOnly);
  if (es.eigenvalues().minCoeff() < -psd_tol) {
    throw std::invalid_argument("densesim: density matrix not positive semidefinite");
  }
}

double trace_norm_hermitian(const Eigen::MatrixXcd& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(m, Eigen::EigenvaluesOnly);
  return es.eigenvalues().cwiseAbs().sum();
}

double trace_distance(const DensityMatrix& a, const DensityMatrix& b) {
  if (a.dim() != b.dim()) throw std::invalid_argument("trace_distance: dimension mismatch");
  return 0.5 * trace_norm_hermitian(a.matrix() - b.matrix());
}

DensityMatrix conjugate_pauli(const DensityMatrix& rho, uint64_t x, uint64_t z) {
  const Eigen::Index d = rho.dim();
  Eigen::MatrixXcd out(d, d);
  // (X^x Z^z)|j> = (-1)^{z.j} |j^x>
  for (Eigen::Index i = 0; i < d; ++i) {
    for (Eigen::Index j = 0; j < d; ++j) {
      const uint64_t si = static_cast<uint64_t>(i) ^ x, sj = static_cast<uint64_t>(j) ^ x;
      const int sign = std::popcount((si & z) ^ (sj & z)) & 1;
      out(i, j) = sign ? -rho.entry(si, sj) : rho.entry(si, sj);
    }
  }
  return DensityMatrix::from_matrix(rho.n_qubits(), std::move(out), false);
}

}  // namespace cosetlab::dense
