#pragma once

#include <complex>
#include <cstdint>
#include <functional>
#include <map>
#include <vector>

#include <Eigen/Dense>

#include "cosetlab/gf2.h"

namespace cosetlab::dense {

using Complex = std::complex<double>;

inline constexpr int kMaxStateQubits = 12;
inline constexpr int kMaxDensityQubits = 10;

// Qubit q is coordinate q of the basis string, i.e. bit (n-1-q) of the
// basis index; indices coincide with gf2::Vector packing.
class StateVector {
 public:
  StateVector() = default;
  explicit StateVector(int n_qubits);  // |0...0>

  static StateVector basis(int n_qubits, uint64_t index);
  static StateVector from_amplitudes(int n_qubits, std::vector<Complex> amps);

  int n_qubits() const { return n_; }
  uint64_t dim() const { return amps_.size(); }
  const std::vector<Complex>& amplitudes() const { return amps_; }
  Complex amplitude(uint64_t i) const { return amps_.at(i); }
  double norm() const;
  std::vector<double> probabilities() const;

  void apply_1q(int q, const Complex (&u)[2][2]);
  void apply_h(int q);
  void apply_x(int q);
  void apply_z(int q);
  void apply_cx(int control, int target);
  void apply_cz(int a, int b);
  void apply_ccx(int c1, int c2, int target);
  void apply_swap(int a, int b);

  std::vector<Complex>& mutable_amplitudes() { return amps_; }

 private:
  uint64_t bit(int q) const { return uint64_t{1} << (n_ - 1 - q); }
  void check_qubit(int q) const;

  int n_ = 0;
  std::vector<Complex> amps_;
};

using BasisPredicate = std::function<bool(const gf2::Vector&)>;

StateVector coset_to_state(const gf2::Coset& c);
StateVector hadamard_all(StateVector s);
StateVector phase_oracle(StateVector s, const BasisPredicate& pred);
StateVector tensor(const StateVector& a, const StateVector& b);

struct Measurement {
  std::vector<int> outcome;
  StateVector post;
};
Measurement measure_standard(const StateVector& s, const std::vector<int>& qubits,
                             Rng& rng);
// Probability of each outcome string on the given qubits (packed with the
// first listed qubit as the most significant bit).
std::vector<double> outcome_distribution(const StateVector& s,
                                         const std::vector<int>& qubits);

Complex inner(const StateVector& a, const StateVector& b);
double fidelity(const StateVector& a, const StateVector& b);
bool equal_up_to_phase(const StateVector& a, const StateVector& b,
                       double tol = 1e-9);

// Sparse pure state used by game harnesses to pass registers around.
struct SparseState {
  int n_qubits = 0;
  std::map<uint64_t, Complex> amps;

  static SparseState from_dense(const StateVector& s, double cutoff = 1e-14);
  StateVector to_dense() const;
  double norm() const;
  std::vector<uint64_t> support() const;
  // Full standard-basis measurement; returns the outcome index.
  uint64_t measure_all(Rng& rng) const;
  // Measures the first k qubits, collapsing in place; returns their value.
  uint64_t measure_prefix(int k, Rng& rng);
};

class DensityMatrix {
 public:
  DensityMatrix() = default;
  static DensityMatrix pure(const StateVector& s);
  static DensityMatrix from_matrix(int n_qubits, Eigen::MatrixXcd m,
                                   bool validate = true);
  static DensityMatrix maximally_mixed(int n_qubits);

  int n_qubits() const { return n_; }
  Eigen::Index dim() const { return m_.rows(); }
  const Eigen::MatrixXcd& matrix() const { return m_; }
  Complex entry(Eigen::Index i, Eigen::Index j) const { return m_(i, j); }
  Complex trace() const { return m_.trace(); }
  // Throws if not Hermitian, not unit trace or not PSD within tolerance.
  void validate(double herm_tol = 1e-10, double trace_tol = 1e-10,
                double psd_tol = 1e-9) const;

 private:
  int n_ = 0;
  Eigen::MatrixXcd m_;
};

// Half the trace norm of (a - b).
double trace_distance(const DensityMatrix& a, const DensityMatrix& b);
double trace_norm_hermitian(const Eigen::MatrixXcd& m);

// (X^x Z^z) rho (X^x Z^z)^dagger.
DensityMatrix conjugate_pauli(const DensityMatrix& rho, uint64_t x, uint64_t z);

}  // namespace cosetlab::dense
