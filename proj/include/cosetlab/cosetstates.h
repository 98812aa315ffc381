#pragma once

#include <complex>
#include <functional>
#include <map>
#include <string>
#include <utility>

#include "cosetlab/densesim.h"
#include "cosetlab/gf2.h"

namespace cosetlab::cosets {

using Complex = std::complex<double>;

// A coset S_y whose first coordinate takes both values, kept as the triple
// (S*_{y,0}, v0, w): S*_{y,0} is the part of the linear space S*_y with first
// coordinate 0, w completes it to S*_y, and S_{y,b} = S*_{y,0} + v_b with
// v1 = v0 + w.
class BalancedCoset {
 public:
  BalancedCoset() = default;
  // Throws "first coordinate constant" when S_y does not split.
  explicit BalancedCoset(const gf2::Coset& s);

  static bool is_balanced(const gf2::Coset& s);

  int n() const { return full_.ambient_dim(); }
  const gf2::Coset& full() const { return full_; }
  const gf2::Coset& zero_directions() const { return zero_dirs_; }  // S*_{y,0}
  const gf2::Vector& v0() const { return v0_; }
  const gf2::Vector& w() const { return w_; }
  gf2::Vector v(int b) const { return b ? v0_ ^ w_ : v0_; }
  gf2::Coset slice(int b) const;          // S_{y,b}
  gf2::Coset open_x_domain() const;       // (S*_{y,0})^perp
  gf2::Coset full_dual() const;           // (S*_y)^perp

  friend bool operator==(const BalancedCoset&, const BalancedCoset&) = default;

 private:
  gf2::Coset full_;
  gf2::Coset zero_dirs_;
  gf2::Vector v0_;
  gf2::Vector w_;
};

// |S_{y,bit}>
struct SliceState {
  BalancedCoset coset;
  int bit = 0;
};

// amp0 |0>|S_{y,0}> + amp1 |1>|S_{y,1}>, B being a separate qubit.
class CosetQubitState {
 public:
  CosetQubitState() = default;
  CosetQubitState(Complex amp0, Complex amp1, BalancedCoset coset, std::string y);

  Complex amp(int b) const { return b ? amp1_ : amp0_; }
  const BalancedCoset& coset() const { return coset_; }
  gf2::Coset coset0() const { return coset_.slice(0); }
  gf2::Coset coset1() const { return coset_.slice(1); }
  const std::string& y() const { return y_; }

  std::string to_text() const;
  static CosetQubitState from_text(const std::string& text);

 private:
  Complex amp0_ = 1, amp1_ = 0;
  BalancedCoset coset_;
  std::string y_;
};

struct FirstBitResult {
  int b;
  SliceState post;
};
FirstBitResult restrict_first_bit(const gf2::Coset& s, Rng& rng);

// H^n Phase H^n on |S_{y,b}>, driven by a membership predicate for S_y^perp.
SliceState rotate_first_bit(const SliceState& s, const dense::BasisPredicate& dual_pred);

struct OpenOutcome {
  int b;
  gf2::Vector u;
  friend auto operator<=>(const OpenOutcome&, const OpenOutcome&) = default;
};
OpenOutcome measure_x_open(const CosetQubitState& s, Rng& rng);
OpenOutcome measure_z_open(const CosetQubitState& s, Rng& rng);

using OutcomeDistribution = std::map<std::pair<int, uint64_t>, double>;
OutcomeDistribution z_open_distribution(const CosetQubitState& s);
OutcomeDistribution x_open_distribution(const CosetQubitState& s);

// Dense embedding with B as qubit 0 followed by the n qubits of U.
dense::StateVector to_dense(const CosetQubitState& s);
dense::StateVector to_dense(const SliceState& s);
dense::SparseState to_sparse(const CosetQubitState& s);

double total_variation(const OutcomeDistribution& a, const OutcomeDistribution& b);

}  // namespace cosetlab::cosets
