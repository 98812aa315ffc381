#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <utility>

#include "cosetlab/densesim.h"
#include "cosetlab/gf2.h"

namespace cosetlab::collapsing {

// kExact sums the coset projectors over every k-dim subspace (n <= 4).
// kCounting uses the fraction of k-dim subspaces containing a nonzero
// vector, a Gaussian-binomial ratio (n <= 10). kMonteCarlo averages over
// `samples` uniformly drawn subspaces.
enum class Mode { kExact, kCounting, kMonteCarlo };

struct ChannelSpec {
  int n = 1;
  int k = 0;
  Mode mode = Mode::kExact;
  uint64_t samples = 10000;
  uint64_t seed = 0;

  void validate() const;
};

inline constexpr int kMaxExactQubits = 4;

Mode parse_mode(const std::string& s);
std::string mode_name(Mode m);

// Pr[d in T] for T uniform among k-dim subspaces, d != 0.
double containment_probability(int n, int k);

dense::DensityMatrix phi1_apply(const dense::DensityMatrix& rho, const ChannelSpec& spec);
dense::DensityMatrix phi2_apply(const dense::DensityMatrix& rho);

// Average over k-dim T inside the subspace s of the map rho -> rho . [i^j in T].
// Enumerates, so dim(s) <= kMaxExactQubits.
dense::DensityMatrix phi1_within(const dense::DensityMatrix& rho, const gf2::Coset& s, int k);

struct DistanceReport {
  int n = 0, k = 0;
  Mode mode = Mode::kExact;
  double alpha = 0;        // diagonal of Phi1(|+><+|)
  double beta = 0;         // off-diagonal of Phi1(|+><+|)
  double distance = 0;     // half trace norm of Phi1 - Phi2 on |+><+|
  double std_err = 0;      // Monte-Carlo only
  double closed_form = 0;  // (2^k - 1) / 2^n
  double abs_err = 0;
  uint64_t samples = 0;
};

double closed_form_alpha(int n);
double closed_form_beta(int n, int k);
double closed_form_distance(int n, int k);

DistanceReport plus_state_distance(const ChannelSpec& spec);

// ---- coset-collapsing game ----

enum class Variant { kPlain, kDualAccess };

// Membership oracle for T^perp with a query budget.
class DualAccess {
 public:
  DualAccess() = default;
  DualAccess(gf2::Coset t_perp, uint64_t budget) : t_perp_(std::move(t_perp)), budget_(budget) {}

  bool available() const { return t_perp_.has_value(); }
  uint64_t budget() const { return budget_; }
  uint64_t queries() const { return queries_; }
  bool member(const gf2::Vector& v);

 private:
  std::optional<gf2::Coset> t_perp_;
  uint64_t budget_ = 0;
  uint64_t queries_ = 0;
};

// U is the first n qubits, then r_qubits of adversary memory.
struct Submission {
  dense::SparseState state;
  int r_qubits = 0;
};

using A1 = std::function<Submission(const gf2::Coset& s, DualAccess&, Rng&)>;
using A2 = std::function<int(const gf2::Coset& s, dense::SparseState&, Rng&)>;

struct GameConfig {
  gf2::Coset s;  // public subspace
  int k = 0;     // dim T
  Variant variant = Variant::kPlain;
  uint64_t dual_budget = 0;
};

enum class Outcome { kLose, kWin, kCheckFailed };

struct GameResult {
  Outcome outcome = Outcome::kLose;
  int challenge = 0;
  int guess = 0;
  gf2::Coset t;
  uint64_t dual_queries = 0;
  bool win() const { return outcome == Outcome::kWin; }
};

GameResult run_coset_collapsing_game(const GameConfig& cfg, const A1& a1, const A2& a2, Rng& rng);

std::pair<A1, A2> guessing_adversary();
// Submits |S> and tests whether it survived; optimal without memory.
std::pair<A1, A2> plus_state_adversary();
// Submits |S> and measures the positive eigenspace of Phi1(rho) - Phi2(rho),
// computed densely. dim(S) <= kMaxExactQubits.
std::pair<A1, A2> helstrom_adversary(int k);
// Spends the dual budget learning T^perp; on success submits |T> instead of |S>.
std::pair<A1, A2> dual_learning_adversary(int k);
// Submits a basis state outside S.
std::pair<A1, A2> outside_adversary();

// Win probability of the optimal memoryless adversary: 1/2 + (2^k-1)/2^(dim S+1).
double optimal_win_probability(int dim_s, int k);

}  // namespace cosetlab::collapsing
