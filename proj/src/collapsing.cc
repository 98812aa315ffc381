#include "cosetlab/collapsing.h"

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <random>
#include <stdexcept>
#include <string>

namespace cosetlab::collapsing {
namespace {

using Eigen::Index;
using Eigen::MatrixXcd;

uint64_t dim_of(int n) { return uint64_t{1} << n; }

void check_rho(const dense::DensityMatrix& rho, int n) {
  if (rho.n_qubits() != n) throw std::invalid_argument("collapsing: density matrix has wrong size");
}

// rho . [i^j in T] summed literally as sum_u Pi_u rho Pi_u.
void add_projected(MatrixXcd& out, const MatrixXcd& rho, const gf2::Coset& t, double weight) {
  const int n = t.ambient_dim();
  std::map<uint64_t, std::vector<Index>> cosets;
  for (uint64_t x = 0; x < dim_of(n); ++x) {
    cosets[t.reduce(gf2::Vector(n, x)).bits()].push_back(static_cast<Index>(x));
  }
  for (const auto& [rep, members] : cosets) {
    for (Index i : members)
      for (Index j : members) out(i, j) += weight * rho(i, j);
  }
}

dense::DensityMatrix mask_by_difference(const dense::DensityMatrix& rho,
                                        const std::vector<double>& p) {
  MatrixXcd m = rho.matrix();
  for (Index i = 0; i < m.rows(); ++i)
    for (Index j = 0; j < m.cols(); ++j) m(i, j) *= p[static_cast<uint64_t>(i ^ j)];
  return dense::DensityMatrix::from_matrix(rho.n_qubits(), std::move(m), false);
}

dense::DensityMatrix plus_density(int n) {
  const double v = 1.0 / static_cast<double>(dim_of(n));
  return dense::DensityMatrix::from_matrix(n, MatrixXcd::Constant(dim_of(n), dim_of(n), v), false);
}

std::vector<double> sampled_containment(const ChannelSpec& spec) {
  Rng rng(spec.seed);
  std::vector<double> p(dim_of(spec.n), 0.0);
  for (uint64_t s = 0; s < spec.samples; ++s) {
    const gf2::Coset t = gf2::sample_subspace(spec.n, spec.k, rng);
    for (const auto& v : t.members()) p[v.bits()] += 1.0;
  }
  for (double& x : p) x /= static_cast<double>(spec.samples);
  return p;
}

dense::SparseState uniform_over(const gf2::Coset& c, int r_qubits) {
  dense::SparseState s;
  s.n_qubits = c.ambient_dim() + r_qubits;
  const double a = 1.0 / std::sqrt(static_cast<double>(c.size()));
  for (const auto& v : c.members()) s.amps[v.bits() << r_qubits] = a;
  return s;
}

// Two-outcome measurement {|phi><phi|, I - |phi><phi|} on a memoryless U.
bool project_onto(const dense::SparseState& s, const gf2::Coset& c, Rng& rng) {
  dense::Complex overlap = 0;
  const double a = 1.0 / std::sqrt(static_cast<double>(c.size()));
  for (const auto& [idx, amp] : s.amps) {
    if (c.contains(gf2::Vector(c.ambient_dim(), idx))) overlap += a * amp;
  }
  return std::bernoulli_distribution(std::min(1.0, std::norm(overlap)))(rng);
}

}  // namespace

void ChannelSpec::validate() const {
  if (n < 1 || n > dense::kMaxDensityQubits)
    throw std::invalid_argument("collapsing: need 1 <= n <= " + std::to_string(dense::kMaxDensityQubits));
  if (k < 0 || k > n) throw std::invalid_argument("collapsing: need 0 <= k <= n");
  if (mode == Mode::kExact && n > kMaxExactQubits)
    throw std::invalid_argument("collapsing: exact enumeration needs n <= " +
                                std::to_string(kMaxExactQubits));
  if (mode == Mode::kMonteCarlo && samples == 0)
    throw std::invalid_argument("collapsing: Monte-Carlo mode needs samples > 0");
}

Mode parse_mode(const std::string& s) {
  if (s == "exact") return Mode::kExact;
  if (s == "counting") return Mode::kCounting;
  if (s == "mc" || s == "monte-carlo") return Mode::kMonteCarlo;
  throw std::invalid_argument("collapsing: unknown mode '" + s + "'");
}

std::string mode_name(Mode m) {
  switch (m) {
    case Mode::kExact: return "exact";
    case Mode::kCounting: return "counting";
    case Mode::kMonteCarlo: return "monte-carlo";
  }
  return "?";
}

double containment_probability(int n, int k) {
  if (k == 0) return 0.0;
  return static_cast<double>(gf2::gaussian_binomial(n - 1, k - 1)) /
         static_cast<double>(gf2::gaussian_binomial(n, k));
}

dense::DensityMatrix phi1_apply(const dense::DensityMatrix& rho, const ChannelSpec& spec) {
  spec.validate();
  check_rho(rho, spec.n);
  switch (spec.mode) {
    case Mode::kExact: {
      const auto subspaces = gf2::enumerate_subspaces(spec.n, spec.k);
      MatrixXcd out = MatrixXcd::Zero(rho.dim(), rho.dim());
      const double w = 1.0 / static_cast<double>(subspaces.size());
      for (const auto& t : subspaces) add_projected(out, rho.matrix(), t, w);
      return dense::DensityMatrix::from_matrix(spec.n, std::move(out), false);
    }
    case Mode::kCounting: {
      std::vector<double> p(dim_of(spec.n), containment_probability(spec.n, spec.k));
      p[0] = 1.0;
      return mask_by_difference(rho, p);
    }
    case Mode::kMonteCarlo:
      return mask_by_difference(rho, sampled_containment(spec));
  }
  throw std::logic_error("collapsing: bad mode");
}

dense::DensityMatrix phi2_apply(const dense::DensityMatrix& rho) {
  MatrixXcd m = rho.matrix().diagonal().asDiagonal();
  return dense::DensityMatrix::from_matrix(rho.n_qubits(), std::move(m), false);
}

dense::DensityMatrix phi1_within(const dense::DensityMatrix& rho, const gf2::Coset& s, int k) {
  if (!s.is_subspace()) throw std::invalid_argument("phi1_within: S must be a subspace");
  if (s.dim() > kMaxExactQubits) throw std::invalid_argument("phi1_within: dim(S) too large");
  check_rho(rho, s.ambient_dim());
  const auto local = gf2::enumerate_subspaces(s.dim(), k);
  MatrixXcd out = MatrixXcd::Zero(rho.dim(), rho.dim());
  const double w = 1.0 / static_cast<double>(local.size());
  for (const auto& l : local) {
    std::vector<gf2::Vector> image;
    for (const auto& v : l.basis()) image.push_back(s.member(v.bits()));
    add_projected(out, rho.matrix(), gf2::Coset(s.ambient_dim(), image, gf2::Vector(s.ambient_dim())),
                  w);
  }
  return dense::DensityMatrix::from_matrix(rho.n_qubits(), std::move(out), false);
}

double closed_form_alpha(int n) { return 1.0 / std::ldexp(1.0, n); }

double closed_form_beta(int n, int k) {
  const double N = std::ldexp(1.0, n);
  return (std::ldexp(1.0, k) - 1.0) / (N * N - N);
}

double closed_form_distance(int n, int k) { return (std::ldexp(1.0, k) - 1.0) / std::ldexp(1.0, n); }

DistanceReport plus_state_distance(const ChannelSpec& spec) {
  spec.validate();
  DistanceReport r;
  r.n = spec.n;
  r.k = spec.k;
  r.mode = spec.mode;
  r.closed_form = closed_form_distance(spec.n, spec.k);
  const double N = static_cast<double>(dim_of(spec.n));
  if (spec.mode == Mode::kMonteCarlo) {
    // One uniformly drawn off-diagonal pair per sampled subspace keeps the
    // estimate of beta unbiased; the diagonal is exactly 1/2^n.
    Rng rng(spec.seed);
    std::uniform_int_distribution<uint64_t> nonzero(1, dim_of(spec.n) - 1);
    uint64_t hits = 0;
    for (uint64_t s = 0; s < spec.samples; ++s) {
      const gf2::Coset t = gf2::sample_subspace(spec.n, spec.k, rng);
      hits += t.contains(gf2::Vector(spec.n, nonzero(rng)));
    }
    const double m = static_cast<double>(spec.samples);
    const double p = static_cast<double>(hits) / m;
    r.alpha = 1.0 / N;
    r.beta = p / N;
    r.distance = (N - 1.0) * r.beta;
    r.std_err = (N - 1.0) / N * std::sqrt(p * (1.0 - p) / m);
    r.samples = spec.samples;
  } else {
    const dense::DensityMatrix plus = plus_density(spec.n);
    const dense::DensityMatrix out1 = phi1_apply(plus, spec);
    const dense::DensityMatrix out2 = phi2_apply(plus);
    r.alpha = out1.entry(0, 0).real();
    r.beta = spec.n > 0 ? out1.entry(0, 1).real() : 0.0;
    r.distance = dense::trace_distance(out1, out2);
  }
  r.abs_err = std::abs(r.distance - r.closed_form);
  return r;
}

// ---- game ----

bool DualAccess::member(const gf2::Vector& v) {
  if (!t_perp_) throw std::logic_error("dual oracle not available in this variant");
  if (queries_ >= budget_) throw std::logic_error("dual oracle query budget exhausted");
  ++queries_;
  return t_perp_->contains(v);
}

GameResult run_coset_collapsing_game(const GameConfig& cfg, const A1& a1, const A2& a2, Rng& rng) {
  const gf2::Coset& s = cfg.s;
  if (!s.is_subspace()) throw std::invalid_argument("collapsing game: S must be a subspace");
  if (cfg.k < 0 || cfg.k > s.dim()) throw std::invalid_argument("collapsing game: need 0 <= k <= dim S");
  const int n = s.ambient_dim();
  GameResult res;
  // One T serves both the dual oracle and the coset measurement.
  res.t = gf2::sample_subspace_of(s, cfg.k, rng);
  DualAccess dual;
  if (cfg.variant == Variant::kDualAccess) dual = DualAccess(gf2::dual(res.t), cfg.dual_budget);

  Submission sub = a1(s, dual, rng);
  res.dual_queries = dual.queries();
  dense::SparseState& st = sub.state;
  if (sub.r_qubits < 0 || st.n_qubits != n + sub.r_qubits || std::abs(st.norm() - 1.0) > 1e-9)
    throw std::invalid_argument("collapsing game: malformed submission");
  const auto u_of = [&](uint64_t idx) { return gf2::Vector(n, idx >> sub.r_qubits); };

  // Subspace check {Pi_S, I - Pi_S}.
  double in_s = 0;
  for (const auto& [idx, a] : st.amps)
    if (s.contains(u_of(idx))) in_s += std::norm(a);
  if (!std::bernoulli_distribution(std::min(1.0, in_s))(rng)) {
    res.outcome = Outcome::kCheckFailed;
    return res;
  }
  std::erase_if(st.amps, [&](const auto& e) { return !s.contains(u_of(e.first)); });

  // Coset measurement {Pi_u}: outcome is the canonical representative mod T.
  std::map<uint64_t, double> weight;
  for (const auto& [idx, a] : st.amps) weight[res.t.reduce(u_of(idx)).bits()] += std::norm(a);
  double total = 0;
  for (const auto& [rep, w] : weight) total += w;
  double pick = std::uniform_real_distribution<double>(0.0, total)(rng);
  uint64_t chosen = weight.rbegin()->first;
  for (const auto& [rep, w] : weight) {
    if (pick < w) {
      chosen = rep;
      break;
    }
    pick -= w;
  }
  std::erase_if(st.amps, [&](const auto& e) { return res.t.reduce(u_of(e.first)).bits() != chosen; });
  const double scale = 1.0 / st.norm();
  for (auto& [idx, a] : st.amps) a *= scale;

  res.challenge = std::bernoulli_distribution(0.5)(rng) ? 1 : 0;
  if (res.challenge) st.measure_prefix(n, rng);
  res.guess = a2(s, st, rng);
  res.outcome = res.guess == res.challenge ? Outcome::kWin : Outcome::kLose;
  return res;
}

std::pair<A1, A2> guessing_adversary() {
  A1 a1 = [](const gf2::Coset& s, DualAccess&, Rng&) { return Submission{uniform_over(s, 0), 0}; };
  A2 a2 = [](const gf2::Coset&, dense::SparseState&, Rng& rng) {
    return std::bernoulli_distribution(0.5)(rng) ? 1 : 0;
  };
  return {a1, a2};
}

std::pair<A1, A2> plus_state_adversary() {
  A1 a1 = [](const gf2::Coset& s, DualAccess&, Rng&) { return Submission{uniform_over(s, 0), 0}; };
  A2 a2 = [](const gf2::Coset& s, dense::SparseState& st, Rng& rng) {
    return project_onto(st, s, rng) ? 0 : 1;
  };
  return {a1, a2};
}

std::pair<A1, A2> helstrom_adversary(int k) {
  A1 a1 = [](const gf2::Coset& s, DualAccess&, Rng&) { return Submission{uniform_over(s, 0), 0}; };
  A2 a2 = [k](const gf2::Coset& s, dense::SparseState& st, Rng& rng) {
    const int n = s.ambient_dim();
    const dense::DensityMatrix rho = dense::DensityMatrix::pure(uniform_over(s, 0).to_dense());
    const MatrixXcd delta = phi1_within(rho, s, k).matrix() - phi2_apply(rho).matrix();
    Eigen::SelfAdjointEigenSolver<MatrixXcd> es(delta);
    const Eigen::VectorXcd psi = Eigen::Map<const Eigen::VectorXcd>(
        st.to_dense().amplitudes().data(), static_cast<Index>(dim_of(n)));
    double p_plus = 0;
    for (Index c = 0; c < es.eigenvalues().size(); ++c) {
      if (es.eigenvalues()(c) > 1e-12) p_plus += std::norm(es.eigenvectors().col(c).dot(psi));
    }
    return std::bernoulli_distribution(std::min(1.0, p_plus))(rng) ? 0 : 1;
  };
  return {a1, a2};
}

std::pair<A1, A2> dual_learning_adversary(int k) {
  auto learned = std::make_shared<gf2::Coset>();
  A1 a1 = [k, learned](const gf2::Coset& s, DualAccess& dual, Rng& rng) {
    const int n = s.ambient_dim();
    *learned = s;
    if (dual.available()) {
      std::vector<gf2::Vector> found;
      const bool exhaustive = dual.budget() >= dim_of(n);
      const uint64_t tries = exhaustive ? dim_of(n) : dual.budget();
      for (uint64_t i = 0; i < tries; ++i) {
        const gf2::Vector v = exhaustive ? gf2::Vector(n, i) : gf2::Vector::random(n, rng);
        if (dual.member(v)) found.push_back(v);
      }
      const gf2::Coset span = gf2::Coset::span(n, found);
      if (span.dim() == n - k) *learned = gf2::dual(span);
    }
    return Submission{uniform_over(*learned, 0), 0};
  };
  A2 a2 = [learned](const gf2::Coset&, dense::SparseState& st, Rng& rng) {
    return project_onto(st, *learned, rng) ? 0 : 1;
  };
  return {a1, a2};
}

std::pair<A1, A2> outside_adversary() {
  A1 a1 = [](const gf2::Coset& s, DualAccess&, Rng&) {
    const int n = s.ambient_dim();
    for (uint64_t x = 0; x < dim_of(n); ++x) {
      if (!s.contains(gf2::Vector(n, x))) {
        dense::SparseState st;
        st.n_qubits = n;
        st.amps[x] = 1.0;
        return Submission{st, 0};
      }
    }
    throw std::invalid_argument("outside_adversary: S is the whole space");
  };
  A2 a2 = [](const gf2::Coset&, dense::SparseState&, Rng&) { return 0; };
  return {a1, a2};
}

double optimal_win_probability(int dim_s, int k) {
  return 0.5 + 0.5 * (std::ldexp(1.0, k) - 1.0) / std::ldexp(1.0, dim_s);
}

}  // namespace cosetlab::collapsing
