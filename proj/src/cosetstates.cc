#include "cosetlab/cosetstates.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace cosetlab::cosets {

BalancedCoset::BalancedCoset(const gf2::Coset& s) : full_(s) {
  if (!is_balanced(s)) throw std::invalid_argument("first coordinate constant");
  // In reduced echelon form only the leading row can touch coordinate 0.
  const auto& rows = s.basis();
  w_ = rows.front();
  zero_dirs_ = gf2::Coset(s.ambient_dim(), {rows.begin() + 1, rows.end()},
                          gf2::Vector(s.ambient_dim()));
  v0_ = s.shift();
}

bool BalancedCoset::is_balanced(const gf2::Coset& s) {
  return s.dim() > 0 && s.basis().front().first();
}

gf2::Coset BalancedCoset::slice(int b) const {
  return zero_dirs_.translate(v(b));
}

gf2::Coset BalancedCoset::open_x_domain() const { return gf2::dual(zero_dirs_); }

gf2::Coset BalancedCoset::full_dual() const { return gf2::dual(full_.linear_part()); }

CosetQubitState::CosetQubitState(Complex amp0, Complex amp1, BalancedCoset coset,
                                 std::string y)
    : amp0_(amp0), amp1_(amp1), coset_(std::move(coset)), y_(std::move(y)) {
  if (std::abs(std::norm(amp0) + std::norm(amp1) - 1.0) > 1e-10) {
    throw std::invalid_argument("CosetQubitState: amplitudes not normalized");
  }
}

std::string CosetQubitState::to_text() const {
  char buf[160];
  std::snprintf(buf, sizeof buf, ";amp0=%.17g,%.17g;amp1=%.17g,%.17g;y=", amp0_.real(),
                amp0_.imag(), amp1_.real(), amp1_.imag());
  return coset_.full().to_text() + buf + y_;
}

CosetQubitState CosetQubitState::from_text(const std::string& text) {
  auto field = [&](const std::string& key) {
    size_t p = text.find(key);
    if (p == std::string::npos) throw std::invalid_argument("CosetQubitState: missing " + key);
    p += key.size();
    size_t e = text.find(';', p);
    return text.substr(p, e == std::string::npos ? std::string::npos : e - p);
  };
  auto complex_of = [](const std::string& s) {
    size_t c = s.find(',');
    return Complex(std::stod(s.substr(0, c)), std::stod(s.substr(c + 1)));
  };
  size_t amp_pos = text.find(";amp0=");
  gf2::Coset full = gf2::Coset::from_text(text.substr(0, amp_pos));
  return CosetQubitState(complex_of(field("amp0=")), complex_of(field("amp1=")),
                         BalancedCoset(full), field("y="));
}

FirstBitResult restrict_first_bit(const gf2::Coset& s, Rng& rng) {
  BalancedCoset bc(s);
  // Both slices have |S_y|/2 elements.
  const int b = std::bernoulli_distribution(0.5)(rng) ? 1 : 0;
  return {b, SliceState{bc, b}};
}

SliceState rotate_first_bit(const SliceState& s, const dense::BasisPredicate& dual_pred) {
  const gf2::Coset perp = s.coset.full_dual();
  const int n = s.coset.n();
  auto agrees = [&](const gf2::Vector& v) { return dual_pred(v) == perp.contains(v); };
  bool ok = true;
  if (n <= 16) {
    for (uint64_t x = 0; x < (uint64_t{1} << n) && ok; ++x) ok = agrees(gf2::Vector(n, x));
  } else {
    for (const auto& b : perp.basis()) ok = ok && agrees(b);
    Rng probe(0x5eed);
    for (int i = 0; i < 256 && ok; ++i) ok = agrees(gf2::Vector::random(n, probe));
  }
  if (!ok) throw std::invalid_argument("rotate_first_bit: predicate inconsistent with stored coset");
  return SliceState{s.coset, 1 - s.bit};
}

OpenOutcome measure_z_open(const CosetQubitState& s, Rng& rng) {
  const int b = std::bernoulli_distribution(std::norm(s.amp(1)))(rng) ? 1 : 0;
  const gf2::Coset slice = s.coset().slice(b);
  std::uniform_int_distribution<uint64_t> pick(0, slice.size() - 1);
  return {b, slice.member(pick(rng))};
}

OpenOutcome measure_x_open(const CosetQubitState& s, Rng& rng) {
  const gf2::Coset dom = s.coset().open_x_domain();
  std::uniform_int_distribution<uint64_t> pick(0, dom.size() - 1);
  const gf2::Vector u = dom.member(pick(rng));
  const double sign = u.dot(s.coset().w()) ? -1.0 : 1.0;
  const double p0 = std::norm(s.amp(0) + sign * s.amp(1)) / 2.0;
  const int b = std::bernoulli_distribution(std::clamp(1.0 - p0, 0.0, 1.0))(rng) ? 1 : 0;
  return {b, u};
}

OutcomeDistribution z_open_distribution(const CosetQubitState& s) {
  OutcomeDistribution d;
  for (int b = 0; b < 2; ++b) {
    const double p = std::norm(s.amp(b));
    if (p == 0) continue;
    const gf2::Coset slice = s.coset().slice(b);
    for (uint64_t i = 0; i < slice.size(); ++i) {
      d[{b, slice.member(i).bits()}] += p / static_cast<double>(slice.size());
    }
  }
  return d;
}

OutcomeDistribution x_open_distribution(const CosetQubitState& s) {
  OutcomeDistribution d;
  const gf2::Coset dom = s.coset().open_x_domain();
  const double pu = 1.0 / static_cast<double>(dom.size());
  for (uint64_t i = 0; i < dom.size(); ++i) {
    const gf2::Vector u = dom.member(i);
    const double sign = u.dot(s.coset().w()) ? -1.0 : 1.0;
    const double p0 = std::norm(s.amp(0) + sign * s.amp(1)) / 2.0;
    const double p1 = std::norm(s.amp(0) - sign * s.amp(1)) / 2.0;
    if (p0 > 0) d[{0, u.bits()}] += pu * p0;
    if (p1 > 0) d[{1, u.bits()}] += pu * p1;
  }
  return d;
}

dense::StateVector to_dense(const CosetQubitState& s) {
  const int n = s.coset().n();
  if (n + 1 > dense::kMaxStateQubits) throw std::invalid_argument("to_dense: coset too large");
  std::vector<Complex> a(uint64_t{1} << (n + 1), Complex(0));
  for (int b = 0; b < 2; ++b) {
    const gf2::Coset slice = s.coset().slice(b);
    const double scale = 1.0 / std::sqrt(static_cast<double>(slice.size()));
    for (uint64_t i = 0; i < slice.size(); ++i) {
      a[(uint64_t{static_cast<unsigned>(b)} << n) | slice.member(i).bits()] = s.amp(b) * scale;
    }
  }
  return dense::StateVector::from_amplitudes(n + 1, std::move(a));
}

dense::StateVector to_dense(const SliceState& s) {
  return dense::coset_to_state(s.coset.slice(s.bit));
}

dense::SparseState to_sparse(const CosetQubitState& s) {
  dense::SparseState out;
  const int n = s.coset().n();
  out.n_qubits = n + 1;
  for (int b = 0; b < 2; ++b) {
    if (s.amp(b) == Complex(0)) continue;
    const gf2::Coset slice = s.coset().slice(b);
    const double scale = 1.0 / std::sqrt(static_cast<double>(slice.size()));
    for (uint64_t i = 0; i < slice.size(); ++i) {
      out.amps[(uint64_t{static_cast<unsigned>(b)} << n) | slice.member(i).bits()] = s.amp(b) * scale;
    }
  }
  return out;
}

double total_variation(const OutcomeDistribution& a, const OutcomeDistribution& b) {
  double acc = 0;
  for (const auto& [k, p] : a) {
    auto it = b.find(k);
    acc += std::abs(p - (it == b.end() ? 0.0 : it->second));
  }
  for (const auto& [k, p] : b) {
    if (!a.count(k)) acc += p;
  }
  return acc / 2;
}

}  // namespace cosetlab::cosets
