#include "cosetlab/oss.h"

#include <stdexcept>

#include "cosetlab/densesim.h"

namespace cosetlab::oss {
namespace {

class BitReader {
 public:
  explicit BitReader(const oracle::Bytes& b) : b_(b) {}
  bool next() {
    const bool v = (b_[pos_ >> 3] >> (7 - (pos_ & 7))) & 1;
    ++pos_;
    return v;
  }

 private:
  const oracle::Bytes& b_;
  size_t pos_ = 0;
};

void check_vk(const OssParams& p, uint64_t y) {
  if (p.r < 64 && y >> p.r) throw std::out_of_range("oss: vk wider than r bits");
}

}  // namespace

void OssParams::validate() const {
  if (r < 1 || r >= n) throw std::invalid_argument("oss params: need 1 <= r < n");
  if (n - r < 2) throw std::invalid_argument("oss params: need n - r >= 2");
  if (k != n) throw std::invalid_argument("oss params: need k = n");
  if (n > 64) throw std::invalid_argument("oss params: n is limited to 64");
  if (s < 0) throw std::invalid_argument("oss params: s must be non-negative");
}

OssOracles::OssOracles(const OssParams& p, oracle::PermHandle pi, oracle::FnHandle f)
    : params_(p), pi_(std::move(pi)), f_(std::move(f)), shared_(std::make_shared<Shared>()) {}

OssOracles OssOracles::setup(const OssParams& params, const oracle::Seed& seed) {
  params.validate();
  const size_t f_bits = static_cast<size_t>(params.k) * (params.m() + 1);
  return OssOracles(params, oracle::PermHandle(params.n, oracle::derive_seed(seed, "oss/pi")),
                    oracle::FnHandle::random(oracle::derive_seed(seed, "oss/F"), (f_bits + 7) / 8,
                                             "oss/F"));
}

const CosetData& OssOracles::coset_data(uint64_t y) const {
  check_vk(params_, y);
  std::lock_guard lock(shared_->mu);
  auto& slot = shared_->cache[y];
  if (slot) return *slot;
  auto data = std::make_unique<CosetData>();
  const int k = params_.k, m = params_.m();
  for (uint64_t ctr = 0;; ++ctr) {
    oracle::Bytes raw = f_(oracle::concat({oracle::u64_le(y), oracle::u64_le(ctr)}));
    BitReader bits(raw);
    gf2::Matrix a(k, m);
    for (int i = 0; i < k; ++i)
      for (int j = 0; j < m; ++j) a.set(i, j, bits.next());
    gf2::Vector b(k);
    for (int i = 0; i < k; ++i) b.set(i, bits.next());
    if (a.rank() == m) {
      data->a = a;
      data->b = b;
      data->resamples = static_cast<int>(ctr);
      break;
    }
  }
  data->coset = gf2::Coset::from_matrix(data->a, data->b);
  slot = std::move(data);
  return *slot;
}

uint64_t OssOracles::H(uint64_t x) const { return pi_.eval(x) >> params_.m(); }

std::pair<uint64_t, gf2::Vector> OssOracles::P(uint64_t x) const {
  const uint64_t full = pi_.eval(x);
  const int m = params_.m();
  const uint64_t y = full >> m;
  const gf2::Vector j(m, full & ((uint64_t{1} << m) - 1));
  const CosetData& c = coset_data(y);
  return {y, c.a * j ^ c.b};
}

std::optional<uint64_t> OssOracles::P_inv(uint64_t y, const gf2::Vector& u) const {
  if (u.len() != params_.k) return std::nullopt;
  const CosetData& c = coset_data(y);
  auto z = gf2::solve_affine(c.a, c.b, u);
  if (!z) return std::nullopt;
  return pi_.invert(y << params_.m() | z->bits());
}

bool OssOracles::D(uint64_t y, const gf2::Vector& v) const {
  if (v.len() != params_.k) throw std::invalid_argument("oss D: wrong vector length");
  return coset_data(y).a.left_mul(v).is_zero();
}

OssToken::OssToken(uint64_t vk, gf2::Coset sk, int gen_retries)
    : vk_(vk), sk_(std::move(sk)), gen_retries_(gen_retries) {}

OssToken::OssToken(OssToken&& other) noexcept
    : vk_(other.vk_), sk_(std::move(other.sk_)), gen_retries_(other.gen_retries_) {
  other.sk_.reset();
}

OssToken& OssToken::operator=(OssToken&& other) noexcept {
  vk_ = other.vk_;
  sk_ = std::move(other.sk_);
  gen_retries_ = other.gen_retries_;
  other.sk_.reset();
  return *this;
}

const gf2::Coset& OssToken::sk() const {
  if (!sk_) throw std::logic_error("oss token already used");
  return *sk_;
}

gf2::Coset OssToken::take() {
  if (!sk_) throw std::logic_error("oss token already used");
  gf2::Coset c = std::move(*sk_);
  sk_.reset();
  return c;
}

OssToken gen_unfiltered(const OssOracles& o, Rng& rng) {
  // Measuring Y on sum_x |x>|P(x)> gives y = H(x) for uniform x and leaves
  // |S_y> on U once X is uncomputed with P^-1.
  const int n = o.params().n;
  const uint64_t x = n == 64 ? rng() : rng() & ((uint64_t{1} << n) - 1);
  const uint64_t y = o.H(x);
  return OssToken(y, o.coset(y));
}

OssToken gen(const OssOracles& o, Rng& rng) {
  for (int retries = 0;; ++retries) {
    OssToken t = gen_unfiltered(o, rng);
    if (cosets::BalancedCoset::is_balanced(t.sk())) return OssToken(t.vk(), t.take(), retries);
  }
}

SignResult sign(const OssOracles& o, OssToken&& token, int m, Rng& rng) {
  if (m != 0 && m != 1) throw std::invalid_argument("oss sign: message must be a bit");
  const uint64_t y = token.vk();
  const gf2::Coset sk = token.take();
  SignResult out;
  auto sample = [&rng](const gf2::Coset& c) {
    return c.member(std::uniform_int_distribution<uint64_t>(0, c.size() - 1)(rng));
  };
  if (!cosets::BalancedCoset::is_balanced(sk)) {
    // First qubit is constant; the rotation only adds a global phase.
    const int bit = sk.shift().first();
    out.sigma = sample(sk);
    out.rotated = bit != m;
    out.status = bit == m ? SignResult::Status::kOk : SignResult::Status::kAbort;
    return out;
  }
  auto first = cosets::restrict_first_bit(sk, rng);
  cosets::SliceState state = first.post;
  if (first.b != m) {
    state = cosets::rotate_first_bit(state, [&](const gf2::Vector& v) { return o.D(y, v); });
    out.rotated = true;
  }
  out.sigma = sample(state.coset.slice(state.bit));
  out.status = out.sigma.first() == m ? SignResult::Status::kOk : SignResult::Status::kAbort;
  return out;
}

bool verify(const OssOracles& o, uint64_t vk, int m, const gf2::Vector& sigma) {
  const OssParams& p = o.params();
  if (p.r < 64 && vk >> p.r) return false;
  if (sigma.len() != p.k || sigma.first() != (m == 1)) return false;
  return o.P_inv(vk, sigma).has_value();
}

std::string vk_hex(uint64_t vk, int r) { return gf2::Vector(r, vk).to_hex(); }

OracleAccess::OracleAccess(const OssOracles& o) : o_(&o) {}

std::pair<uint64_t, gf2::Vector> OracleAccess::P(uint64_t x) {
  if (!p_open_) throw std::logic_error("oracle P revoked");
  ++counts_.p;
  return o_->P(x);
}

std::optional<uint64_t> OracleAccess::P_inv(uint64_t y, const gf2::Vector& u) {
  if (!p_inv_open_) throw std::logic_error("oracle P_inv revoked");
  ++counts_.p_inv;
  return o_->P_inv(y, u);
}

bool OracleAccess::D(uint64_t y, const gf2::Vector& v) {
  if (!d_open_) throw std::logic_error("oracle D revoked");
  ++counts_.d;
  return o_->D(y, v);
}

OssToken OracleAccess::gen(Rng& rng) {
  if (!p_open_ || !p_inv_open_) throw std::logic_error("gen needs P and P_inv");
  OssToken t = oss::gen(*o_, rng);
  // One superposition query to P and one to P_inv per attempt.
  counts_.p += t.gen_retries() + 1;
  counts_.p_inv += t.gen_retries() + 1;
  return t;
}

SignResult OracleAccess::sign(OssToken&& token, int m, Rng& rng) {
  if (!d_open_) throw std::logic_error("oracle D revoked");
  SignResult r = oss::sign(*o_, std::move(token), m, rng);
  if (r.rotated) ++counts_.d;
  return r;
}

gf2::Vector OracleAccess::measure(OssToken&& token, Rng& rng) {
  const gf2::Coset sk = token.take();
  return sk.member(std::uniform_int_distribution<uint64_t>(0, sk.size() - 1)(rng));
}

ForgeryResult forgery_game(const OssOracles& o, const Adversary& adversary, Rng& rng) {
  OracleAccess access(o);
  ForgeryResult res;
  res.forgery = adversary(access, rng);
  const Forgery& f = res.forgery;
  res.queries = access.counts();
  res.win = f.sigma0 != f.sigma1 && verify(o, f.vk, f.m0, f.sigma0) &&
            verify(o, f.vk, f.m1, f.sigma1);
  return res;
}

Adversary honest_adversary() {
  return [](OracleAccess& acc, Rng& rng) {
    OssToken t = acc.gen(rng);
    const uint64_t vk = t.vk();
    SignResult s = acc.sign(std::move(t), 0, rng);
    return Forgery{vk, 0, s.sigma, 0, s.sigma};
  };
}

Adversary naive_cloner() {
  return [](OracleAccess& acc, Rng& rng) {
    OssToken t = acc.gen(rng);
    const uint64_t vk = t.vk();
    const int k = acc.params().k;
    const gf2::Vector u = acc.measure(std::move(t), rng);
    dense::StateVector s = dense::StateVector::basis(k, u.bits());
    s = dense::hadamard_all(std::move(s));
    s = dense::phase_oracle(std::move(s), [&](const gf2::Vector& v) { return acc.D(vk, v); });
    s = dense::hadamard_all(std::move(s));
    std::vector<int> all(k);
    for (int q = 0; q < k; ++q) all[q] = q;
    const auto meas = dense::measure_standard(s, all, rng);
    gf2::Vector u2(k);
    for (int q = 0; q < k; ++q) u2.set(q, meas.outcome[q]);
    return Forgery{vk, u.first(), u, u2.first(), u2};
  };
}

}  // namespace cosetlab::oss
