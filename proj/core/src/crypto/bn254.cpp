#include "xchain/crypto/bn254.hpp"

#include <cstdlib>
#include <stdexcept>

#include "xchain/crypto/keccak.hpp"

namespace xchain::crypto::bn254 {
namespace {

constexpr u128 kAteLoopCount = static_cast<u128>(6) * kCurveU + 2;

int bit_length_u128(u128 v) {
  int n = 0;
  while (v != 0) {
    ++n;
    v >>= 1;
  }
  return n;
}

Fq2 xi() { return {Fq::from_u64(9), Fq::one()}; }

/// gamma[k] = xi^(k (p - 1) / 6): w^(p) = gamma[1] w, so w^(k p) = gamma[k] w^k.
const std::array<Fq2, 6>& frobenius_coefficients() {
  static const std::array<Fq2, 6> table = [] {
    UInt256 pm1;
    sub_borrow(pm1, Fq::kModulus, UInt256::from_u64(1));
    UInt256 e = div_small(pm1, 6);
    Fq2 base = xi().pow(e);
    std::array<Fq2, 6> out;
    out[0] = Fq2::one();
    for (std::size_t k = 1; k < 6; ++k) out[k] = out[k - 1] * base;
    return out;
  }();
  return table;
}

/// The twist's p-power Frobenius endomorphism, as a map on E'(Fq2).
G2Affine twist_frobenius(const G2Affine& q) {
  const auto& gamma = frobenius_coefficients();
  return G2Affine{q.x.conj() * gamma[2], q.y.conj() * gamma[3], q.infinity};
}

}  // namespace

Fq2 Fq2::pow(const UInt256& e) const {
  Fq2 result = one();
  for (std::size_t i = e.bit_length(); i-- > 0;) {
    result = result.square();
    if (e.bit(i)) result = result * *this;
  }
  return result;
}

Fq6 operator*(const Fq6& a, const Fq6& b) {
  Fq2 v0 = a.c0 * b.c0;
  Fq2 v1 = a.c1 * b.c1;
  Fq2 v2 = a.c2 * b.c2;
  Fq2 c0 = ((a.c1 + a.c2) * (b.c1 + b.c2) - v1 - v2).mul_by_xi() + v0;
  Fq2 c1 = (a.c0 + a.c1) * (b.c0 + b.c1) - v0 - v1 + v2.mul_by_xi();
  Fq2 c2 = (a.c0 + a.c2) * (b.c0 + b.c2) - v0 - v2 + v1;
  return {c0, c1, c2};
}

Fq6 Fq6::mul_by_01(const Fq2& b0, const Fq2& b1) const {
  return {c0 * b0 + (c2 * b1).mul_by_xi(), c0 * b1 + c1 * b0, c1 * b1 + c2 * b0};
}

Fq6 Fq6::inverse() const {
  Fq2 t0 = c0.square() - (c1 * c2).mul_by_xi();
  Fq2 t1 = c2.square().mul_by_xi() - c0 * c1;
  Fq2 t2 = c1.square() - c0 * c2;
  Fq2 d = c0 * t0 + (c2 * t1 + c1 * t2).mul_by_xi();
  Fq2 dinv = d.inverse();
  return {t0 * dinv, t1 * dinv, t2 * dinv};
}

Fq12 operator*(const Fq12& a, const Fq12& b) {
  Fq6 t0 = a.c0 * b.c0;
  Fq6 t1 = a.c1 * b.c1;
  return {t0 + t1.mul_by_v(), (a.c0 + a.c1) * (b.c0 + b.c1) - t0 - t1};
}

Fq12 Fq12::square() const {
  Fq6 ab = c0 * c1;
  Fq6 r0 = (c0 + c1) * (c0 + c1.mul_by_v()) - ab - ab.mul_by_v();
  return {r0, ab + ab};
}

Fq12 Fq12::inverse() const {
  Fq6 t = (c0 * c0 - (c1 * c1).mul_by_v()).inverse();
  return {c0 * t, -(c1 * t)};
}

Fq12 Fq12::frobenius(int power) const {
  const auto& g = frobenius_coefficients();
  Fq12 x = *this;
  for (int k = 0; k < power; ++k) {
    x = Fq12{{x.c0.c0.conj(), x.c0.c1.conj() * g[2], x.c0.c2.conj() * g[4]},
             {x.c1.c0.conj() * g[1], x.c1.c1.conj() * g[3], x.c1.c2.conj() * g[5]}};
  }
  return x;
}

Fq12 Fq12::pow(const UInt256& e) const {
  Fq12 result = one();
  for (std::size_t i = e.bit_length(); i-- > 0;) {
    result = result.square();
    if (e.bit(i)) result *= *this;
  }
  return result;
}

Fq12 Fq12::pow_u64(std::uint64_t e) const { return pow(UInt256::from_u64(e)); }

Fq12 Fq12::mul_by_line(const Fq& l0, const Fq2& l1, const Fq2& l3) const {
  Fq6 a = c0 * l0;
  Fq6 b = c1.mul_by_01(l1, l3);
  Fq2 l0_plus_l1 = l1 + Fq2{l0, Fq::zero()};
  Fq6 cross = (c0 + c1).mul_by_01(l0_plus_l1, l3);
  return {a + b.mul_by_v(), cross - a - b};
}

Fq2 G2Curve::b() {
  static const Fq2 value = Fq2{Fq::from_u64(3), Fq::zero()} * xi().inverse();
  return value;
}

G1 g1_generator() { return G1::from_affine(G1Affine{Fq::from_u64(1), Fq::from_u64(2), false}); }

G2 g2_generator() {
  static const G2 gen = G2::from_affine(G2Affine{
      Fq2{Fq::from_dec("10857046999023057135944570762232829481370756359578518086990519993285655852781"),
          Fq::from_dec("11559732032986387107991004021392285783925812861821192530917403151452391805634")},
      Fq2{Fq::from_dec("8495653923123431417604973247489272438418190587263600148770280649306958101930"),
          Fq::from_dec("4082367875863433681332203403145435568316851327593401208105741076214120093531")},
      false});
  return gen;
}

Bytes encode_g1(const G1& p) {
  Bytes out(kG1Bytes, 0);
  G1Affine a = p.to_affine();
  if (a.infinity) return out;
  a.x.to_be_bytes(std::span<Byte, 32>(out.data(), 32));
  a.y.to_be_bytes(std::span<Byte, 32>(out.data() + 32, 32));
  return out;
}

std::optional<G1> decode_g1(ByteView bytes) {
  if (bytes.size() != kG1Bytes) return std::nullopt;
  bool all_zero = true;
  for (Byte b : bytes) all_zero &= (b == 0);
  if (all_zero) return G1::identity();
  auto x = Fq::from_be_bytes_canonical(bytes.subspan(0, 32));
  auto y = Fq::from_be_bytes_canonical(bytes.subspan(32, 32));
  if (!x || !y) return std::nullopt;
  G1Affine a{*x, *y, false};
  if (!G1::on_curve(a)) return std::nullopt;
  return G1::from_affine(a);
}

Bytes encode_g2(const G2& p) {
  Bytes out(kG2Bytes, 0);
  G2Affine a = p.to_affine();
  if (a.infinity) return out;
  auto put = [&](const Fq& v, std::size_t offset) { v.to_be_bytes(std::span<Byte, 32>(out.data() + offset, 32)); };
  put(a.x.c1, 0);
  put(a.x.c0, 32);
  put(a.y.c1, 64);
  put(a.y.c0, 96);
  return out;
}

bool in_g2_subgroup(const G2& p) { return p.mul(Fr::kModulus).is_identity(); }

std::optional<G2> decode_g2(ByteView bytes) {
  if (bytes.size() != kG2Bytes) return std::nullopt;
  bool all_zero = true;
  for (Byte b : bytes) all_zero &= (b == 0);
  if (all_zero) return G2::identity();
  std::array<Fq, 4> v;
  for (std::size_t i = 0; i < 4; ++i) {
    auto e = Fq::from_be_bytes_canonical(bytes.subspan(32 * i, 32));
    if (!e) return std::nullopt;
    v[i] = *e;
  }
  G2Affine a{Fq2{v[1], v[0]}, Fq2{v[3], v[2]}, false};
  if (!G2::on_curve(a)) return std::nullopt;
  G2 p = G2::from_affine(a);
  if (!in_g2_subgroup(p)) return std::nullopt;
  return p;
}

G1 hash_to_g1(ByteView message) {
  Hash256 digest = keccak256(message);
  Fq x = Fq::from_be_bytes_reduce(digest.view());
  const Fq b = G1Curve::b();
  for (;;) {
    Fq rhs = x.square() * x + b;
    if (auto y = rhs.sqrt()) {
      Fq root = y->is_odd() ? -*y : *y;
      return G1::from_affine(G1Affine{x, root, false});
    }
    x += Fq::one();
  }
}

G2Prepared::G2Prepared(const G2& q) {
  G2Affine base = q.to_affine();
  if (base.infinity) {
    identity_ = true;
    return;
  }
  G2Affine t = base;
  auto add_step = [&](const G2Affine& other, bool update) {
    if (t.x == other.x) throw std::logic_error("degenerate addition in Miller loop");
    Fq2 slope = (other.y - t.y) * (other.x - t.x).inverse();
    lines_.push_back(Line{slope, slope * t.x - t.y});
    if (update) {
      Fq2 x3 = slope.square() - t.x - other.x;
      Fq2 y3 = slope * (t.x - x3) - t.y;
      t = G2Affine{x3, y3, false};
    }
  };
  auto double_step = [&] {
    Fq2 x2 = t.x.square();
    Fq2 slope = (x2.dbl() + x2) * t.y.dbl().inverse();
    lines_.push_back(Line{slope, slope * t.x - t.y});
    Fq2 x3 = slope.square() - t.x.dbl();
    Fq2 y3 = slope * (t.x - x3) - t.y;
    t = G2Affine{x3, y3, false};
  };

  for (int i = bit_length_u128(kAteLoopCount) - 2; i >= 0; --i) {
    double_step();
    if ((kAteLoopCount >> i) & 1) add_step(base, true);
  }
  G2Affine q1 = twist_frobenius(base);
  G2Affine q2 = twist_frobenius(q1);
  q2.y = -q2.y;
  add_step(q1, true);
  add_step(q2, false);
}

Fq12 miller_loop(std::span<const std::pair<G1Affine, const G2Prepared*>> pairs) {
  Fq12 f = Fq12::one();
  std::size_t idx = 0;
  auto apply_lines = [&](std::size_t line) {
    for (const auto& [p, prep] : pairs) {
      if (p.infinity || prep->identity_) continue;
      const auto& l = prep->lines_[line];
      f = f.mul_by_line(p.y, -(l.slope * p.x), l.offset);
    }
  };
  for (int i = bit_length_u128(kAteLoopCount) - 2; i >= 0; --i) {
    f = f.square();
    apply_lines(idx++);
    if ((kAteLoopCount >> i) & 1) apply_lines(idx++);
  }
  apply_lines(idx++);
  apply_lines(idx++);
  return f;
}

Fq12 final_exponentiation(const Fq12& f) {
  // Easy part: f^((p^6 - 1)(p^2 + 1)).
  Fq12 t = f.conj() * f.inverse();
  t = t.frobenius(2) * t;

  // Hard part (p^4 - p^2 + 1)/r = l0 + l1 p + l2 p^2 + l3 p^3 with each l_i a polynomial in u.
  std::array<Fq12, 4> fu;
  fu[0] = t;
  for (std::size_t j = 1; j < 4; ++j) fu[j] = fu[j - 1].pow_u64(kCurveU);

  static constexpr int kCoefficients[4][4] = {
      {-2, -18, -30, -36},  // l0
      {1, -12, -18, -36},   // l1
      {1, 0, 6, 0},         // l2
      {1, 0, 0, 0},         // l3
  };
  Fq12 result = Fq12::one();
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) {
      int c = kCoefficients[i][j];
      if (c == 0) continue;
      Fq12 term = fu[j].frobenius(i).pow_u64(static_cast<std::uint64_t>(std::abs(c)));
      result *= c < 0 ? term.conj() : term;
    }
  }
  return result;
}

Fq12 pairing(const G1& p, const G2& q) {
  G2Prepared prep(q);
  std::pair<G1Affine, const G2Prepared*> pair{p.to_affine(), &prep};
  return final_exponentiation(miller_loop(std::span(&pair, 1)));
}

bool pairing_product_is_one(std::span<const std::pair<G1, const G2Prepared*>> pairs) {
  std::vector<std::pair<G1Affine, const G2Prepared*>> affine;
  affine.reserve(pairs.size());
  for (const auto& [p, q] : pairs) affine.emplace_back(p.to_affine(), q);
  return final_exponentiation(miller_loop(affine)).is_one();
}

}  // namespace xchain::crypto::bn254
