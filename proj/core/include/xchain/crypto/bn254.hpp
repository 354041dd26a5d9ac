#pragma once

#include <array>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "xchain/crypto/field.hpp"
#include "xchain/crypto/weierstrass.hpp"

// BN254 (alt-bn128): the pairing-friendly curve with EVM precompile support.
//   E(Fq):   y^2 = x^3 + 3,       G1 = E(Fq), cofactor 1
//   E'(Fq2): y^2 = x^3 + 3/xi,    G2 = order-r subgroup, xi = 9 + i
//   Fq12 = Fq6[w]/(w^2 - v), Fq6 = Fq2[v]/(v^3 - xi), Fq2 = Fq[i]/(i^2 + 1)
namespace xchain::crypto::bn254 {

struct FqParams {
  static constexpr UInt256 kModulus = UInt256::from_dec(
      "21888242871839275222246405745257275088696311157297823662689037894645226208583");
};
struct FrParams {
  static constexpr UInt256 kModulus = UInt256::from_dec(
      "21888242871839275222246405745257275088548364400416034343698204186575808495617");
};

using Fq = PrimeField<FqParams>;
using Fr = PrimeField<FrParams>;

/// BN parameter u; p and r are polynomials in u.
inline constexpr std::uint64_t kCurveU = 4965661367192848881ULL;

struct Fq2 {
  Fq c0, c1;  // c0 + c1 * i

  static Fq2 zero() { return {}; }
  static Fq2 one() { return {Fq::one(), Fq::zero()}; }

  bool is_zero() const { return c0.is_zero() && c1.is_zero(); }
  friend bool operator==(const Fq2&, const Fq2&) = default;

  friend Fq2 operator+(const Fq2& a, const Fq2& b) { return {a.c0 + b.c0, a.c1 + b.c1}; }
  friend Fq2 operator-(const Fq2& a, const Fq2& b) { return {a.c0 - b.c0, a.c1 - b.c1}; }
  Fq2 operator-() const { return {-c0, -c1}; }
  friend Fq2 operator*(const Fq2& a, const Fq2& b) {
    Fq t0 = a.c0 * b.c0;
    Fq t1 = a.c1 * b.c1;
    return {t0 - t1, (a.c0 + a.c1) * (b.c0 + b.c1) - t0 - t1};
  }
  Fq2 operator*(const Fq& s) const { return {c0 * s, c1 * s}; }
  Fq2& operator+=(const Fq2& o) { return *this = *this + o; }
  Fq2& operator-=(const Fq2& o) { return *this = *this - o; }
  Fq2& operator*=(const Fq2& o) { return *this = *this * o; }

  Fq2 dbl() const { return {c0.dbl(), c1.dbl()}; }
  Fq2 square() const {
    Fq t = c0 * c1;
    return {(c0 + c1) * (c0 - c1), t.dbl()};
  }
  Fq2 conj() const { return {c0, -c1}; }
  Fq2 inverse() const {
    Fq norm_inv = (c0.square() + c1.square()).inverse();
    return {c0 * norm_inv, -(c1 * norm_inv)};
  }
  /// Multiplication by xi = 9 + i.
  Fq2 mul_by_xi() const {
    Fq nine_c0 = c0.dbl().dbl().dbl() + c0;
    Fq nine_c1 = c1.dbl().dbl().dbl() + c1;
    return {nine_c0 - c1, c0 + nine_c1};
  }
  Fq2 pow(const UInt256& e) const;
};

struct Fq6 {
  Fq2 c0, c1, c2;  // c0 + c1 v + c2 v^2

  static Fq6 zero() { return {}; }
  static Fq6 one() { return {Fq2::one(), Fq2::zero(), Fq2::zero()}; }
  bool is_zero() const { return c0.is_zero() && c1.is_zero() && c2.is_zero(); }
  friend bool operator==(const Fq6&, const Fq6&) = default;

  friend Fq6 operator+(const Fq6& a, const Fq6& b) { return {a.c0 + b.c0, a.c1 + b.c1, a.c2 + b.c2}; }
  friend Fq6 operator-(const Fq6& a, const Fq6& b) { return {a.c0 - b.c0, a.c1 - b.c1, a.c2 - b.c2}; }
  Fq6 operator-() const { return {-c0, -c1, -c2}; }
  friend Fq6 operator*(const Fq6& a, const Fq6& b);
  Fq6 operator*(const Fq& s) const { return {c0 * s, c1 * s, c2 * s}; }
  Fq6 mul_by_v() const { return {c2.mul_by_xi(), c0, c1}; }
  /// Product with an element whose v^2 coefficient is zero.
  Fq6 mul_by_01(const Fq2& b0, const Fq2& b1) const;
  Fq6 inverse() const;
};

struct Fq12 {
  Fq6 c0, c1;  // c0 + c1 w

  static Fq12 one() { return {Fq6::one(), Fq6::zero()}; }
  bool is_one() const { return *this == one(); }
  friend bool operator==(const Fq12&, const Fq12&) = default;

  friend Fq12 operator*(const Fq12& a, const Fq12& b);
  Fq12& operator*=(const Fq12& o) { return *this = *this * o; }
  Fq12 square() const;
  Fq12 inverse() const;
  /// x^(p^6): the unitary inverse on the cyclotomic subgroup.
  Fq12 conj() const { return {c0, -c1}; }
  /// x^(p^power).
  Fq12 frobenius(int power = 1) const;
  Fq12 pow(const UInt256& e) const;
  Fq12 pow_u64(std::uint64_t e) const;
  /// Product with the sparse line value l0 + l1 w + l3 w^3.
  Fq12 mul_by_line(const Fq& l0, const Fq2& l1, const Fq2& l3) const;
};

struct G1Curve {
  static Fq b() { return Fq::from_u64(3); }
};
struct G2Curve {
  static Fq2 b();
};

using G1 = JacobianPoint<Fq, G1Curve>;
using G2 = JacobianPoint<Fq2, G2Curve>;
using G1Affine = AffinePoint<Fq>;
using G2Affine = AffinePoint<Fq2>;

G1 g1_generator();
G2 g2_generator();

inline constexpr std::size_t kG1Bytes = 64;
inline constexpr std::size_t kG2Bytes = 128;

/// Uncompressed x || y, big-endian; the identity encodes as all zeros.
Bytes encode_g1(const G1& p);
std::optional<G1> decode_g1(ByteView bytes);
/// Uncompressed EIP-197 order: x.c1 || x.c0 || y.c1 || y.c0; identity as all zeros.
Bytes encode_g2(const G2& p);
/// Rejects points off the twist or outside the order-r subgroup.
std::optional<G2> decode_g2(ByteView bytes);

bool in_g2_subgroup(const G2& p);

/// Try-and-increment: x = keccak256(msg) + k (mod q) for the least k giving a curve point;
/// y is the even root. Variable time; suitable for simulation only.
G1 hash_to_g1(ByteView message);

/// Precomputed Miller-loop line coefficients for a fixed G2 point.
class G2Prepared {
 public:
  explicit G2Prepared(const G2& q);

  bool is_identity() const { return identity_; }

 private:
  friend Fq12 miller_loop(std::span<const std::pair<G1Affine, const G2Prepared*>> pairs);

  struct Line {
    Fq2 slope;
    Fq2 offset;  // slope * x_T - y_T
  };
  std::vector<Line> lines_;
  bool identity_ = false;
};

Fq12 miller_loop(std::span<const std::pair<G1Affine, const G2Prepared*>> pairs);
Fq12 final_exponentiation(const Fq12& f);

/// Optimal ate pairing e(P, Q).
Fq12 pairing(const G1& p, const G2& q);
/// True iff prod e(P_i, Q_i) == 1, with one shared final exponentiation.
bool pairing_product_is_one(std::span<const std::pair<G1, const G2Prepared*>> pairs);

}  // namespace xchain::crypto::bn254
