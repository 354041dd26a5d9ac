#pragma once

#include "xchain/crypto/uint256.hpp"

namespace xchain::crypto {

template <class F>
struct AffinePoint {
  F x{};
  F y{};
  bool infinity = true;

  friend bool operator==(const AffinePoint& a, const AffinePoint& b) {
    if (a.infinity || b.infinity) return a.infinity == b.infinity;
    return a.x == b.x && a.y == b.y;
  }
};

/// Point on y^2 = x^3 + b (a = 0) in Jacobian coordinates. Curve supplies `static F b()`.
template <class F, class Curve>
class JacobianPoint {
 public:
  using Field = F;
  using Affine = AffinePoint<F>;

  JacobianPoint() : x_(F::one()), y_(F::one()), z_(F::zero()) {}

  static JacobianPoint identity() { return JacobianPoint(); }
  static JacobianPoint from_affine(const Affine& p) {
    if (p.infinity) return identity();
    return JacobianPoint(p.x, p.y, F::one());
  }

  static bool on_curve(const Affine& p) {
    if (p.infinity) return true;
    return p.y.square() == p.x.square() * p.x + Curve::b();
  }

  bool is_identity() const { return z_.is_zero(); }

  Affine to_affine() const {
    if (is_identity()) return Affine{};
    F zinv = z_.inverse();
    F zinv2 = zinv.square();
    return Affine{x_ * zinv2, y_ * zinv2 * zinv, false};
  }

  JacobianPoint dbl() const {
    if (is_identity() || y_.is_zero()) return identity();
    F a = x_.square();
    F b = y_.square();
    F c = b.square();
    F d = ((x_ + b).square() - a - c).dbl();
    F e = a.dbl() + a;
    F f = e.square();
    F x3 = f - d.dbl();
    F c8 = c.dbl().dbl().dbl();
    F y3 = e * (d - x3) - c8;
    F z3 = (y_ * z_).dbl();
    return JacobianPoint(x3, y3, z3);
  }

  friend JacobianPoint operator+(const JacobianPoint& p, const JacobianPoint& q) {
    if (p.is_identity()) return q;
    if (q.is_identity()) return p;
    F z1z1 = p.z_.square();
    F z2z2 = q.z_.square();
    F u1 = p.x_ * z2z2;
    F u2 = q.x_ * z1z1;
    F s1 = p.y_ * q.z_ * z2z2;
    F s2 = q.y_ * p.z_ * z1z1;
    F h = u2 - u1;
    F r = (s2 - s1).dbl();
    if (h.is_zero()) {
      if (r.is_zero()) return p.dbl();
      return identity();
    }
    F i = h.dbl().square();
    F j = h * i;
    F v = u1 * i;
    F x3 = r.square() - j - v.dbl();
    F y3 = r * (v - x3) - (s1 * j).dbl();
    F z3 = ((p.z_ + q.z_).square() - z1z1 - z2z2) * h;
    return JacobianPoint(x3, y3, z3);
  }

  JacobianPoint operator-() const { return JacobianPoint(x_, -y_, z_); }
  friend JacobianPoint operator-(const JacobianPoint& p, const JacobianPoint& q) { return p + (-q); }
  JacobianPoint& operator+=(const JacobianPoint& o) { return *this = *this + o; }

  /// Variable-time double-and-add.
  JacobianPoint mul(const UInt256& scalar) const {
    JacobianPoint acc = identity();
    for (std::size_t i = scalar.bit_length(); i-- > 0;) {
      acc = acc.dbl();
      if (scalar.bit(i)) acc += *this;
    }
    return acc;
  }

  friend bool operator==(const JacobianPoint& p, const JacobianPoint& q) {
    if (p.is_identity() || q.is_identity()) return p.is_identity() == q.is_identity();
    F z1z1 = p.z_.square();
    F z2z2 = q.z_.square();
    if (p.x_ * z2z2 != q.x_ * z1z1) return false;
    return p.y_ * q.z_ * z2z2 == q.y_ * p.z_ * z1z1;
  }

 private:
  JacobianPoint(F x, F y, F z) : x_(x), y_(y), z_(z) {}

  F x_, y_, z_;
};

}  // namespace xchain::crypto
