#pragma once

#include <string>

#include "kl0/errors.hpp"
#include "kl0/real.hpp"

namespace kl0 {

// Midpoint-radius enclosure. Midpoints are rounded to nearest; radii are
// accumulated upward and absorb the midpoint rounding error, so every
// operation returns a ball holding all exact results of member operands.
class Ball {
 public:
  Ball() = default;
  explicit Ball(Real mid) : mid_(std::move(mid)), rad_(0L, mid_.prec()) {}
  Ball(Real mid, Real rad) : mid_(std::move(mid)), rad_(std::move(rad)) {
    if (rad_.is_nan() || rad_ < 0L) throw NumericError("negative ball radius");
    rad_ = abs(rad_);
  }

  // Smallest representable ball holding [lo, hi].
  static Ball from_interval(const Real& lo, const Real& hi) {
    if (hi < lo) throw NumericError("from_interval: hi < lo");
    mpfr_prec_t bits = std::max(lo.prec(), hi.prec());
    Real m(0L, bits), r1(0L, bits), r2(0L, bits);
    mpfr_add(m.raw(), lo.raw(), hi.raw(), MPFR_RNDN);
    mpfr_div_2ui(m.raw(), m.raw(), 1, MPFR_RNDN);
    mpfr_sub(r1.raw(), hi.raw(), m.raw(), MPFR_RNDU);
    mpfr_sub(r2.raw(), m.raw(), lo.raw(), MPFR_RNDU);
    return Ball(std::move(m), max(r1, r2));
  }

  const Real& mid() const { return mid_; }
  const Real& rad() const { return rad_; }
  mpfr_prec_t prec() const { return mid_.prec(); }

  Real lower() const {
    Real r(0L, prec());
    mpfr_sub(r.raw(), mid_.raw(), rad_.raw(), MPFR_RNDD);
    return r;
  }
  Real upper() const {
    Real r(0L, prec());
    mpfr_add(r.raw(), mid_.raw(), rad_.raw(), MPFR_RNDU);
    return r;
  }
  // Upper bound on |x| over the ball.
  Real mag() const {
    Real r(0L, prec());
    Real a = abs(mid_);
    mpfr_add(r.raw(), a.raw(), rad_.raw(), MPFR_RNDU);
    return r;
  }
  // rad / |mid|, +inf for a zero midpoint with positive radius.
  Real rel_rad() const {
    if (mid_.is_zero()) return rad_.is_zero() ? Real(0L, prec()) : Real::inf(prec());
    return rad_ / abs(mid_);
  }

  bool contains(const Real& x) const { return !(x < lower()) && !(x > upper()); }
  bool contains_zero() const { return contains(Real(0L, prec())); }
  bool positive() const { return lower() > 0L; }
  bool negative() const { return upper() < 0L; }
  bool is_finite() const { return mid_.is_finite() && rad_.is_finite(); }

  // Certain comparisons: true only when every member pair satisfies it.
  friend bool certainly_lt(const Ball& a, const Ball& b) { return a.upper() < b.lower(); }
  friend bool certainly_gt(const Ball& a, const Ball& b) { return a.lower() > b.upper(); }

  Ball operator-() const { return Ball(-mid_, rad_); }

  friend Ball operator+(const Ball& a, const Ball& b) { return add_sub(a, b, false); }
  friend Ball operator-(const Ball& a, const Ball& b) { return add_sub(a, b, true); }

  friend Ball operator*(const Ball& a, const Ball& b) {
    mpfr_prec_t bits = std::max(a.prec(), b.prec());
    Real m(0L, bits), r(0L, bits), t(0L, bits);
    int inex = mpfr_mul(m.raw(), a.mid_.raw(), b.mid_.raw(), MPFR_RNDN);
    Real am = abs(a.mid_), bm = abs(b.mid_);
    mpfr_mul(r.raw(), am.raw(), b.rad_.raw(), MPFR_RNDU);
    mpfr_mul(t.raw(), bm.raw(), a.rad_.raw(), MPFR_RNDU);
    mpfr_add(r.raw(), r.raw(), t.raw(), MPFR_RNDU);
    mpfr_mul(t.raw(), a.rad_.raw(), b.rad_.raw(), MPFR_RNDU);
    mpfr_add(r.raw(), r.raw(), t.raw(), MPFR_RNDU);
    add_rounding(r, m, inex);
    return Ball(std::move(m), std::move(r));
  }

  friend Ball operator/(const Ball& a, const Ball& b) {
    if (b.contains_zero()) throw CertificateError("ball division by a ball containing zero");
    mpfr_prec_t bits = std::max(a.prec(), b.prec());
    Real m(0L, bits), num(0L, bits), den(0L, bits), t(0L, bits);
    int inex = mpfr_div(m.raw(), a.mid_.raw(), b.mid_.raw(), MPFR_RNDN);
    // |x/y - am/bm| <= (|am| br + |bm| ar) / (|bm| (|bm| - br))
    Real am = abs(a.mid_), bm = abs(b.mid_);
    mpfr_mul(num.raw(), am.raw(), b.rad_.raw(), MPFR_RNDU);
    mpfr_mul(t.raw(), bm.raw(), a.rad_.raw(), MPFR_RNDU);
    mpfr_add(num.raw(), num.raw(), t.raw(), MPFR_RNDU);
    mpfr_sub(t.raw(), bm.raw(), b.rad_.raw(), MPFR_RNDD);
    mpfr_mul(den.raw(), bm.raw(), t.raw(), MPFR_RNDD);
    Real r(0L, bits);
    mpfr_div(r.raw(), num.raw(), den.raw(), MPFR_RNDU);
    add_rounding(r, m, inex);
    return Ball(std::move(m), std::move(r));
  }

  friend Ball operator+(const Ball& a, const Real& b) { return a + Ball(b); }
  friend Ball operator-(const Ball& a, const Real& b) { return a - Ball(b); }
  friend Ball operator*(const Ball& a, const Real& b) { return a * Ball(b); }
  friend Ball operator*(const Real& a, const Ball& b) { return Ball(a) * b; }
  friend Ball operator/(const Ball& a, const Real& b) { return a / Ball(b); }
  friend Ball operator*(const Ball& a, long k) { return a * Ball(Real(k, a.prec())); }
  friend Ball operator*(long k, const Ball& a) { return a * k; }

  // x^e for a positive ball and real exponent e (e >= 0 allows zero in the ball).
  friend Ball pow(const Ball& a, const Real& e) {
    Real lo = a.lower(), hi = a.upper();
    if (lo < 0L || (lo.is_zero() && e < 0L)) throw CertificateError("ball power needs a positive base");
    mpfr_prec_t bits = std::max(a.prec(), e.prec());
    Real rlo(0L, bits), rhi(0L, bits);
    if (e >= 0L) {
      mpfr_pow(rlo.raw(), lo.raw(), e.raw(), MPFR_RNDD);
      mpfr_pow(rhi.raw(), hi.raw(), e.raw(), MPFR_RNDU);
    } else {
      mpfr_pow(rlo.raw(), hi.raw(), e.raw(), MPFR_RNDD);
      mpfr_pow(rhi.raw(), lo.raw(), e.raw(), MPFR_RNDU);
    }
    return from_interval(rlo, rhi);
  }

  friend Ball abs(const Ball& a) {
    if (!a.contains_zero()) return a.mid_ < 0L ? -a : a;
    return from_interval(Real(0L, a.prec()), a.mag());
  }
  friend Ball max(const Ball& a, const Ball& b) { return from_interval(max(a.lower(), b.lower()), max(a.upper(), b.upper())); }
  friend Ball min(const Ball& a, const Ball& b) { return from_interval(min(a.lower(), b.lower()), min(a.upper(), b.upper())); }
  // Smallest ball holding both.
  friend Ball hull(const Ball& a, const Ball& b) { return from_interval(min(a.lower(), b.lower()), max(a.upper(), b.upper())); }

  // Grow the radius by |extra|, rounding up.
  Ball widened(const Real& extra) const {
    Real r(0L, prec());
    Real e = abs(extra);
    mpfr_add(r.raw(), rad_.raw(), e.raw(), MPFR_RNDU);
    return Ball(mid_, std::move(r));
  }

  std::string str(int sig = 20) const { return mid_.str(sig) + " +/- " + rad_.str(3); }

 private:
  static Ball add_sub(const Ball& a, const Ball& b, bool sub) {
    mpfr_prec_t bits = std::max(a.prec(), b.prec());
    Real m(0L, bits), r(0L, bits);
    int inex = sub ? mpfr_sub(m.raw(), a.mid_.raw(), b.mid_.raw(), MPFR_RNDN)
                   : mpfr_add(m.raw(), a.mid_.raw(), b.mid_.raw(), MPFR_RNDN);
    mpfr_add(r.raw(), a.rad_.raw(), b.rad_.raw(), MPFR_RNDU);
    add_rounding(r, m, inex);
    return Ball(std::move(m), std::move(r));
  }
  // One ulp of m covers a round-to-nearest error.
  static void add_rounding(Real& r, const Real& m, int inexact) {
    if (inexact == 0 || m.is_zero() || !m.is_finite()) return;
    Real ulp(1L, 8);
    mpfr_mul_2si(ulp.raw(), ulp.raw(), mpfr_get_exp(m.raw()) - m.prec(), MPFR_RNDU);
    mpfr_add(r.raw(), r.raw(), ulp.raw(), MPFR_RNDU);
  }

  Real mid_;
  Real rad_;
};

}  // namespace kl0
