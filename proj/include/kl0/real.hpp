#pragma once

#include <mpfr.h>

#include <algorithm>
#include <compare>
#include <cstdio>
#include <cstdlib>
#include <ostream>
#include <string>
#include <string_view>
#include <utility>

#include "kl0/errors.hpp"

namespace kl0 {

// Decimal working precision. Every Real built from a Precision carries
// its own bit count; nothing here reads a process-wide default.
struct Precision {
  int digits = 50;
  static constexpr int kGuardBits = 24;

  constexpr mpfr_prec_t bits() const {
    // ceil(digits * log2(10)) + guard
    long scaled = static_cast<long>(digits) * 3321929L;
    return static_cast<mpfr_prec_t>((scaled + 999999L) / 1000000L + kGuardBits);
  }
  Precision scaled_by(int num, int den) const { return Precision{(digits * num + den - 1) / den}; }
  void validate() const {
    if (digits < 15) throw DomainError("precision below 15 digits: " + std::to_string(digits));
  }
  friend bool operator==(const Precision&, const Precision&) = default;
};

class Real {
 public:
  Real() {
    mpfr_init2(v_, 53);
    mpfr_set_zero(v_, 1);
  }
  Real(long v, mpfr_prec_t bits) {
    mpfr_init2(v_, bits);
    mpfr_set_si(v_, v, MPFR_RNDN);
  }
  Real(int v, mpfr_prec_t bits) : Real(static_cast<long>(v), bits) {}
  Real(double v, mpfr_prec_t bits) {
    mpfr_init2(v_, bits);
    mpfr_set_d(v_, v, MPFR_RNDN);
  }
  Real(std::string_view dec, mpfr_prec_t bits) {
    mpfr_init2(v_, bits);
    std::string s(dec);
    if (s.empty() || mpfr_set_str(v_, s.c_str(), 10, MPFR_RNDN) != 0) {
      mpfr_clear(v_);
      throw DomainError("not a decimal number: '" + s + "'");
    }
  }
  Real(const char* dec, mpfr_prec_t bits) : Real(std::string_view(dec), bits) {}
  Real(const Real& o) {
    mpfr_init2(v_, mpfr_get_prec(o.v_));
    mpfr_set(v_, o.v_, MPFR_RNDN);
  }
  Real(const Real& o, mpfr_prec_t bits) {
    mpfr_init2(v_, bits);
    mpfr_set(v_, o.v_, MPFR_RNDN);
  }
  Real(Real&& o) noexcept {
    v_[0] = o.v_[0];
    o.v_[0]._mpfr_d = nullptr;
  }
  ~Real() {
    if (v_[0]._mpfr_d) mpfr_clear(v_);
  }
  Real& operator=(const Real& o) {
    if (this == &o) return *this;
    if (!v_[0]._mpfr_d) {
      mpfr_init2(v_, mpfr_get_prec(o.v_));
    } else if (mpfr_get_prec(v_) != mpfr_get_prec(o.v_)) {
      mpfr_set_prec(v_, mpfr_get_prec(o.v_));
    }
    mpfr_set(v_, o.v_, MPFR_RNDN);
    return *this;
  }
  Real& operator=(Real&& o) noexcept {
    std::swap(v_[0], o.v_[0]);
    return *this;
  }

  static Real nan(mpfr_prec_t bits) {
    Real r(0L, bits);
    mpfr_set_nan(r.v_);
    return r;
  }
  static Real inf(mpfr_prec_t bits, int sign = 1) {
    Real r(0L, bits);
    mpfr_set_inf(r.v_, sign);
    return r;
  }
  static Real pi(mpfr_prec_t bits) {
    Real r(0L, bits);
    mpfr_const_pi(r.v_, MPFR_RNDN);
    return r;
  }
  static Real ln2(mpfr_prec_t bits) {
    Real r(0L, bits);
    mpfr_const_log2(r.v_, MPFR_RNDN);
    return r;
  }
  // 10^e at the given precision (correctly rounded).
  static Real pow10(long e, mpfr_prec_t bits) {
    Real r(0L, bits);
    mpfr_ui_pow_ui(r.v_, 10, static_cast<unsigned long>(e < 0 ? -e : e), MPFR_RNDN);
    if (e < 0) mpfr_ui_div(r.v_, 1, r.v_, MPFR_RNDN);
    return r;
  }

  mpfr_prec_t prec() const { return mpfr_get_prec(v_); }
  Real at(mpfr_prec_t bits) const { return Real(*this, bits); }
  mpfr_ptr raw() { return v_; }
  mpfr_srcptr raw() const { return v_; }

  double to_double() const { return mpfr_get_d(v_, MPFR_RNDN); }
  long to_long() const { return mpfr_get_si(v_, MPFR_RNDN); }
  bool is_nan() const { return mpfr_nan_p(v_) != 0; }
  bool is_finite() const { return mpfr_number_p(v_) != 0; }
  bool is_zero() const { return mpfr_zero_p(v_) != 0; }
  int sign() const { return mpfr_sgn(v_); }

  // Scientific notation with `sig` significant digits, C locale.
  std::string str(int sig) const {
    if (is_nan()) return "nan";
    if (mpfr_inf_p(v_)) return sign() > 0 ? "inf" : "-inf";
    char* buf = nullptr;
    mpfr_asprintf(&buf, "%.*Re", std::max(sig - 1, 0), v_);
    std::string s(buf);
    mpfr_free_str(buf);
    return s;
  }
  // Enough digits to read the value back at the same precision.
  std::string str() const { return str(full_digits()); }
  // Fixed notation with `decimals` digits after the point.
  std::string fixed(int decimals) const {
    if (!is_finite()) return str(1);
    char* buf = nullptr;
    mpfr_asprintf(&buf, "%.*Rf", decimals, v_);
    std::string s(buf);
    mpfr_free_str(buf);
    return s;
  }
  int full_digits() const { return static_cast<int>(static_cast<double>(prec()) * 0.30102999566398120) + 2; }

  Real operator-() const {
    Real r(*this);
    mpfr_neg(r.v_, r.v_, MPFR_RNDN);
    return r;
  }

#define KL0_REAL_BINOP(OP, FN, FN_SI, FN_D, SI_FN, D_FN)                              \
  friend Real operator OP(const Real& a, const Real& b) {                          \
    Real r(Uninit{}, std::max(a.prec(), b.prec()));                                \
    FN(r.v_, a.v_, b.v_, MPFR_RNDN);                                               \
    return r;                                                                      \
  }                                                                                \
  friend Real operator OP(Real&& a, const Real& b) {                               \
    if (a.prec() >= b.prec()) {                                                    \
      FN(a.v_, a.v_, b.v_, MPFR_RNDN);                                             \
      return std::move(a);                                                         \
    }                                                                              \
    return static_cast<const Real&>(a) OP b;                                       \
  }                                                                                \
  friend Real operator OP(const Real& a, long b) {                                 \
    Real r(Uninit{}, a.prec());                                                    \
    FN_SI(r.v_, a.v_, b, MPFR_RNDN);                                               \
    return r;                                                                      \
  }                                                                                \
  friend Real operator OP(Real&& a, long b) {                                      \
    FN_SI(a.v_, a.v_, b, MPFR_RNDN);                                               \
    return std::move(a);                                                           \
  }                                                                                \
  friend Real operator OP(const Real& a, int b) { return a OP static_cast<long>(b); } \
  friend Real operator OP(Real&& a, int b) { return std::move(a) OP static_cast<long>(b); } \
  friend Real operator OP(const Real& a, double b) {                               \
    Real r(Uninit{}, a.prec());                                                    \
    FN_D(r.v_, a.v_, b, MPFR_RNDN);                                                \
    return r;                                                                      \
  }                                                                                \
  friend Real operator OP(long a, const Real& b) {                                 \
    Real r(Uninit{}, b.prec());                                                    \
    SI_FN(r.v_, a, b.v_, MPFR_RNDN);                                               \
    return r;                                                                      \
  }                                                                                \
  friend Real operator OP(int a, const Real& b) { return static_cast<long>(a) OP b; } \
  friend Real operator OP(double a, const Real& b) {                               \
    Real r(Uninit{}, b.prec());                                                    \
    D_FN(r.v_, a, b.v_, MPFR_RNDN);                                                \
    return r;                                                                      \
  }                                                                                \
  Real& operator OP##=(const Real& b) {                                            \
    if (b.prec() > prec()) mpfr_prec_round(v_, b.prec(), MPFR_RNDN);               \
    FN(v_, v_, b.v_, MPFR_RNDN);                                                   \
    return *this;                                                                  \
  }                                                                                \
  Real& operator OP##=(long b) {                                                   \
    FN_SI(v_, v_, b, MPFR_RNDN);                                                   \
    return *this;                                                                  \
  }

  KL0_REAL_BINOP(+, mpfr_add, mpfr_add_si, mpfr_add_d, add_si_rev, add_d_rev)
  KL0_REAL_BINOP(-, mpfr_sub, mpfr_sub_si, mpfr_sub_d, mpfr_si_sub, mpfr_d_sub)
  KL0_REAL_BINOP(*, mpfr_mul, mpfr_mul_si, mpfr_mul_d, mul_si_rev, mul_d_rev)
  KL0_REAL_BINOP(/, mpfr_div, mpfr_div_si, mpfr_div_d, mpfr_si_div, mpfr_d_div)
#undef KL0_REAL_BINOP

  friend std::partial_ordering operator<=>(const Real& a, const Real& b) {
    if (a.is_nan() || b.is_nan()) return std::partial_ordering::unordered;
    int c = mpfr_cmp(a.v_, b.v_);
    return c < 0 ? std::partial_ordering::less : c > 0 ? std::partial_ordering::greater : std::partial_ordering::equivalent;
  }
  friend bool operator==(const Real& a, const Real& b) { return mpfr_equal_p(a.v_, b.v_) != 0; }
  friend std::partial_ordering operator<=>(const Real& a, long b) {
    if (a.is_nan()) return std::partial_ordering::unordered;
    int c = mpfr_cmp_si(a.v_, b);
    return c < 0 ? std::partial_ordering::less : c > 0 ? std::partial_ordering::greater : std::partial_ordering::equivalent;
  }
  friend bool operator==(const Real& a, long b) { return !a.is_nan() && mpfr_cmp_si(a.v_, b) == 0; }
  friend std::partial_ordering operator<=>(const Real& a, int b) { return a <=> static_cast<long>(b); }
  friend bool operator==(const Real& a, int b) { return a == static_cast<long>(b); }
  friend std::partial_ordering operator<=>(const Real& a, double b) {
    if (a.is_nan() || b != b) return std::partial_ordering::unordered;
    int c = mpfr_cmp_d(a.v_, b);
    return c < 0 ? std::partial_ordering::less : c > 0 ? std::partial_ordering::greater : std::partial_ordering::equivalent;
  }
  friend bool operator==(const Real& a, double b) { return !a.is_nan() && mpfr_cmp_d(a.v_, b) == 0; }

#define KL0_REAL_UNARY(NAME, FN)        \
  friend Real NAME(const Real& a) {     \
    Real r(Uninit{}, a.prec());         \
    FN(r.v_, a.v_, MPFR_RNDN);          \
    return r;                           \
  }                                     \
  friend Real NAME(Real&& a) {          \
    FN(a.v_, a.v_, MPFR_RNDN);          \
    return std::move(a);                \
  }

  KL0_REAL_UNARY(exp, mpfr_exp)
  KL0_REAL_UNARY(expm1, mpfr_expm1)
  KL0_REAL_UNARY(log, mpfr_log)
  KL0_REAL_UNARY(log1p, mpfr_log1p)
  KL0_REAL_UNARY(sqrt, mpfr_sqrt)
  KL0_REAL_UNARY(abs, mpfr_abs)
  KL0_REAL_UNARY(sinh, mpfr_sinh)
  KL0_REAL_UNARY(cosh, mpfr_cosh)
  KL0_REAL_UNARY(tanh, mpfr_tanh)
  KL0_REAL_UNARY(sin, mpfr_sin)
  KL0_REAL_UNARY(cos, mpfr_cos)
  KL0_REAL_UNARY(atan, mpfr_atan)
  KL0_REAL_UNARY(floor, mpfr_floor_rnd)
#undef KL0_REAL_UNARY

  friend Real pow(const Real& a, const Real& b) {
    Real r(Uninit{}, std::max(a.prec(), b.prec()));
    mpfr_pow(r.v_, a.v_, b.v_, MPFR_RNDN);
    return r;
  }
  friend Real pow(const Real& a, long n) {
    Real r(Uninit{}, a.prec());
    mpfr_pow_si(r.v_, a.v_, n, MPFR_RNDN);
    return r;
  }
  friend Real pow(const Real& a, int n) { return pow(a, static_cast<long>(n)); }
  friend Real ldexp(const Real& a, long e) {
    Real r(Uninit{}, a.prec());
    mpfr_mul_2si(r.v_, a.v_, e, MPFR_RNDN);
    return r;
  }
  friend Real fma(const Real& a, const Real& b, const Real& c) {
    Real r(Uninit{}, std::max({a.prec(), b.prec(), c.prec()}));
    mpfr_fma(r.v_, a.v_, b.v_, c.v_, MPFR_RNDN);
    return r;
  }
  friend const Real& max(const Real& a, const Real& b) { return a < b ? b : a; }
  friend const Real& min(const Real& a, const Real& b) { return b < a ? b : a; }
  friend Real square(const Real& a) {
    Real r(Uninit{}, a.prec());
    mpfr_sqr(r.v_, a.v_, MPFR_RNDN);
    return r;
  }

  friend std::ostream& operator<<(std::ostream& os, const Real& a) {
    auto p = os.precision();
    return os << a.str(p > 0 ? static_cast<int>(p) : 6);
  }

 private:
  struct Uninit {};
  Real(Uninit, mpfr_prec_t bits) { mpfr_init2(v_, bits); }

  static int add_si_rev(mpfr_ptr r, long a, mpfr_srcptr b, mpfr_rnd_t rnd) { return mpfr_add_si(r, b, a, rnd); }
  static int add_d_rev(mpfr_ptr r, double a, mpfr_srcptr b, mpfr_rnd_t rnd) { return mpfr_add_d(r, b, a, rnd); }
  static int mul_si_rev(mpfr_ptr r, long a, mpfr_srcptr b, mpfr_rnd_t rnd) { return mpfr_mul_si(r, b, a, rnd); }
  static int mul_d_rev(mpfr_ptr r, double a, mpfr_srcptr b, mpfr_rnd_t rnd) { return mpfr_mul_d(r, b, a, rnd); }
  static int mpfr_floor_rnd(mpfr_ptr r, mpfr_srcptr a, mpfr_rnd_t) { return mpfr_floor(r, a); }

  mpfr_t v_;
};

// Decimal literal at a given precision.
inline Real real(std::string_view dec, const Precision& prec) { return Real(dec, prec.bits()); }
inline Real real(long v, const Precision& prec) { return Real(v, prec.bits()); }

}  // namespace kl0
