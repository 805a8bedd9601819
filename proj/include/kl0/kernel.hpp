#pragma once

#include <array>
#include <tuple>

#include "kl0/errors.hpp"
#include "kl0/params.hpp"
#include "kl0/real.hpp"

namespace kl0 {

namespace detail {

// Extra bits for expressions that cancel near x = 1.
inline constexpr mpfr_prec_t kCancelBits = 48;

// falling factorial e (e-1) ... (e-k+1)
inline Real falling(const Real& e, int k) {
  Real r(1L, e.prec());
  for (int i = 0; i < k; ++i) r *= e - i;
  return r;
}

// k-th derivative of N_A at x = exp(lx), k in 0..3. Each power term is
// written as x^e - 1 = expm1(e lx) plus a constant; the constants cancel
// exactly for k < 3, which keeps the triple root clean.
inline Real na_deriv_log(const Real& lx, const Real& p, int k) {
  mpfr_prec_t bits = std::max(lx.prec(), p.prec()) + kCancelBits;
  Real L = lx.at(bits), P = p.at(bits);
  std::array<Real, 3> e = {2 * P - 2, P, P - 2};
  std::array<Real, 3> c = {Real(1L, bits), -(P - 1), P - 1};
  Real sum(0L, bits), konst(k == 0 ? -1L : 0L, bits);
  for (int i = 0; i < 3; ++i) {
    Real coef = c[i] * falling(e[i], k);
    sum += coef * expm1((e[i] - k) * L);
    konst += coef;
  }
  if (k < 3) return sum.at(lx.prec());
  return (sum + konst).at(lx.prec());
}

inline void require_positive(const Real& x, const char* what) {
  if (!(x > 0)) throw DomainError(std::string(what) + " must be positive, got " + x.str(10));
}

// base^(k2/2) for base >= 0 and integer k2.
inline Real half_power(const Real& base, int k2) {
  if (k2 % 2 == 0) return pow(base, static_cast<long>(k2 / 2));
  return pow(base, static_cast<long>((k2 - 1) / 2)) * sqrt(base);
}

}  // namespace detail

inline Real x0(const Real& M) {
  if (!(M > 1)) throw DomainError("x0 needs M > 1, got " + M.str(10));
  return (M + 1) / (M - 1);
}

// M^2 (x-1)^2 - (x+1)^2 in factored form ((M-1)x-(M+1))((M+1)x-(M-1)).
inline Real phi(const Real& x, const Real& M) { return ((M - 1) * x - (M + 1)) * ((M + 1) * x - (M - 1)); }

inline Real sigma2(const Real& x, const Real& M) {
  if (x == 1L) throw DomainError("sigma2 undefined at x = 1");
  return phi(x, M) / square(x - 1);
}

inline Real n_a(const Real& x, const Real& p) {
  detail::require_positive(x, "n_a: x");
  return detail::na_deriv_log(log(x), p, 0);
}

// k-th x-derivative of N_A, k in 0..3.
inline Real n_a_deriv(const Real& x, const Real& p, int k) {
  detail::require_positive(x, "n_a_deriv: x");
  return detail::na_deriv_log(log(x), p, k);
}

// (N_A(1,p), N_A'(1,p), N_A''(1,p)) from the closed-form derivatives.
inline std::tuple<Real, Real, Real> n_a_derivs_at_1(const Real& p) {
  if (!(p > 1)) throw DomainError("n_a_derivs_at_1 needs p > 1");
  Real v0 = 1 - (p - 1) + (p - 1) - Real(1L, p.prec());
  Real v1 = (2 * p - 2) - p * (p - 1) + (p - 1) * (p - 2);
  Real v2 = (2 * p - 2) * (2 * p - 3) - p * square(p - 1) + (p - 1) * (p - 2) * (p - 3);
  return {v0, v1, v2};
}

inline Real d_fn(const Real& x, const Real& p) {
  detail::require_positive(x, "d_fn: x");
  if (!(p > 1)) throw DomainError("d_fn needs p > 1");
  Real lx = log(x);
  Real xp1 = exp((p - 1) * lx);
  Real xp2 = exp((p - 2) * lx);
  return square(xp1 + 1) + (p - 1) * xp2 * square(x + 1);
}

inline Real w_fn(const Real& x, const Params& params) {
  Real xz = x0(params.M);
  if (!(x > xz)) throw DomainError("w_fn needs x > x0(M)");
  const Real& p = params.p;
  Real lx = log(x);
  Real num = detail::half_power(phi(x, params.M), params.d - 2);
  return num / (expm1(p * lx) * exp((p + params.d - 2) * log(x - 1)));
}

inline Real x_of_y(const Real& y) {
  if (!(y > 1)) throw DomainError("x_of_y needs y > 1, got " + y.str(10));
  return 1 + 2 / (y - 1);
}

// Pieces of the y-weights at t = y - 1, shared by F, G_R and the
// reference weight. Log-domain throughout so x = 1 + 2/t may be huge.
struct YWeightParts {
  Real log_na;       // log N_A(x(y), p)
  Real log_xp_m1;    // log (x^p - 1)
  Real log_d;        // log D(x(y), p)
  Real log_t;        // log (y - 1)
  Real log_pref;     // log (2 / 2^p)
};

inline YWeightParts y_weight_parts(const Real& t, const Real& p) {
  detail::require_positive(t, "y - 1");
  mpfr_prec_t bits = std::max(t.prec(), p.prec());
  Real lx = log1p(2 / t);
  Real log_t = log(t);
  Real ln2 = Real::ln2(bits);
  Real log_xp_m1 = log(expm1(p * lx));
  Real log_na = log(detail::na_deriv_log(lx, p, 0));
  // D = (x^{p-1}+1)^2 + (p-1) x^{p-2} (x+1)^2
  Real xp1 = exp((p - 1) * lx);
  Real xp2 = exp((p - 2) * lx);
  Real x = 1 + 2 / t;
  Real log_d = log(square(xp1 + 1) + (p - 1) * xp2 * square(x + 1));
  return {std::move(log_na), std::move(log_xp_m1), std::move(log_d), std::move(log_t), (1 - p) * ln2};
}

// F(y;p) given t = y - 1 exactly.
inline Real f_weight_t(const Real& t, const Real& p) {
  auto w = y_weight_parts(t, p);
  return exp(w.log_pref + 2 * w.log_na + (p - 2) * w.log_t - 3 * w.log_xp_m1);
}

inline Real f_weight(const Real& y, const Real& p) {
  if (!(y > 1)) throw DomainError("f_weight needs y > 1, got " + y.str(10));
  return f_weight_t(y - 1, p);
}

// G_R(y;p) with the squared (x^p - 1) denominator.
inline Real g_r_weight_t(const Real& t, const Real& p) {
  auto w = y_weight_parts(t, p);
  return exp(w.log_pref + w.log_d + (p - 2) * w.log_t - 2 * w.log_xp_m1);
}

inline Real g_r_weight(const Real& y, const Real& p) {
  if (!(y > 1)) throw DomainError("g_r_weight needs y > 1, got " + y.str(10));
  return g_r_weight_t(y - 1, p);
}

// D(x) w(x) dx pulled back to y, without the (M^2-y^2)^{(d-2)/2} factor:
// 2 D (y-1)^{p-2} / (2^p (x^p - 1)).
inline Real reference_weight_t(const Real& t, const Real& p) {
  auto w = y_weight_parts(t, p);
  return exp(w.log_pref + w.log_d + (p - 2) * w.log_t - w.log_xp_m1);
}

inline Real reference_weight(const Real& y, const Real& p) {
  if (!(y > 1)) throw DomainError("reference_weight needs y > 1, got " + y.str(10));
  return reference_weight_t(y - 1, p);
}

// (d log F/dy, d^2 log F/dy^2) by the chain rule through x(y).
inline std::pair<Real, Real> logf_derivs(const Real& y, const Real& p) {
  if (!(y > 1)) throw DomainError("logf_derivs needs y > 1, got " + y.str(10));
  mpfr_prec_t out_bits = std::max(y.prec(), p.prec());
  mpfr_prec_t bits = out_bits + detail::kCancelBits;
  Real t = (y - 1).at(bits);
  Real P = p.at(bits);
  Real lx = log1p(2 / t);
  Real x = 1 + 2 / t;
  Real n0 = detail::na_deriv_log(lx, P, 0);
  Real a1 = detail::na_deriv_log(lx, P, 1) / n0;
  Real a2 = detail::na_deriv_log(lx, P, 2) / n0;
  Real xp = exp(P * lx);
  Real g = expm1(P * lx);
  Real g1 = P * xp / x / g;
  Real g2 = P * (P - 1) * xp / square(x) / g;
  Real dx = -2 / square(t);
  Real ddx = 4 / (square(t) * t);
  Real dx2 = square(dx);
  Real l1 = 2 * a1 * dx + (P - 2) / t - 3 * g1 * dx;
  Real l2 = 2 * ((a2 - square(a1)) * dx2 + a1 * ddx) - (P - 2) / square(t) - 3 * ((g2 - square(g1)) * dx2 + g1 * ddx);
  return {l1.at(out_bits), l2.at(out_bits)};
}

}  // namespace kl0
