#pragma once

#include <optional>
#include <span>
#include <vector>

#include "kl0/ball.hpp"
#include "kl0/kernel.hpp"
#include "kl0/params.hpp"
#include "kl0/quad.hpp"
#include "kl0/richardson.hpp"

namespace kl0 {

enum class Form { x_form, y_form };
enum class Route { moments, abc };

struct MomentSet {
  std::optional<Ball> I_half_lo;  // I_{d/2-2}; absent for d = 2
  Ball I_mid;                     // I_{d/2-1}
  Ball I_top;                     // I_{d/2} = I_L
  Ball u;
  std::optional<Ball> v;
};

struct AbcSet {
  Ball a, b, c;  // c is empty (zero ball) for d = 2
};

// Below this M both integrals are tiny and certificates rely on asymptotics.
inline bool near_boundary(const Params& P) { return P.M < 1.001; }

namespace detail {

// Per-node values of the M-independent y-weights at t = y - 1.
struct YNode {
  Real f;    // F(y;p)
  Real ref;  // reference weight, (x^p-1)^1 denominator
};

inline YNode y_node(const Real& t, const Real& p) {
  mpfr_prec_t bits = std::max(t.prec(), p.prec());
  Real lx = log1p(2 / t.at(bits + kCancelBits));
  Real na = na_deriv_log(lx, p, 0).at(bits);
  Real lxb = lx.at(bits);
  Real g = expm1(p * lxb);              // x^p - 1
  Real xp = g + 1;
  Real inv_x = t / (t + 2);             // 1/x
  Real xp1 = xp * inv_x;
  Real xp2 = xp1 * inv_x;
  Real x = 1 + 2 / t;
  Real D = square(xp1 + 1) + (p - 1) * xp2 * square(x + 1);
  // 2 t^{p-2} / 2^p
  Real pref = exp((p - 2) * log(t) + (1 - p) * Real::ln2(bits));
  Real fr = pref * square(na) / (square(g) * g);
  Real rr = pref * D / g;
  return {std::move(fr), std::move(rr)};
}

// K^{k2/2} with K = M^2 - y^2, given K and sqrt(K) when k2 is odd.
inline Real kpow(const Real& K, const Real* sqrtK, int k2) {
  if (k2 % 2 == 0) return pow(K, static_cast<long>(k2 / 2));
  long e = (k2 - 1) / 2;  // floor for odd k2
  if (k2 < 0) e = -((-k2 + 1) / 2);
  return pow(K, e) * *sqrtK;
}

struct YComp {
  bool reference = false;  // reference weight, else F
  int k2 = 0;              // kernel exponent times two
};

// One y-form pass over [1,M] for several integrands sharing node work.
inline std::vector<QuadResult> y_pass(const Params& P, const Precision& prec, const std::vector<YComp>& comps) {
  mpfr_prec_t bits = prec.bits();
  Real p = P.p.at(bits), M = P.M.at(bits);
  int min_k2 = 0;
  bool need_sqrt = false;
  for (const auto& c : comps) {
    min_k2 = std::min(min_k2, c.k2);
    need_sqrt = need_sqrt || (c.k2 % 2 != 0);
  }
  SingularityHints hints;
  if (min_k2 < 0) hints.upper_exponent = min_k2 / 2.0;
  auto f = [&](const Real& y, const Real& t, const Real& s, std::span<Real> out) {
    YNode nd = y_node(t, p);
    Real K = s * (M + y);
    Real sq = need_sqrt ? sqrt(K) : Real();
    for (size_t i = 0; i < comps.size(); ++i) {
      const Real& w = comps[i].reference ? nd.ref : nd.f;
      out[i] = w * kpow(K, need_sqrt ? &sq : nullptr, comps[i].k2);
    }
  };
  return integrate_many(f, Real(1L, bits), M, static_cast<int>(comps.size()), prec, hints);
}

enum class XComp { ir, il, j, a_num, c_num };

// One x-form pass over (x0, inf).
inline std::vector<QuadResult> x_pass(const Params& P, const Precision& prec, const std::vector<XComp>& comps) {
  mpfr_prec_t bits = prec.bits();
  Real p = P.p.at(bits), M = P.M.at(bits);
  int d = P.d;
  Real xz = x0(M);
  Real xz_m1 = 2 / (M - 1);
  double lower = (d - 2) / 2.0;
  for (auto c : comps) {
    if (c == XComp::il) lower = std::min(lower, d / 2.0);
    if (c == XComp::a_num) lower = std::min(lower, (d - 2) / 2.0);
    if (c == XComp::c_num) {
      if (d == 2) throw DomainError("c-average needs d >= 3");
      lower = std::min(lower, (d - 4) / 2.0);
    }
  }
  SingularityHints hints;
  if (lower < 0) hints.lower_exponent = lower;
  auto f = [&](const Real& x, const Real& dx, std::span<Real> out) {
    Real xm1 = xz_m1 + dx;
    Real ph = (M - 1) * dx * ((M + 1) * x - (M - 1));
    Real s2 = ph / square(xm1);
    Real lx = log1p(xm1.at(bits + kCancelBits));
    Real na = na_deriv_log(lx, p, 0).at(bits);
    Real lxb = lx.at(bits);
    Real g = expm1(p * lxb);
    Real xp = g + 1;
    Real xp1 = xp / x, xp2 = xp1 / x;
    Real D = square(xp1 + 1) + (p - 1) * xp2 * square(x + 1);
    Real w = half_power(ph, d - 2) / (g * exp((p + d - 2) * log(xm1)));
    Real r = square(na / g);
    for (size_t i = 0; i < comps.size(); ++i) {
      switch (comps[i]) {
        case XComp::ir: out[i] = D * w; break;
        case XComp::il: out[i] = r * s2 * w; break;
        case XComp::j: out[i] = xm1 / x * D * w; break;
        case XComp::a_num: out[i] = r * w; break;
        case XComp::c_num: out[i] = r / s2 * w; break;
      }
    }
  };
  return integrate_to_infinity_many(f, xz, static_cast<int>(comps.size()), prec, hints);
}

inline std::vector<Ball> balls(const std::vector<QuadResult>& q) {
  std::vector<Ball> out;
  for (const auto& r : q) out.push_back(ball_from_quad(r));
  return out;
}

inline void require_positive_ball(const Ball& b, const char* what) {
  if (!b.positive()) throw CertificateError(std::string(what) + " is not certainly positive: " + b.str());
}

// d[u + (d-2) M^2 v - d M^2 u^2], plus 2M F(M)/I_L when d = 2.
inline Ball h_formula(const Params& P, const Ball& u, const std::optional<Ball>& v, const Ball& IL,
                      const Precision& prec) {
  mpfr_prec_t bits = prec.bits();
  Real M = P.M.at(bits);
  Real M2 = square(M);
  Ball h = u - (u * u) * (P.d * M2);
  if (P.d > 2) h = h + (*v) * ((P.d - 2) * M2);
  h = h * static_cast<long>(P.d);
  if (P.d == 2) h = h + Ball(2 * M * f_weight(M, P.p.at(bits))) / IL;
  return h;
}

}  // namespace detail

inline Ball i_r(const Params& P, const Precision& prec, Form form = Form::y_form) {
  Ball r = form == Form::y_form ? ball_from_quad(detail::y_pass(P, prec, {{true, P.d - 2}})[0])
                                : ball_from_quad(detail::x_pass(P, prec, {detail::XComp::ir})[0]);
  detail::require_positive_ball(r, "I_R");
  return r;
}

inline Ball i_l(const Params& P, const Precision& prec, Form form = Form::y_form) {
  Ball r = form == Form::y_form ? ball_from_quad(detail::y_pass(P, prec, {{false, P.d}})[0])
                                : ball_from_quad(detail::x_pass(P, prec, {detail::XComp::il})[0]);
  detail::require_positive_ball(r, "I_L");
  return r;
}

// I_alpha = int_1^M F(y) (M^2-y^2)^alpha dy, alpha >= -1/2.
inline Ball i_alpha(const Params& P, const Real& alpha, const Precision& prec) {
  mpfr_prec_t bits = prec.bits();
  Real a = alpha.at(bits);
  if (a < Real("-0.5", bits)) throw DomainError("i_alpha needs alpha >= -1/2, got " + alpha.str(10));
  Real a2 = a * 2;
  if (a2 == floor(a2) && a2 < 1000L && a2 > -1000L)
    return ball_from_quad(detail::y_pass(P, prec, {{false, static_cast<int>(a2.to_long())}})[0]);
  Real p = P.p.at(bits), M = P.M.at(bits);
  SingularityHints hints;
  if (a < 0L) hints.upper_exponent = a.to_double();
  auto q = integrate(
      [&](const Real& y, const Real& t, const Real& s) {
        Real K = s * (M + y);
        return detail::y_node(t, p).f * exp(a * log(K));
      },
      Real(1L, bits), M, prec, hints);
  return ball_from_quad(q);
}

// R = p/(d-1) I_L/I_R, with the upper endpoint
// p/(d-1) (I_L + e_L) / max(I_R - e_R, 0.9999 I_R).
inline Ball ratio_from(const Params& P, const Ball& IL, const Ball& IR, const Precision& prec) {
  mpfr_prec_t bits = prec.bits();
  detail::require_positive_ball(IR, "I_R");
  detail::require_positive_ball(IL, "I_L");
  Real p = P.p.at(bits);
  Ball scale = Ball(p) / Ball(Real(static_cast<long>(P.d - 1), bits));
  Ball r = scale * IL / IR;
  Real guard = Real("0.9999", bits) * IR.mid();
  Real den(0L, bits), num(0L, bits);
  mpfr_sub(den.raw(), IR.mid().raw(), IR.rad().raw(), MPFR_RNDD);
  if (den < guard) den = guard;
  mpfr_add(num.raw(), IL.mid().raw(), IL.rad().raw(), MPFR_RNDU);
  Real up(0L, bits);
  mpfr_div(up.raw(), num.raw(), den.raw(), MPFR_RNDU);
  up = (scale * Ball(up)).upper();
  if (up < r.upper()) up = r.upper();
  return Ball::from_interval(r.lower(), up);
}

inline Ball ratio_r(const Params& P, const Precision& prec) {
  auto q = detail::balls(detail::y_pass(P, prec, {{false, P.d}, {true, P.d - 2}}));
  return ratio_from(P, q[0], q[1], prec);
}

inline MomentSet moments(const Params& P, const Precision& prec) {
  std::vector<detail::YComp> comps = {{false, P.d}, {false, P.d - 2}};
  if (P.d > 2) comps.push_back({false, P.d - 4});
  auto q = detail::balls(detail::y_pass(P, prec, comps));
  MomentSet m{std::nullopt, q[1], q[0], q[1] / q[0], std::nullopt};
  detail::require_positive_ball(m.I_top, "I_{d/2}");
  detail::require_positive_ball(m.I_mid, "I_{d/2-1}");
  if (P.d > 2) {
    m.I_half_lo = q[2];
    detail::require_positive_ball(q[2], "I_{d/2-2}");
    m.v = q[2] / q[0];
  }
  return m;
}

inline AbcSet abc_moments(const Params& P, const Precision& prec) {
  using detail::XComp;
  std::vector<XComp> comps = {XComp::ir, XComp::il, XComp::a_num};
  if (P.d > 2) comps.push_back(XComp::c_num);
  auto q = detail::balls(detail::x_pass(P, prec, comps));
  detail::require_positive_ball(q[0], "I_R");
  AbcSet s{q[2] / q[0], q[1] / q[0], Ball(Real(0L, prec.bits()))};
  if (P.d > 2) s.c = q[3] / q[0];
  return s;
}

inline Ball h_from_moments(const Params& P, const MomentSet& m, const Precision& prec) {
  return detail::h_formula(P, m.u, m.v, m.I_top, prec);
}

// Second M-derivative of log I_L.
inline Ball h_dlog2(const Params& P, const Precision& prec, Route route = Route::moments) {
  if (route == Route::moments) return h_from_moments(P, moments(P, prec), prec);
  using detail::XComp;
  std::vector<XComp> comps = {XComp::il, XComp::a_num};
  if (P.d > 2) comps.push_back(XComp::c_num);
  auto q = detail::balls(detail::x_pass(P, prec, comps));
  // a/b = A/I_L and c/b = C/I_L: the I_R normalisation cancels.
  Ball u = q[1] / q[0];
  std::optional<Ball> v;
  if (P.d > 2) v = q[2] / q[0];
  return detail::h_formula(P, u, v, q[0], prec);
}

// d M^2 a^2 - (d-2) M^2 b c - a b; positive exactly when h < 0.
inline Ball ineq_lhs(const Params& P, const AbcSet& s, const Precision& prec) {
  Real M2 = square(P.M.at(prec.bits()));
  Ball lhs = (s.a * s.a) * (P.d * M2) - s.a * s.b;
  if (P.d > 2) lhs = lhs - (s.b * s.c) * ((P.d - 2) * M2);
  return lhs;
}

struct GainLoss {
  Ball J;
  Ball residual;  // J - p/(d-1) I_L
};

inline GainLoss gain_loss(const Params& P, const Precision& prec) {
  using detail::XComp;
  auto q = detail::balls(detail::x_pass(P, prec, {XComp::j, XComp::il}));
  mpfr_prec_t bits = prec.bits();
  Ball scale = Ball(P.p.at(bits)) / Ball(Real(static_cast<long>(P.d - 1), bits));
  return {q[0], q[0] - scale * q[1]};
}

inline Ball gain_loss_residual(const Params& P, const Precision& prec) { return gain_loss(P, prec).residual; }

// G_R'(M) I(M) / G_R(M)^2 with I(M) = int_1^M G_R dy, 2 < p < 3.
inline Ball ir_d2_ratio(const Real& p_in, const Real& M_in, const Precision& prec) {
  mpfr_prec_t bits = prec.bits();
  Real p = p_in.at(bits), M = M_in.at(bits);
  if (!(p > 2) || !(p < 3)) throw DomainError("ir_d2_ratio needs 2 < p < 3");
  if (!(M > 1)) throw DomainError("ir_d2_ratio needs M > 1");
  Ball I = ball_from_quad(integrate([&](const Real&, const Real& t, const Real&) { return g_r_weight_t(t, p); },
                                    Real(1L, bits), M, prec));
  Ball G(g_r_weight(M, p));
  Real h0 = min(default_step(M), (M - 1) / 16);
  Ball dG = richardson_deriv([&](const Real& m) { return g_r_weight_t(m - 1, p); }, M, 1, h0, prec);
  return dG * I / (G * G);
}

}  // namespace kl0
