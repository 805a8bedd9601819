#pragma once

#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "kl0/ball.hpp"
#include "kl0/errors.hpp"
#include "kl0/real.hpp"

namespace kl0 {

struct QuadResult {
  Real value;
  Real err_estimate;
  long evaluations = 0;
};

// Promotion of a heuristic quadrature error to a ball radius. This is the
// one non-rigorous step: everything downstream is enclosed arithmetic.
inline Ball ball_from_quad(const QuadResult& q) { return Ball(q.value, abs(q.err_estimate)); }

// Known endpoint behaviour f ~ (y-a)^lower, f ~ (b-y)^upper. A negative
// exponent triggers the substitution y = a + u^k (resp. b - u^k) with
// k = ceil(1/(1+exponent)), which makes the endpoint regular.
struct SingularityHints {
  std::optional<double> lower_exponent;
  std::optional<double> upper_exponent;
  std::vector<Real> breakpoints;
};

struct QuadOptions {
  int max_level = 11;      // finest step h = 2^-max_level
  int min_level = 3;
  double tol_digits = 0;   // 0: use prec.digits
};

namespace detail {

// Tanh-sinh abscissae on (-1,1) for one precision. Level 0 holds t = 0,1,2,...
// level k > 0 holds the odd multiples of 2^-k. Nodes are stored by their
// distance to the nearer endpoint so that integrands can see (y - a) and
// (b - y) without cancellation.
struct TsLevel {
  std::vector<Real> comp;    // 1 - |x_j|
  std::vector<Real> weight;  // (pi/2) cosh t / cosh^2 u
  std::vector<double> t;
};

class TsTable {
 public:
  explicit TsTable(mpfr_prec_t bits) : bits_(bits) {
    // Drop nodes whose weight is below eps^2; with the substitution path
    // the integrands are bounded at the ends, so eps would do, but the
    // margin keeps mild unhinted singularities honest.
    double two_eps_log = 2.0 * static_cast<double>(bits) * std::log(2.0);
    t_max_ = std::asinh((two_eps_log + 4.0) / M_PI);
  }
  mpfr_prec_t bits() const { return bits_; }
  double t_max() const { return t_max_; }

  const TsLevel& level(int k) {
    std::lock_guard<std::mutex> lock(mu_);
    while (static_cast<int>(levels_.size()) <= k) levels_.push_back(build(static_cast<int>(levels_.size())));
    return *levels_[k];
  }

 private:
  std::unique_ptr<TsLevel> build(int k) const {
    auto lv = std::make_unique<TsLevel>();
    Real half_pi = Real::pi(bits_) / 2;
    double h = std::ldexp(1.0, -k);
    for (long j = (k == 0 ? 0 : 1);; j += (k == 0 ? 1 : 2)) {
      double td = j * h;
      if (td > t_max_) break;
      Real t = ldexp(Real(j, bits_), -k);
      Real u = half_pi * sinh(t);
      Real e = exp(2 * u);
      // 1 - tanh u = 2/(e^{2u}+1); sech^2 u = 4 e^{2u}/(e^{2u}+1)^2
      Real ep1 = e + 1;
      Real comp = 2 / ep1;
      Real w = half_pi * cosh(t) * 4 * e / square(ep1);
      if (comp.is_zero() || w.is_zero()) break;
      lv->comp.push_back(std::move(comp));
      lv->weight.push_back(std::move(w));
      lv->t.push_back(td);
    }
    return lv;
  }

  mpfr_prec_t bits_;
  double t_max_;
  std::mutex mu_;
  std::vector<std::unique_ptr<TsLevel>> levels_;
};

inline TsTable& ts_table(mpfr_prec_t bits) {
  static std::mutex mu;
  static std::map<mpfr_prec_t, std::unique_ptr<TsTable>> tables;
  std::lock_guard<std::mutex> lock(mu);
  auto& slot = tables[bits];
  if (!slot) slot = std::make_unique<TsTable>(bits);
  return *slot;
}

// Bailey's estimate from the last two refinement differences, relative.
inline double refinement_error(double e1, double e2, double eps) {
  if (e1 <= eps) return eps;
  if (e2 <= 0 || e2 >= 1 || e1 >= 1) return e1;
  double d1 = std::log10(e1), d2 = std::log10(e2);
  double est = std::max(d1 * d1 / d2, 2 * d1);
  return std::max(std::pow(10.0, est), eps);
}

inline void check_finite(const Real& v, const Real& y) {
  if (!v.is_finite()) throw IntegrandError("integrand not finite at y = " + y.str(20));
}

// Vector tanh-sinh on [a,b]. f(y, y-a, b-y, out) writes n values.
template <class F>
std::vector<QuadResult> ts_many(F&& f, const Real& a, const Real& b, int n, const Precision& prec,
                                const QuadOptions& opt) {
  mpfr_prec_t bits = prec.bits();
  TsTable& table = ts_table(bits);
  Real half = (b - a) / 2;
  Real width = b - a;
  std::vector<Real> out(n), sum(n, Real(0L, bits)), prev(n), prev2(n);
  long evals = 0;

  double tol_digits = opt.tol_digits > 0 ? opt.tol_digits : prec.digits;
  double tol = std::pow(10.0, -tol_digits);
  double eps = std::pow(2.0, -static_cast<double>(bits) + 4);

  // per-side truncation: largest t still contributing, refreshed per level
  double t_cut_lo = 1e300, t_cut_hi = 1e300;

  auto eval_at = [&](const Real& dist_lo, const Real& dist_hi, const Real& y, const Real& w,
                     std::vector<Real>& acc, bool& significant) {
    f(y, dist_lo, dist_hi, std::span<Real>(out));
    ++evals;
    significant = false;
    for (int i = 0; i < n; ++i) {
      check_finite(out[i], y);
      Real term = w * out[i];
      if (!term.is_zero() && !(abs(term) <= abs(acc[i]) * eps * 1e-3)) significant = true;
      acc[i] += term;
    }
  };

  std::vector<double> est_err(n, 1.0);
  std::vector<Real> level_sum(n);
  for (int k = 0; k <= opt.max_level; ++k) {
    const TsLevel& lv = table.level(k);
    for (int i = 0; i < n; ++i) level_sum[i] = Real(0L, bits);
    double last_sig_lo = 0, last_sig_hi = 0;
    for (size_t j = 0; j < lv.comp.size(); ++j) {
      double t = lv.t[j];
      const Real& c = lv.comp[j];
      Real dc = half * c;
      if (t == 0) {
        Real y = a + half;
        bool sig;
        eval_at(half, half, y, lv.weight[j], level_sum, sig);
        continue;
      }
      if (t <= t_cut_hi) {
        // node near b
        Real y = b - dc;
        Real dlo = width - dc;
        bool sig;
        eval_at(dlo, dc, y, lv.weight[j], level_sum, sig);
        if (sig) last_sig_hi = t;
      }
      if (t <= t_cut_lo) {
        Real y = a + dc;
        Real dhi = width - dc;
        bool sig;
        eval_at(dc, dhi, y, lv.weight[j], level_sum, sig);
        if (sig) last_sig_lo = t;
      }
    }
    double h = std::ldexp(1.0, -k);
    for (int i = 0; i < n; ++i) {
      sum[i] += level_sum[i];
    }
    if (k == 0) {
      // Coarse pass fixes how far out the tails matter.
      t_cut_lo = last_sig_lo + 1.0;
      t_cut_hi = last_sig_hi + 1.0;
    }
    std::vector<Real> cur(n);
    bool done = k >= opt.min_level;
    for (int i = 0; i < n; ++i) {
      cur[i] = sum[i] * h * half;
      if (k >= 2) {
        Real scale = abs(cur[i]);
        if (scale.is_zero()) scale = Real(1L, bits);
        double e1 = (abs(cur[i] - prev[i]) / scale).to_double();
        double e2 = (abs(cur[i] - prev2[i]) / scale).to_double();
        est_err[i] = refinement_error(e1, e2, eps);
        if (est_err[i] > tol) done = false;
      } else {
        done = false;
      }
    }
    if (k >= 1) prev2 = prev;
    prev = cur;
    if (done) break;
    if (k == opt.max_level) {
      for (int i = 0; i < n; ++i)
        if (est_err[i] > tol)
          throw ConvergenceError("tanh-sinh did not converge on [" + a.str(12) + ", " + b.str(12) + "]",
                                 cur[i].str(20), (abs(cur[i]) * est_err[i]).str(3));
    }
  }
  std::vector<QuadResult> res(n);
  for (int i = 0; i < n; ++i) {
    Real err = abs(prev[i]) * est_err[i];
    if (prev[i].is_zero()) err = Real(est_err[i], bits);
    res[i] = QuadResult{prev[i], std::move(err), evals};
  }
  return res;
}

inline int substitution_power(double exponent) {
  if (exponent >= 0) return 1;
  if (exponent <= -1) throw DomainError("endpoint exponent must exceed -1");
  return static_cast<int>(std::ceil(1.0 / (1.0 + exponent) - 1e-12));
}

}  // namespace detail

// Integrate n components at once over [a,b]; f(y, y-a, b-y, out).
template <class F>
std::vector<QuadResult> integrate_many(F&& f, const Real& a, const Real& b, int n, const Precision& prec,
                                       const SingularityHints& hints = {}, const QuadOptions& opt = {}) {
  mpfr_prec_t bits = prec.bits();
  if (!(a < b)) throw DomainError("integrate needs a < b");
  auto accumulate = [n](std::vector<QuadResult>& acc, const std::vector<QuadResult>& part) {
    if (acc.empty()) {
      acc = part;
      return;
    }
    for (int i = 0; i < n; ++i) {
      acc[i].value += part[i].value;
      acc[i].err_estimate += part[i].err_estimate;
      acc[i].evaluations += part[i].evaluations;
    }
  };

  // Split at interior breakpoints first; endpoint hints apply to the outer pieces.
  std::vector<Real> cuts;
  cuts.push_back(a.at(bits));
  for (const auto& bp : hints.breakpoints)
    if (bp > a && bp < b) cuts.push_back(bp.at(bits));
  cuts.push_back(b.at(bits));
  std::sort(cuts.begin() + 1, cuts.end() - 1);

  int k_lo = hints.lower_exponent ? detail::substitution_power(*hints.lower_exponent) : 1;
  int k_hi = hints.upper_exponent ? detail::substitution_power(*hints.upper_exponent) : 1;

  const Real& A = cuts.front();
  const Real& B = cuts.back();
  // Plain tanh-sinh on a piece, with distances reported against [a,b].
  auto plain = [&](const Real& lo, const Real& hi) {
    Real off_lo = lo - A, off_hi = B - hi;
    auto g = [&](const Real& y, const Real& dlo, const Real& dhi, std::span<Real> out) {
      if (off_lo.is_zero() && off_hi.is_zero())
        f(y, dlo, dhi, out);
      else
        f(y, off_lo.is_zero() ? dlo : off_lo + dlo, off_hi.is_zero() ? dhi : off_hi + dhi, out);
    };
    return detail::ts_many(g, lo, hi, n, prec, opt);
  };

  std::vector<QuadResult> total;
  for (size_t s = 0; s + 1 < cuts.size(); ++s) {
    const Real& lo = cuts[s];
    const Real& hi = cuts[s + 1];
    int klo = s == 0 ? k_lo : 1;
    int khi = s + 2 == cuts.size() ? k_hi : 1;
    if (klo == 1 && khi == 1) {
      accumulate(total, plain(lo, hi));
      continue;
    }
    Real mid = (lo + hi) / 2;
    // [lo, mid]: y = a + u^klo
    if (klo == 1) {
      accumulate(total, plain(lo, mid));
    } else {
      Real umax = pow(mid - lo, Real(1L, bits) / klo);
      auto g = [&](const Real&, const Real& u, const Real&, std::span<Real> out) {
        Real dist = pow(u, static_cast<long>(klo));
        Real y = A + dist;
        f(y, dist, B - y, out);
        Real jac = klo * pow(u, static_cast<long>(klo - 1));
        for (auto& v : out) v *= jac;
      };
      accumulate(total, detail::ts_many(g, Real(0L, bits), umax, n, prec, opt));
    }
    // [mid, hi]: y = b - u^khi
    if (khi == 1) {
      accumulate(total, plain(mid, hi));
    } else {
      Real umax = pow(hi - mid, Real(1L, bits) / khi);
      auto g = [&](const Real&, const Real& u, const Real&, std::span<Real> out) {
        Real dist = pow(u, static_cast<long>(khi));
        Real y = B - dist;
        f(y, y - A, dist, out);
        Real jac = khi * pow(u, static_cast<long>(khi - 1));
        for (auto& v : out) v *= jac;
      };
      accumulate(total, detail::ts_many(g, Real(0L, bits), umax, n, prec, opt));
    }
  }
  return total;
}

// Scalar integrand f(y) or f(y, y-a, b-y).
template <class F>
QuadResult integrate(F&& f, const Real& a, const Real& b, const Precision& prec, const SingularityHints& hints = {},
                     const QuadOptions& opt = {}) {
  auto g = [&](const Real& y, const Real& dlo, const Real& dhi, std::span<Real> out) {
    if constexpr (std::is_invocable_v<F, const Real&, const Real&, const Real&>)
      out[0] = f(y, dlo, dhi);
    else
      out[0] = f(y);
  };
  return integrate_many(g, a, b, 1, prec, hints, opt)[0];
}

// Integral over (x0, inf) through x = x0 + s/(1-s); f(x, x - x0, out).
template <class F>
std::vector<QuadResult> integrate_to_infinity_many(F&& f, const Real& x_start, int n, const Precision& prec,
                                                   const SingularityHints& hints = {}, const QuadOptions& opt = {}) {
  mpfr_prec_t bits = prec.bits();
  auto g = [&](const Real&, const Real& s, const Real& one_minus_s, std::span<Real> out) {
    Real dx = s / one_minus_s;
    Real x = x_start + dx;
    f(x, dx, out);
    Real jac = 1 / square(one_minus_s);
    for (auto& v : out) v *= jac;
  };
  SingularityHints h;
  h.lower_exponent = hints.lower_exponent;
  h.upper_exponent = hints.upper_exponent;
  return integrate_many(g, Real(0L, bits), Real(1L, bits), n, prec, h, opt);
}

}  // namespace kl0
