#pragma once

// Test-side reference computations. Nothing here calls into the library
// except the Real type itself.

#include <functional>
#include <utility>
#include <vector>

#include "kl0/real.hpp"

namespace oracle {

using kl0::Real;

// N_A(x,p) straight from the polynomial-in-powers definition.
inline Real na_raw(const Real& x, const Real& p) {
  return pow(x, 2 * p - 2) - (p - 1) * pow(x, p) + (p - 1) * pow(x, p - 2) - 1;
}

// F(y;p) straight from its definition, no log-domain tricks.
inline Real f_raw(const Real& y, const Real& p) {
  Real x = (y + 1) / (y - 1);
  Real two(2L, y.prec());
  return 2 * square(na_raw(x, p)) * pow(y - 1, p - 2) / (pow(two, p) * pow(pow(x, p) - 1, 3L));
}

// Gauss-Legendre nodes and weights on [-1,1] by Newton on P_n.
inline std::vector<std::pair<Real, Real>> gauss_legendre(int n, mpfr_prec_t bits) {
  std::vector<std::pair<Real, Real>> out;
  Real pi = Real::pi(bits);
  for (int i = 1; i <= n; ++i) {
    Real x = cos(pi * (4 * i - 1) / (4 * n + 2));
    Real dp(0L, bits);
    for (int it = 0; it < 100; ++it) {
      Real p0(1L, bits), p1 = x;
      for (int k = 2; k <= n; ++k) {
        Real p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
        p0 = std::move(p1);
        p1 = std::move(p2);
      }
      dp = n * (x * p1 - p0) / (square(x) - 1);
      Real dx = p1 / dp;
      x -= dx;
      if (abs(dx) < ldexp(Real(1L, bits), -static_cast<long>(bits) + 4)) break;
    }
    Real w = 2 / ((1 - square(x)) * square(dp));
    out.emplace_back(x, w);
  }
  return out;
}

inline Real gl_integrate(const std::function<Real(const Real&)>& f, const Real& a, const Real& b, int n) {
  mpfr_prec_t bits = a.prec();
  Real half = (b - a) / 2, mid = (a + b) / 2, sum(0L, bits);
  for (const auto& [x, w] : gauss_legendre(n, bits)) sum += w * f(mid + half * x);
  return sum * half;
}

// Five-point central differences.
inline Real fd1(const std::function<Real(const Real&)>& f, const Real& t, const Real& h) {
  return (f(t - 2 * h) - 8 * f(t - h) + 8 * f(t + h) - f(t + 2 * h)) / (12 * h);
}
inline Real fd2(const std::function<Real(const Real&)>& f, const Real& t, const Real& h) {
  return (-f(t - 2 * h) + 16 * f(t - h) - 30 * f(t) + 16 * f(t + h) - f(t + 2 * h)) / (12 * square(h));
}

}  // namespace oracle
