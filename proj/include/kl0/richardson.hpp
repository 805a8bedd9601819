#pragma once

#include <type_traits>
#include <vector>

#include "kl0/ball.hpp"
#include "kl0/errors.hpp"
#include "kl0/real.hpp"

namespace kl0 {

namespace detail {

template <class G>
Ball eval_as_ball(G& g, const Real& t) {
  if constexpr (std::is_same_v<std::decay_t<std::invoke_result_t<G&, const Real&>>, Ball>)
    return g(t);
  else
    return Ball(g(t));
}

}  // namespace detail

inline Real default_step(const Real& t) {
  Real a = abs(t);
  Real one(1L, t.prec());
  return max(a, one) / 100;
}

// Central differences at h0 2^-k, k < levels (4 for order 1, 5 for order 2),
// extrapolated in h^2. The result's radius is the ball-propagated radius of
// the g-values plus the disagreement of the last two extrapolation columns.
template <class G>
Ball richardson_deriv(G&& g, const Real& t, int order, const Real& h0, const Precision& prec) {
  if (order != 1 && order != 2) throw DomainError("richardson_deriv: order must be 1 or 2");
  if (!(h0 > 0L)) throw DomainError("richardson_deriv: h0 must be positive");
  mpfr_prec_t bits = prec.bits();
  Real tt = t.at(bits);
  int levels = order == 1 ? 4 : 5;
  std::vector<std::vector<Ball>> T(levels);
  Ball center;
  if (order == 2) center = detail::eval_as_ball(g, tt);
  for (int k = 0; k < levels; ++k) {
    Real h = ldexp(h0.at(bits), -k);
    Ball gp = detail::eval_as_ball(g, tt + h);
    Ball gm = detail::eval_as_ball(g, tt - h);
    Ball dk = order == 1 ? (gp - gm) / Ball(2 * h) : (gp - center * 2L + gm) / Ball(square(h));
    T[k].push_back(dk);
    Real four_j(1L, bits);
    for (int j = 1; j <= k; ++j) {
      four_j *= 4;
      Ball next = T[k][j - 1] + (T[k][j - 1] - T[k - 1][j - 1]) / Ball(four_j - 1);
      T[k].push_back(next);
    }
  }
  const Ball& best = T[levels - 1][levels - 1];
  const Ball& prev = T[levels - 1][levels - 2];
  return best.widened(best.mid() - prev.mid());
}

template <class G>
Ball richardson_deriv(G&& g, const Real& t, int order, const Precision& prec) {
  return richardson_deriv(std::forward<G>(g), t, order, default_step(t), prec);
}

}  // namespace kl0
