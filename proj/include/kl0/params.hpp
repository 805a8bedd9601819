#pragma once

#include <string>
#include <string_view>

#include "kl0/errors.hpp"
#include "kl0/real.hpp"

namespace kl0 {

// Evaluation coordinate (d, p, M).
struct Params {
  int d = 2;
  Real p;
  Real M;

  // d >= 2, d < p < d+1, M > 1.
  static Params checked(int d, Real p, Real M) {
    if (d < 2) throw DomainError("d must be >= 2, got " + std::to_string(d));
    if (!(p > d) || !(p < d + 1))
      throw DomainError("p must lie in (d, d+1): d=" + std::to_string(d) + " p=" + p.str(10));
    if (!(M > 1)) throw DomainError("M must exceed 1, got " + M.str(10));
    return Params{d, std::move(p), std::move(M)};
  }
  // Exploration path: any d >= 2, p > 1, M > 1.
  static Params unchecked(int d, Real p, Real M) {
    if (d < 2) throw DomainError("d must be >= 2, got " + std::to_string(d));
    if (!(p > 1)) throw DomainError("p must exceed 1, got " + p.str(10));
    if (!(M > 1)) throw DomainError("M must exceed 1, got " + M.str(10));
    return Params{d, std::move(p), std::move(M)};
  }
  static Params parse(int d, std::string_view p, std::string_view M, const Precision& prec, bool check = true) {
    Real rp(p, prec.bits()), rM(M, prec.bits());
    return check ? checked(d, std::move(rp), std::move(rM)) : unchecked(d, std::move(rp), std::move(rM));
  }

  bool admissible() const { return d >= 2 && p > d && p < d + 1 && M > 1; }
  // Same coordinate re-rounded to another precision.
  Params at(const Precision& prec) const { return Params{d, p.at(prec.bits()), M.at(prec.bits())}; }
  Params with_M(Real m) const { return Params{d, p, std::move(m)}; }
  Params with_p(Real q) const { return Params{d, std::move(q), M}; }
};

}  // namespace kl0
