#include <gtest/gtest.h>

#include "kl0/richardson.hpp"

using namespace kl0;

namespace {
const Precision kP{50};
const mpfr_prec_t kB = kP.bits();
}  // namespace

TEST(Richardson, FirstDerivativeOfExp) {
  Real t("0.7", kB);
  Ball d = richardson_deriv([](const Real& x) { return exp(x); }, t, 1, kP);
  EXPECT_TRUE(d.widened(Real("1e-25", kB)).contains(exp(t)));
  EXPECT_LT(abs(d.mid() - exp(t)), Real("1e-20", kB));
}

TEST(Richardson, SecondDerivativeOfLog) {
  Real t("3", kB);
  Ball d = richardson_deriv([](const Real& x) { return log(x); }, t, 2, kP);
  Real exact = -1 / square(t);
  EXPECT_LT(abs(d.mid() - exact), Real("1e-18", kB));
  EXPECT_TRUE(d.widened(Real("1e-20", kB)).contains(exact));
}

TEST(Richardson, BallValuedFunctionsPropagateRadius) {
  Real t("1.5", kB), r("1e-30", kB);
  auto g = [&](const Real& x) { return Ball(square(x), r); };
  Ball d = richardson_deriv(g, t, 1, kP);
  EXPECT_LT(abs(d.mid() - 3), Real("1e-25", kB));
  EXPECT_GT(d.rad(), r);
}

TEST(Richardson, ExplicitStepAndErrors) {
  Real t("1.001", kB);
  Ball d = richardson_deriv([](const Real& x) { return sqrt(x - 1); }, t, 1, Real("0.0005", kB), kP);
  Real exact = 1 / (2 * sqrt(t - 1));
  EXPECT_LT(abs(d.mid() / exact - 1), Real("1e-6", kB));
  EXPECT_THROW(richardson_deriv([](const Real& x) { return x; }, t, 3, kP), DomainError);
  EXPECT_THROW(richardson_deriv([](const Real& x) { return x; }, t, 1, Real(0L, kB), kP), DomainError);
  EXPECT_EQ(default_step(Real("250", kB)), Real("2.5", kB));
  EXPECT_EQ(default_step(Real("0.2", kB)), Real("0.01", kB));
}
