#include <gtest/gtest.h>

#include <thread>

#include "kl0/quad.hpp"
#include "oracles.hpp"

using namespace kl0;

namespace {
const Precision kP{50};
const mpfr_prec_t kB = kP.bits();
Real tol(int e) { return Real::pow10(-e, kB); }
}  // namespace

TEST(Quad, SmoothIntegrandMatchesClosedForm) {
  auto q = integrate([](const Real& y) { return exp(y); }, Real(0L, kB), Real(1L, kB), kP);
  EXPECT_LT(abs(q.value - (exp(Real(1L, kB)) - 1)), tol(45));
  EXPECT_LT(abs(q.err_estimate), tol(40));
  EXPECT_GT(q.evaluations, 0);
}

TEST(Quad, AgreesWithGaussLegendreOracle) {
  auto f = [](const Real& y) { return exp(sin(y)) / (1 + square(y)); };
  Real a(0L, kB), b("2.5", kB);
  auto q = integrate(f, a, b, kP);
  Real gl = oracle::gl_integrate(f, a, b, 120);
  EXPECT_LT(abs(q.value - gl), tol(40));
  Ball enc = ball_from_quad(q);
  EXPECT_TRUE(enc.widened(tol(45)).contains(gl));
}

TEST(Quad, EndpointSingularityWithHints) {
  // int_0^1 y^{-1/2} dy = 2, and int_0^1 (1-y)^{-3/4} dy = 4
  SingularityHints lo;
  lo.lower_exponent = -0.5;
  auto q1 = integrate([](const Real& y, const Real& dlo, const Real&) { return 1 / sqrt(dlo + 0 * y); },
                      Real(0L, kB), Real(1L, kB), kP, lo);
  EXPECT_LT(abs(q1.value - 2), tol(40));
  SingularityHints hi;
  hi.upper_exponent = -0.75;
  auto q2 = integrate([](const Real&, const Real&, const Real& dhi) { return pow(dhi, Real("-0.75", kB)); },
                      Real(0L, kB), Real(1L, kB), kP, hi);
  EXPECT_LT(abs(q2.value - 4), tol(35));
}

TEST(Quad, DistancesAreExactNearEndpoints) {
  // The integrand only sees b - y; near b = 1e20 this would be lost as b - y.
  Real a(0L, kB), b("1e20", kB);
  auto q = integrate([&](const Real&, const Real&, const Real& dhi) { return exp(-dhi); }, a, b, kP);
  EXPECT_LT(abs(q.value - 1), tol(30));
}

TEST(Quad, BreakpointsSplitTheInterval) {
  SingularityHints h;
  h.breakpoints.push_back(Real("0.3", kB));
  Real c("0.3", kB);
  auto q = integrate([&](const Real& y) { return abs(y - c); }, Real(0L, kB), Real(1L, kB), kP, h);
  Real exact = (square(c) + square(1 - c)) / 2;
  EXPECT_LT(abs(q.value - exact), tol(40));
}

TEST(Quad, ManyComponentsShareNodes) {
  auto f = [](const Real& y, const Real&, const Real&, std::span<Real> out) {
    out[0] = y;
    out[1] = square(y);
    out[2] = exp(-y);
  };
  auto r = integrate_many(f, Real(0L, kB), Real(2L, kB), 3, kP);
  ASSERT_EQ(r.size(), 3u);
  EXPECT_LT(abs(r[0].value - 2), tol(45));
  EXPECT_LT(abs(r[1].value - Real(8L, kB) / 3), tol(45));
  EXPECT_LT(abs(r[2].value - (1 - exp(Real(-2L, kB)))), tol(45));
}

TEST(Quad, HalfLineIntegral) {
  auto r = integrate_to_infinity_many(
      [](const Real& x, const Real&, std::span<Real> out) { out[0] = 1 / square(x); }, Real(1L, kB), 1, kP);
  EXPECT_LT(abs(r[0].value - 1), tol(40));
}

TEST(Quad, PrecisionControlsAccuracy) {
  Precision p30{30}, p60{60};
  auto f = [](const Real& y) { return log1p(square(y)); };
  auto q30 = integrate(f, Real(0L, p30.bits()), Real(1L, p30.bits()), p30);
  auto q60 = integrate(f, Real(0L, p60.bits()), Real(1L, p60.bits()), p60);
  Real exact = log(Real(2L, p60.bits())) - 2 + Real::pi(p60.bits()) / 2;
  EXPECT_LT(abs(q30.value - exact), Real::pow10(-27, p60.bits()));
  EXPECT_LT(abs(q60.value - exact), Real::pow10(-55, p60.bits()));
}

TEST(Quad, NonFiniteIntegrandRaises) {
  EXPECT_THROW(integrate([](const Real& y) { return 1 / (y - y); }, Real(0L, kB), Real(1L, kB), kP), NumericError);
}

TEST(Quad, ConcurrentUseGivesIdenticalResults) {
  auto f = [](const Real& y) { return exp(-square(y)); };
  std::vector<Real> out(4);
  std::vector<std::thread> ts;
  Precision p{45};
  for (int i = 0; i < 4; ++i)
    ts.emplace_back([&, i] { out[i] = integrate(f, Real(0L, p.bits()), Real(3L, p.bits()), p).value; });
  for (auto& t : ts) t.join();
  for (int i = 1; i < 4; ++i) EXPECT_EQ(out[i], out[0]);
}
