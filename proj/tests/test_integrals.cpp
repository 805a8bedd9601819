#include <gtest/gtest.h>

#include "kl0/integrals.hpp"
#include "oracles.hpp"

using namespace kl0;

namespace {
const Precision kP{50};
const mpfr_prec_t kB = kP.bits();
Params P(int d, const char* p, const char* M) { return Params::parse(d, p, M, kP); }
Real rel(const Ball& a, const Ball& b) { return abs(a.mid() / b.mid() - 1); }
}  // namespace

TEST(Integrals, DualFormsAgree) {
  for (auto [d, p, M] : std::vector<std::tuple<int, const char*, const char*>>{
           {2, "2.5", "3"}, {3, "3.5", "5"}, {4, "4.95", "5.75"}, {3, "3.1", "1.2"}, {4, "4.3", "17"}}) {
    Params q = P(d, p, M);
    EXPECT_LT(rel(i_l(q, kP, Form::x_form), i_l(q, kP, Form::y_form)), Real("1e-30", kB)) << d << " " << p << " " << M;
    EXPECT_LT(rel(i_r(q, kP, Form::x_form), i_r(q, kP, Form::y_form)), Real("1e-30", kB)) << d << " " << p << " " << M;
  }
}

TEST(Integrals, BallsAreTight) {
  Ball il = i_l(P(3, "3.5", "5"), kP);
  EXPECT_LT(il.rel_rad(), Real("1e-40", kB));
}

TEST(Integrals, IRIncreasesWithM) {
  Ball a = i_r(P(3, "3.5", "2"), kP), b = i_r(P(3, "3.5", "2.1"), kP);
  EXPECT_TRUE(certainly_lt(a, b));
}

TEST(Integrals, RatioAtWorstGridPoint) {
  Ball r = ratio_r(P(4, "4.95", "5.75"), kP);
  EXPECT_NEAR(r.mid().to_double(), 0.70316364565243, 1e-12);
  EXPECT_GE(r.upper(), r.mid());
  EXPECT_LT(r.upper(), 1L);
  Ball r2 = ratio_r(P(2, "2.95", "5.75"), kP);
  EXPECT_TRUE(r2.positive());
  EXPECT_LT(r2.upper(), Real("0.2", kB));
}

TEST(Integrals, RatioNearTheLowerBoundaryIsSmall) {
  Ball r = ratio_r(P(4, "4.95", "1.001"), kP);
  EXPECT_TRUE(r.positive());
  EXPECT_LT(r.upper(), Real("1e-6", kB));
}

TEST(Integrals, HAgreesWithSecondDifferenceOfLogIL) {
  for (auto [d, p, M] : std::vector<std::tuple<int, const char*, const char*>>{
           {2, "2.5", "5"}, {3, "3.1", "20"}, {4, "4.9", "2"}, {3, "3.5", "1.1"}}) {
    Params q = P(d, p, M);
    Ball h = h_dlog2(q, kP);
    auto logil = [&](const Real& m) { return log(i_l(q.with_M(m), kP).mid()); };
    Real step = (q.M - 1) / 1000;
    Real fd = oracle::fd2(logil, q.M, step);
    EXPECT_LT(abs(h.mid() - fd), Real("1e-9", kB) * max(abs(fd), Real(1L, kB))) << d << " " << p << " " << M;
  }
}

TEST(Integrals, MomentAndAbcRoutesAgree) {
  for (auto [d, p, M] :
       std::vector<std::tuple<int, const char*, const char*>>{{2, "2.5", "5"}, {3, "3.1", "20"}, {4, "4.5", "7"}}) {
    Params q = P(d, p, M);
    Ball a = h_dlog2(q, kP, Route::moments), b = h_dlog2(q, kP, Route::abc);
    EXPECT_LT(abs(a.mid() - b.mid()), Real("1e-35", kB) * abs(a.mid())) << d;
  }
}

TEST(Integrals, InequalitySignMatchesH) {
  Params q = P(4, "4.5", "7");
  Ball lhs = ineq_lhs(q, abc_moments(q, kP), kP);
  Ball h = h_dlog2(q, kP);
  EXPECT_TRUE(h.negative());
  EXPECT_TRUE(lhs.positive());
}

TEST(Integrals, IAlphaPaths) {
  Params q = P(3, "3.5", "4");
  Ball via_half = i_alpha(q, Real("1.5", kB), kP);
  EXPECT_LT(rel(via_half, i_l(q, kP)), Real("1e-40", kB));
  Ball general = i_alpha(q, Real("1.5000000000000000000001", kB), kP);
  EXPECT_LT(rel(via_half, general), Real("1e-20", kB));
  Ball edge = i_alpha(q, Real("-0.5", kB), kP);
  Ball near = i_alpha(q, Real("-0.4999999999999999999999", kB), kP);
  EXPECT_LT(rel(edge, near), Real("1e-18", kB));
  EXPECT_THROW(i_alpha(q, Real("-0.6", kB), kP), DomainError);
}

TEST(Integrals, GainLossPiecesAreConsistent) {
  Params q = P(4, "4.95", "5.75");
  GainLoss g = gain_loss(q, kP);
  EXPECT_TRUE(g.J.positive());
  Ball il = i_l(q, kP, Form::x_form);
  Ball recon = g.J - il * (q.p / 3);
  EXPECT_LT(abs(recon.mid() - g.residual.mid()), Real("1e-30", kB) * g.J.mid());
}

TEST(Integrals, IrD2Ratio) {
  Ball v = ir_d2_ratio(Real("2.95", kB), Real("1.5", kB), kP);
  EXPECT_NEAR(v.mid().to_double(), 0.7553, 1e-3);
  for (const char* ps : {"2.5", "2.95"}) {
    Real p(ps, kB);
    Ball lim = ir_d2_ratio(p, Real("1.0001", kB), kP);
    EXPECT_NEAR(lim.mid().to_double(), (p / (p + 1)).to_double(), 1e-3) << ps;
  }
  EXPECT_THROW(ir_d2_ratio(Real("3.5", kB), Real("2", kB), kP), DomainError);
}

TEST(Integrals, DigitsShrinkRadius) {
  Params q = P(3, "3.5", "5");
  Ball r30 = ratio_r(q.at(Precision{30}), Precision{30});
  Ball r50 = ratio_r(q, kP);
  EXPECT_LT(r50.rad(), r30.rad());
  EXPECT_TRUE(r30.contains(r50.mid()));
}
