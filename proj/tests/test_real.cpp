#include <gtest/gtest.h>

#include "kl0/params.hpp"
#include "kl0/real.hpp"

using namespace kl0;

TEST(Precision, BitsCoverDigitsPlusGuard) {
  EXPECT_EQ(Precision{50}.bits(), 167 + Precision::kGuardBits);
  EXPECT_EQ(Precision{15}.bits(), 50 + Precision::kGuardBits);
  EXPECT_EQ(Precision{30}.scaled_by(3, 2).digits, 45);
  EXPECT_THROW(Precision{14}.validate(), DomainError);
  EXPECT_NO_THROW(Precision{15}.validate());
}

TEST(Real, ParsesDecimalsExactlyEnough) {
  mpfr_prec_t bits = Precision{50}.bits();
  Real a("0.1", bits), b("0.2", bits), c("0.3", bits);
  EXPECT_LT(abs(a + b - c), Real("1e-55", bits));
  EXPECT_THROW(Real("abc", bits), DomainError);
  EXPECT_THROW(Real("", bits), DomainError);
}

TEST(Real, MixedPrecisionTakesTheWider) {
  Real lo(1L, 64), hi(1L, 256);
  EXPECT_EQ((lo + hi).prec(), 256);
  EXPECT_EQ((hi * lo).prec(), 256);
  EXPECT_EQ((lo / 3).prec(), 64);
}

TEST(Real, ElementaryFunctionsAgreeWithIdentities) {
  mpfr_prec_t bits = Precision{60}.bits();
  Real x("0.7315", bits);
  Real tiny("1e-62", bits);
  EXPECT_LT(abs(exp(log(x)) - x), tiny);
  EXPECT_LT(abs(square(sinh(x)) - square(cosh(x)) + 1), tiny * 10);
  EXPECT_LT(abs(expm1(x) - (exp(x) - 1)), tiny);
  EXPECT_LT(abs(pow(x, Real("2.5", bits)) - x * x * sqrt(x)), tiny);
  EXPECT_LT(abs(4 * atan(Real(1L, bits)) - Real::pi(bits)), tiny);
  EXPECT_LT(abs(square(sin(x)) + square(cos(x)) - 1), tiny);
}

TEST(Real, FormattingIsLocaleFree) {
  mpfr_prec_t bits = Precision{20}.bits();
  Real x("-1234.5678", bits);
  EXPECT_EQ(x.fixed(2), "-1234.57");
  EXPECT_EQ(x.str(4), "-1.235e+03");
  EXPECT_EQ(Real::nan(bits).str(3), "nan");
  Real y(x.str(), bits);
  EXPECT_EQ(y, x);
}

TEST(Real, ComparisonsAndMoves) {
  Real a(2L, 100), b(3L, 100);
  EXPECT_TRUE(a < b);
  EXPECT_TRUE(b > 2.5);
  EXPECT_TRUE(a == 2L);
  Real c = std::move(a);
  EXPECT_EQ(c, 2L);
  a = b;
  EXPECT_EQ(a, 3L);
  EXPECT_EQ(max(b, c), 3L);
  EXPECT_EQ(min(b, c), 2L);
}

TEST(Params, CheckedRejectsOutsideTheStrip) {
  Precision prec{30};
  EXPECT_NO_THROW(Params::parse(4, "4.95", "5.75", prec));
  EXPECT_THROW(Params::parse(2, "1.5", "3", prec), DomainError);
  EXPECT_THROW(Params::parse(3, "4", "3", prec), DomainError);
  EXPECT_THROW(Params::parse(3, "3.5", "1", prec), DomainError);
  EXPECT_THROW(Params::parse(1, "1.5", "3", prec), DomainError);
  EXPECT_NO_THROW(Params::parse(5, "5.9", "3", prec, false));
  EXPECT_NO_THROW(Params::parse(3, "7.5", "3", prec, false));
  EXPECT_THROW(Params::parse(3, "0.5", "3", prec, false), DomainError);
}
