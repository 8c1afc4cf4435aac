#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "tausfde/coefficients.hpp"

using namespace tausfde;

namespace {

// Reference values from 50-digit arbitrary-precision evaluation.
constexpr double kGamma2p5 = 1.3293403881791370204736256125058588870981620920918;
constexpr double kGamma0p5 = 1.7724538509055160272981674833411451827975494561224;
constexpr double kGamma7p3 = 1271.4236336639088399178743261418737771201939999686;
constexpr double kGamma0p1 = 9.5135076986687312858079798958252325009137161063903;
constexpr double kGamma1p95 = 0.97988065127258056938548879502786579289247656260803;

// Centered-difference weights at gamma = 1.5, same precision.
constexpr double kCentered15[] = {1.5737874653547949681, -0.67448034229491212917, -0.061316394754082920834,
                                  -0.020438798251360973611};

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

// (-1)^k Gamma(g+1) / (Gamma(g/2-k+1) Gamma(g/2+k+1)), evaluated directly.
double centered_direct(double g, int k) {
  const double sign = (k % 2) ? -1.0 : 1.0;
  return sign * std::tgamma(g + 1.0) / (std::tgamma(g / 2.0 - k + 1.0) * std::tgamma(g / 2.0 + k + 1.0));
}

// g_k = -(-1)^k binom(g, k), the sign convention with g_0 = -1.
double grunwald_direct(double g, int k) {
  const double sign = (k % 2) ? 1.0 : -1.0;
  return sign * std::tgamma(g + 1.0) / (std::tgamma(k + 1.0) * std::tgamma(g - k + 1.0));
}

long double spline_p_direct(long double a, long double k) {
  auto pw = [a](long double x) { return x <= 0 ? 0.0L : std::pow(x, a); };
  return -pw(k + 1) + 4 * pw(k) - 6 * pw(k - 1) + 4 * pw(k - 2) - pw(k - 3);
}

const double kGammas[] = {1.05, 1.1, 1.3, 1.5, 1.7, 1.9, 1.95};
const Scheme kSchemes[] = {Scheme::CenteredDifference, Scheme::ShiftedGrunwald, Scheme::CubicSpline};

}  // namespace

TEST(GammaFunction, MatchesHighPrecisionValues) {
  EXPECT_LT(rel(gamma_function(2.5), kGamma2p5), 1e-14);
  EXPECT_LT(rel(gamma_function(0.5), kGamma0p5), 1e-14);
  EXPECT_LT(rel(gamma_function(7.3), kGamma7p3), 1e-13);
  EXPECT_LT(rel(gamma_function(0.1), kGamma0p1), 1e-14);
  EXPECT_LT(rel(gamma_function(1.95), kGamma1p95), 1e-14);
}

TEST(GammaFunction, RejectsPolesAndNonFinite) {
  EXPECT_THROW(gamma_function(0.0), DomainError);
  EXPECT_THROW(gamma_function(-1.0), DomainError);
  EXPECT_THROW(gamma_function(std::nan("")), DomainError);
}

TEST(CenteredDifference, LeadingWeightsAtOneAndAHalf) {
  const auto s = centered_difference_coeffs(1.5, 4);
  for (int k = 0; k < 4; ++k) EXPECT_LT(rel(s[k], kCentered15[k]), 1e-14) << "k=" << k;
}

TEST(CenteredDifference, RecurrenceMatchesClosedForm) {
  for (double g : kGammas) {
    const auto s = centered_difference_coeffs(g, 40);
    for (int k = 0; k < 40; ++k) EXPECT_LT(rel(s[k], centered_direct(g, k)), 1e-11) << g << " k=" << k;
  }
}

TEST(CenteredDifference, SymbolAtPiIsTwoToTheGamma) {
  // sum_k s_k e^{ik theta} = |2 sin(theta/2)|^gamma
  for (double g : {1.2, 1.5, 1.8}) {
    const auto s = centered_difference_coeffs(g, 1 << 16);
    double acc = s[0];
    for (std::size_t k = 1; k < s.size(); ++k) acc += 2.0 * ((k % 2) ? -s[k] : s[k]);
    EXPECT_NEAR(acc, std::pow(2.0, g), 1e-8) << g;
  }
}

TEST(ShiftedGrunwald, MatchesBinomialWeights) {
  for (double g : kGammas) {
    const auto s = shifted_grunwald_coeffs(g, 30);
    const double q = -1.0 / (2.0 * std::cos(g * std::numbers::pi / 2.0));
    EXPECT_LT(rel(s[0], 2.0 * q * grunwald_direct(g, 1)), 1e-12);
    EXPECT_LT(rel(s[1], q * (grunwald_direct(g, 0) + grunwald_direct(g, 2))), 1e-12);
    for (int k = 2; k < 30; ++k) EXPECT_LT(rel(s[k], q * grunwald_direct(g, k + 1)), 1e-10) << g << " k=" << k;
  }
}

TEST(CubicSpline, LeadingWeightsFromPowers) {
  const double g = 1.5, a = 3.0 - g;
  const double nu = -1.0 / (2.0 * std::cos(g * std::numbers::pi / 2.0) * std::tgamma(4.0 - g));
  const auto s = cubic_spline_coeffs(g, 4);
  const double p0 = -1.0, p1 = 4.0 - std::pow(2.0, a), p2 = -std::pow(3.0, a) + 4.0 * std::pow(2.0, a) - 6.0;
  const double p3 = -std::pow(4.0, a) + 4.0 * std::pow(3.0, a) - 6.0 * std::pow(2.0, a) + 4.0;
  EXPECT_LT(rel(s[0], 2.0 * nu * p1), 1e-14);
  EXPECT_LT(rel(s[1], nu * (p0 + p2)), 1e-14);
  EXPECT_LT(rel(s[2], nu * p3), 1e-13);
}

TEST(CubicSpline, IntegralTailAgreesWithExtendedPrecisionDifferences) {
  for (double g : {1.1, 1.5, 1.9}) {
    const double nu = -1.0 / (2.0 * std::cos(g * std::numbers::pi / 2.0) * std::tgamma(4.0 - g));
    const auto s = cubic_spline_coeffs(g, 60);
    for (int k = 14; k < 60; ++k) {
      const double expect = nu * static_cast<double>(spline_p_direct(3.0L - g, k + 1));
      EXPECT_LT(rel(s[k], expect), 1e-6) << g << " k=" << k;
    }
  }
}

TEST(Coefficients, RejectOrdersOutsideOpenInterval) {
  for (Scheme sc : kSchemes) {
    EXPECT_THROW(make_coefficients(sc, 1.0, 8), DomainError);
    EXPECT_THROW(make_coefficients(sc, 2.0, 8), DomainError);
    EXPECT_THROW(make_coefficients(sc, 1.5, 0), DomainError);
  }
}

TEST(Coefficients, SchemeNamesRoundTrip) {
  for (Scheme sc : kSchemes) EXPECT_EQ(parse_scheme(scheme_name(sc)), sc);
  EXPECT_THROW(parse_scheme("weno"), DomainError);
}

TEST(Coefficients, PrefixKeepsLeadingEntries) {
  const auto s = make_coefficients(Scheme::CubicSpline, 1.4, 32);
  const auto p = s.prefix(5);
  ASSERT_EQ(p.size(), 5u);
  for (std::size_t k = 0; k < 5; ++k) EXPECT_EQ(p[k], s[k]);
  EXPECT_EQ(p.gamma(), 1.4);
  EXPECT_THROW(s.prefix(33), DomainError);
}

TEST(Properties, AllSchemesSatisfyEveryItem) {
  for (Scheme sc : kSchemes) {
    for (double g : kGammas) {
      const auto r = validate_properties(make_coefficients(sc, g, 4096), g >= 1.95 ? 2.0 : 1.25);
      EXPECT_TRUE(r.all_pass()) << scheme_name(sc) << " " << g << ": " << r.first_failed();
      EXPECT_TRUE(r.scaled_sum_bounded_below) << scheme_name(sc) << " " << g;
      EXPECT_GT(r.min_scaled_sum, 0.0);
      EXPECT_TRUE(std::isfinite(r.decay_constant));
    }
  }
}

TEST(Properties, FullSumVanishes) {
  // The symbol vanishes at theta = 0, so s_0 + 2 sum s_k -> 0 like m^{-gamma}.
  for (Scheme sc : kSchemes) {
    const auto s = make_coefficients(sc, 1.5, 1 << 18);
    double acc = s[0];
    for (std::size_t k = 1; k < s.size(); ++k) acc += 2.0 * s[k];
    EXPECT_NEAR(acc, 0.0, 1e-6) << scheme_name(sc);
  }
}

TEST(Properties, DetectsSignFlip) {
  auto v = make_coefficients(Scheme::CenteredDifference, 1.5, 64).values();
  v[5] = -v[5];
  const auto r = validate_properties(CoefficientSequence(Scheme::CenteredDifference, 1.5, v));
  EXPECT_FALSE(r.all_pass());
  EXPECT_EQ(r.first_failed(), "tail_nonpositive");
  ASSERT_TRUE(r.tail_nonpositive.first_failure);
  EXPECT_EQ(*r.tail_nonpositive.first_failure, 5u);
}

TEST(Properties, DetectsNonMonotoneTail) {
  auto v = make_coefficients(Scheme::ShiftedGrunwald, 1.5, 64).values();
  v[10] = 0.5 * v[10];
  const auto r = validate_properties(CoefficientSequence(Scheme::ShiftedGrunwald, 1.5, v));
  EXPECT_FALSE(r.monotone_tail.pass);
  EXPECT_EQ(*r.monotone_tail.first_failure, 10u);
}

TEST(Properties, DetectsGrowingTail) {
  auto v = make_coefficients(Scheme::CenteredDifference, 1.5, 256).values();
  for (std::size_t k = 10; k < 256; ++k) v[k] *= static_cast<double>(k) / 10.0;  // |s_k| ~ k^{-gamma}
  const auto r = validate_properties(CoefficientSequence(Scheme::CenteredDifference, 1.5, v));
  EXPECT_FALSE(r.decay.pass);
}

TEST(Properties, DecayConstantMatchesProxy) {
  const auto s = make_coefficients(Scheme::CubicSpline, 1.3, 512);
  EXPECT_DOUBLE_EQ(validate_properties(s).decay_constant, d_gamma_norm_proxy(s));
}
