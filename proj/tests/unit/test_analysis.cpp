#include <gtest/gtest.h>

#include <Eigen/Dense>
#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

#include "tausfde/analysis.hpp"

using namespace tausfde;

TEST(Lipschitz, AffineFieldIsExact) {
  const GridGeometry geo(GridShape{9, 5}, {0.0, -1.0}, {1.0, 1.0});
  const auto w = geo.sample([](std::span<const double> x) { return 3.0 * x[0] - 0.5 * x[1] + 2.0; });
  EXPECT_NEAR(lipschitz_seminorm_estimate(geo, w, 0), 3.0, 1e-12);
  EXPECT_NEAR(lipschitz_seminorm_estimate(geo, w, 1), 0.5, 1e-12);
}

TEST(Lipschitz, CosineCoefficientOfFirstExample) {
  // e = 2 + cos(pi x/5) + cos(pi y/5) on (0,2)^2: sup |de/dy| = (pi/5) sin(2 pi/5) < pi/5.
  const double limit = std::numbers::pi / 5.0 * std::sin(2.0 * std::numbers::pi / 5.0);
  EXPECT_NEAR(limit, 0.59756643294831118887, 1e-15);
  double prev = 0.0;
  for (std::size_t m : {15u, 63u, 255u}) {
    const auto p = example1(1.5, 1.9, m, 1);
    const auto geo = p.geometry();
    const double est = lipschitz_seminorm_estimate(geo, geo.sample(p.coefficients[1]), 1);
    EXPECT_LE(est, std::numbers::pi / 5.0);
    EXPECT_LE(est, limit);
    EXPECT_GT(est, prev);
    prev = est;
  }
  EXPECT_NEAR(prev, limit, 1e-2);
}

TEST(Commutator, MatchesDirectProduct) {
  const std::size_t m = 24;
  std::vector<double> z(m);
  for (std::size_t i = 0; i < m; ++i) z[i] = 1.0 + std::sin(0.3 * static_cast<double>(i));
  const auto seq = make_coefficients(Scheme::CenteredDifference, 1.5, m);
  Eigen::MatrixXd s(m, m), zd = Eigen::MatrixXd::Zero(m, m), zh = Eigen::MatrixXd::Zero(m, m);
  for (std::size_t i = 0; i < m; ++i) {
    zd(i, i) = z[i];
    zh(i, i) = std::sqrt(z[i]);
    for (std::size_t j = 0; j < m; ++j) s(i, j) = seq[i > j ? i - j : j - i];
  }
  const Eigen::MatrixXd delta = zd * s + s * zd - 2.0 * zh * s * zh;
  const double expect = delta.jacobiSvd().singularValues()(0);
  const auto r = commutator_bound_check(z, Scheme::CenteredDifference, 1.5, 1024);
  EXPECT_NEAR(r.norm, expect, 1e-12 * expect);
  EXPECT_TRUE(r.pass);
  EXPECT_NEAR(r.scaled, r.norm * std::pow(25.0, 1.5), 1e-9);
}

TEST(Commutator, ConstantDiagonalCommutes) {
  const std::vector<double> z(16, 2.5);
  const auto r = commutator_bound_check(z, Scheme::CubicSpline, 1.3, 256);
  EXPECT_NEAR(r.norm, 0.0, 1e-14);
  EXPECT_TRUE(r.pass);
}

TEST(Commutator, SmoothDiagonalDecaysLikeBound) {
  for (Scheme sc : {Scheme::CenteredDifference, Scheme::ShiftedGrunwald, Scheme::CubicSpline}) {
    for (std::size_t m : {32u, 128u, 512u}) {
      std::vector<double> z(m);
      for (std::size_t i = 0; i < m; ++i) z[i] = 2.0 + std::cos(std::numbers::pi * (i + 1.0) / (m + 1.0));
      const auto r = commutator_bound_check(z, sc, 1.6);
      EXPECT_TRUE(r.pass) << scheme_name(sc) << " M=" << m << " " << r.norm << " > " << r.bound;
    }
  }
  EXPECT_THROW(commutator_bound_check(std::vector<double>(513, 1.0), Scheme::CenteredDifference, 1.5), GuardError);
}

TEST(Commutator, MuGammaFormula) {
  EXPECT_DOUBLE_EQ(mu_gamma(2.0, 3.0, 4.0, 1.5), 2.0 * 9.0 / (2.0 * 4.0 * 0.5));
}

TEST(TauSpectrum, GeneralizedEigenvaluesInsideUnitBand) {
  for (Scheme sc : {Scheme::CenteredDifference, Scheme::ShiftedGrunwald, Scheme::CubicSpline}) {
    for (double g : {1.1, 1.5, 1.9}) {
      for (std::size_t m : {8u, 64u, 512u}) {
        const auto r = tau_spectrum_check(sc, g, m);
        EXPECT_TRUE(r.pass) << scheme_name(sc) << " " << g << " M=" << m << " [" << r.min << "," << r.max << "]";
        EXPECT_LE(r.min, r.max);
      }
    }
  }
  EXPECT_THROW(tau_spectrum_check(Scheme::CenteredDifference, 1.5, 1025), GuardError);
}

TEST(ConvergenceConstants, ConsistentWithDefinitions) {
  const auto k = convergence_constants(example1(1.5, 1.9, 31, 64), Scheme::CenteredDifference);
  EXPECT_GT(k.c1, 0.0);
  EXPECT_LT(k.c1, 1.0);
  EXPECT_GT(k.c2, 1.0);
  EXPECT_GT(k.theta, 0.0);
  EXPECT_LT(k.theta, 1.0);
  EXPECT_NEAR(k.theta, std::sqrt(1.0 - k.c1 * k.c1 / (3.0 * k.c1 * k.c2 + 9.0 * k.c3 * k.c3)), 1e-15);
  EXPECT_LE(k.c_star, k.c0);
  EXPECT_LE(k.c_star, k.c_star_max);
  EXPECT_EQ(k.c_star_variants_differ, k.c_star != k.c_star_max);
  ASSERT_EQ(k.bounds.size(), 2u);
  for (const auto& b : k.bounds) EXPECT_LT(b.lower, b.upper);
  for (double s : k.seminorms) EXPECT_GT(s, 0.0);
  for (std::size_t i = 0; i < 2; ++i) {
    const double dl = k.bounds[i].lower, du = k.bounds[i].upper;
    EXPECT_LE(k.c1, std::sqrt(dl / (2.0 * du)) + 1e-15);
    EXPECT_GE(k.c2, std::sqrt(2.0 * du / dl) - 1e-15);
  }
}

TEST(ConvergenceConstants, ConstantCoefficientsPutNoLimitOnStep) {
  auto p = example1(1.5, 1.9, 15, 4);
  p.coefficients = {[](std::span<const double>) { return 2.0; }, [](std::span<const double>) { return 3.0; }};
  const auto k = convergence_constants(p, Scheme::CenteredDifference, 256);
  EXPECT_EQ(k.seminorms[0], 0.0);
  EXPECT_EQ(k.c_star, std::numeric_limits<double>::infinity());
  EXPECT_NEAR(k.c1, std::sqrt(0.5), 1e-15);
}

TEST(PreconditionedSpectrum, InsideTheoreticalBand) {
  const auto r = preconditioned_spectrum_check(example1(1.5, 1.9, 15, 256), Scheme::CenteredDifference);
  EXPECT_TRUE(r.hypothesis_met) << "dt above c_star=" << r.constants.c_star;
  EXPECT_TRUE(r.pass) << "[" << r.spectrum.lambda_min << "," << r.spectrum.lambda_max << "] skew "
                      << r.spectrum.skew_radius;
  EXPECT_GE(r.spectrum.lambda_min, r.lower_bound);
  EXPECT_LE(r.spectrum.lambda_max, r.upper_bound);
}

TEST(PreconditionedSpectrum, SymmetrizedMatrixMatchesDenseSquareRoots) {
  const auto spec = example1(1.3, 1.7, 7, 8);
  const auto op = build_operator(spec.discretization(Scheme::CubicSpline));
  const auto p = build_tau(op);
  const Eigen::MatrixXd pd = tau_preconditioner_dense(op, sampled_bounds(op));
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(pd);
  const Eigen::MatrixXd pinvsqrt = es.operatorInverseSqrt();
  const Eigen::MatrixXd expect = pinvsqrt * materialize_dense(op) * pinvsqrt;
  EXPECT_LT((symmetrized_preconditioned_dense(op, p) - expect).norm(), 1e-11 * expect.norm());
}

TEST(RateBound, ResidualsStayBelowGeometricEnvelope) {
  const auto r = theorem_rate_check(example1(1.5, 1.9, 15, 256), Scheme::CenteredDifference);
  EXPECT_TRUE(r.hypothesis_met);
  EXPECT_EQ(r.steps, 256u);
  EXPECT_TRUE(r.pass) << "worst root " << r.worst_root << " theta " << r.constants.theta;
  EXPECT_LT(r.worst_root, r.constants.theta);
}
