#include <gtest/gtest.h>

#include <Eigen/Dense>
#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "tausfde/preconditioners.hpp"

using namespace tausfde;

namespace {

std::vector<double> random_vec(std::size_t n, unsigned seed, double lo = -1.0, double hi = 1.0) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(lo, hi);
  std::vector<double> v(n);
  for (double& x : v) x = u(rng);
  return v;
}

Eigen::VectorXd as_eigen(const std::vector<double>& v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

Eigen::MatrixXd kron(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  Eigen::MatrixXd k(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j) k.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return k;
}

Eigen::MatrixXd axis_operator(const std::vector<std::size_t>& dims, std::size_t axis, const Eigen::MatrixXd& t) {
  Eigen::MatrixXd out = Eigen::MatrixXd::Identity(1, 1);
  for (std::size_t a = dims.size(); a-- > 0;) {
    const auto n = static_cast<Eigen::Index>(dims[a]);
    out = kron(out, a == axis ? t : Eigen::MatrixXd::Identity(n, n));
  }
  return out;
}

SfdeOperator sample_operator(const std::vector<std::size_t>& dims, Scheme scheme, unsigned seed) {
  const GridShape shape(dims);
  std::vector<double> eta;
  std::vector<ToeplitzSymbol> syms;
  std::vector<std::vector<double>> diags;
  for (std::size_t i = 0; i < dims.size(); ++i) {
    syms.emplace_back(make_coefficients(scheme, 1.3 + 0.3 * static_cast<double>(i), dims[i]).values());
    eta.push_back(2.0 + static_cast<double>(i));
    diags.push_back(random_vec(shape.size(), seed + i, 0.5, 3.0));
  }
  return SfdeOperator(shape, eta, syms, diags);
}

Eigen::MatrixXd dense_tau(const SfdeOperator& op) {
  const auto n = static_cast<Eigen::Index>(op.size());
  Eigen::MatrixXd p = Eigen::MatrixXd::Identity(n, n);
  for (std::size_t i = 0; i < op.rank(); ++i) {
    const auto& t = op.term(i);
    const double dbar = std::sqrt(t.diag_min * t.diag_max);
    p += dbar * t.eta * axis_operator(op.shape().dims(), i, tau_matrix_dense(t.symbol));
  }
  return p;
}

Eigen::MatrixXd dense_circulant(const std::vector<double>& c) {
  const auto m = static_cast<Eigen::Index>(c.size());
  Eigen::MatrixXd a(m, m);
  for (Eigen::Index i = 0; i < m; ++i)
    for (Eigen::Index j = 0; j < m; ++j) a(i, j) = c[static_cast<std::size_t>(((i - j) % m + m) % m)];
  return a;
}

}  // namespace

TEST(MeanCoefficient, GeometricMeanOfBounds) {
  EXPECT_DOUBLE_EQ(mean_coefficient(2.0, 8.0), 4.0);
  EXPECT_DOUBLE_EQ(mean_coefficient(3.0, 3.0), 3.0);
  EXPECT_THROW(mean_coefficient(0.0, 1.0), DomainError);
  EXPECT_THROW(mean_coefficient(2.0, 1.0), DomainError);
}

TEST(TauPreconditioner, MatchesDenseTauAssembly) {
  for (const auto& dims : std::vector<std::vector<std::size_t>>{{9}, {5, 7}, {3, 4, 5}}) {
    const auto op = sample_operator(dims, Scheme::CenteredDifference, 3);
    const auto p = build_tau(op);
    const Eigen::MatrixXd pd = dense_tau(op);
    EXPECT_LT((tau_preconditioner_dense(op, sampled_bounds(op)) - pd).norm(), 1e-12 * pd.norm());
    const auto v = random_vec(op.size(), 1);
    const Eigen::VectorXd pv = pd * as_eigen(v);
    const Eigen::VectorXd piv = pd.ldlt().solve(as_eigen(v));
    const auto got = p.apply(v), goti = p.apply_inverse(v);
    for (std::size_t k = 0; k < v.size(); ++k) {
      EXPECT_NEAR(got[k], pv(k), 1e-10 * pv.norm());
      EXPECT_NEAR(goti[k], piv(k), 1e-12);
    }
  }
}

TEST(TauPreconditioner, InverseUndoesForward) {
  const auto op = sample_operator({31, 63}, Scheme::CubicSpline, 7);
  const auto p = build_tau(op);
  const auto v = random_vec(op.size(), 2);
  const auto w = p.apply_inverse(p.apply(v));
  for (std::size_t k = 0; k < v.size(); ++k) EXPECT_NEAR(w[k], v[k], 1e-11);
}

TEST(TauPreconditioner, HalfPowersCompose) {
  const auto op = sample_operator({15, 7}, Scheme::ShiftedGrunwald, 11);
  const auto p = build_tau(op);
  const auto v = random_vec(op.size(), 3);
  const auto a = p.apply_power(p.apply_power(v, -0.5), -0.5);
  const auto b = p.apply_inverse(v);
  for (std::size_t k = 0; k < v.size(); ++k) EXPECT_NEAR(a[k], b[k], 1e-12);
}

TEST(TauPreconditioner, SpectrumIsPositiveAndMatchesTensorSum) {
  const auto op = sample_operator({6, 5}, Scheme::CenteredDifference, 13);
  const auto p = build_tau(op);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(dense_tau(op), Eigen::EigenvaluesOnly);
  auto lam = p.lambda();
  std::sort(lam.begin(), lam.end());
  for (std::size_t k = 0; k < lam.size(); ++k) EXPECT_NEAR(lam[k], es.eigenvalues()(k), 1e-10 * lam.back());
  EXPECT_GT(lam.front(), 1.0);  // S_i and tau(S_i) are positive definite for these schemes
}

TEST(TauPreconditioner, ExplicitBoundsOverrideSampledOnes) {
  const auto op = sample_operator({7, 7}, Scheme::CenteredDifference, 5);
  const std::vector<CoefficientBounds> b{{1.0, 4.0}, {9.0, 9.0}};
  const auto p = build_tau(op, b);
  EXPECT_DOUBLE_EQ(p.dbar()[0], 2.0);
  EXPECT_DOUBLE_EQ(p.dbar()[1], 9.0);
  EXPECT_THROW(build_tau(op, std::vector<CoefficientBounds>{{1.0, 2.0}}), DomainError);
}

TEST(TauPreconditioner, ConstantCoefficientsSharePTilde) {
  // With constant d_i the operator and P~ coincide; tau(S) differs from S only by the Hankel part.
  const GridShape shape{8, 6};
  const std::vector<std::size_t> dims{8, 6};
  std::vector<ToeplitzSymbol> syms{ToeplitzSymbol(make_coefficients(Scheme::CenteredDifference, 1.5, 8).values()),
                                   ToeplitzSymbol(make_coefficients(Scheme::CenteredDifference, 1.9, 6).values())};
  const SfdeOperator op(shape, {3.0, 2.0}, syms, {std::vector<double>(48, 2.0), std::vector<double>(48, 0.5)});
  const auto b = sampled_bounds(op);
  EXPECT_LT((tilde_p_dense(op, b) - materialize_dense(op)).norm(), 1e-12);
}

TEST(Strang, FirstColumnWrapsSymbol) {
  const ToeplitzSymbol sym({5.0, 4.0, 3.0, 2.0, 1.0});
  EXPECT_EQ(strang_first_column(sym), (std::vector<double>{5.0, 4.0, 3.0, 3.0, 4.0}));
  const ToeplitzSymbol even({5.0, 4.0, 3.0, 2.0});
  EXPECT_EQ(strang_first_column(even), (std::vector<double>{5.0, 4.0, 3.0, 4.0}));
}

TEST(Strang, CirculantEigenvaluesMatchCosineSum) {
  const std::vector<double> c{5.0, 1.0, -0.5, 0.25, -0.5, 1.0};
  const auto mu = circulant_eigenvalues(c);
  for (std::size_t k = 0; k < c.size(); ++k) {
    double acc = 0.0;
    for (std::size_t j = 0; j < c.size(); ++j) acc += c[j] * std::cos(2.0 * std::numbers::pi * j * k / c.size());
    EXPECT_NEAR(mu[k], acc, 1e-13);
  }
}

TEST(Strang, InverseMatchesDenseSolve) {
  const auto op = sample_operator({7, 8}, Scheme::CenteredDifference, 17);
  const auto c = build_strang_circulant(op);
  const auto n = static_cast<Eigen::Index>(op.size());
  Eigen::MatrixXd pd = Eigen::MatrixXd::Identity(n, n);
  for (std::size_t i = 0; i < 2; ++i) {
    const auto& t = op.term(i);
    pd += std::sqrt(t.diag_min * t.diag_max) * t.eta *
          axis_operator(op.shape().dims(), i, dense_circulant(strang_first_column(t.symbol)));
  }
  const auto v = random_vec(op.size(), 9);
  const Eigen::VectorXd expect = pd.partialPivLu().solve(as_eigen(v));
  const auto got = c.apply_inverse(v);
  for (std::size_t k = 0; k < v.size(); ++k) EXPECT_NEAR(got[k], expect(k), 1e-11);
}

TEST(Strang, SingularDiagonalRejected) {
  std::vector<std::complex<double>> d(4, 1.0);
  d[2] = 0.0;
  EXPECT_THROW(CirculantPreconditioner(GridShape{4}, d), DomainError);
}
