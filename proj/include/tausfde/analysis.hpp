#ifndef TAUSFDE_ANALYSIS_HPP
#define TAUSFDE_ANALYSIS_HPP

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <vector>

#include "tausfde/coefficients.hpp"
#include "tausfde/errors.hpp"
#include "tausfde/grid.hpp"
#include "tausfde/krylov.hpp"
#include "tausfde/operator.hpp"
#include "tausfde/preconditioners.hpp"
#include "tausfde/problems.hpp"
#include "tausfde/transforms.hpp"

namespace tausfde {

inline constexpr std::size_t kDefaultNormPrefix = 4096;

/// max over grid lines of |w(x + h e_axis) - w(x)| / h. A lower estimate of the
/// Lipschitz seminorm of w with respect to that variable.
inline double lipschitz_seminorm_estimate(const GridGeometry& geo, std::span<const double> w, std::size_t axis) {
  detail::require(axis < geo.shape.rank(), "lipschitz_seminorm_estimate: axis out of range");
  detail::require_size(w.size(), geo.shape.size(), "lipschitz_seminorm_estimate");
  const std::size_t len = geo.shape.dim(axis);
  detail::require(len >= 2, "lipschitz_seminorm_estimate: need at least two points along the axis");
  const std::size_t stride = geo.shape.stride(axis);
  const double h = geo.spacing(axis);
  double best = 0.0;
  for (std::size_t p = 0; p < w.size(); ++p) {
    if ((p / stride) % len + 1 == len) continue;
    best = std::max(best, std::abs(w[p + stride] - w[p]) / h);
  }
  return best;
}

struct ConvergenceConstants {
  double c1 = 0, c2 = 0, c3 = 0;
  double b1 = 0, b2 = 0, b3 = 0;
  double c0 = 0;
  double c_star = 0;      // min{c0, c3/b3}: the hypothesis used throughout
  double c_star_max = 0;  // max{(1-c1)/b1, (c2-1)/b2, c3/b3}: the multi-dimensional statement's variant
  double theta = 0;
  std::vector<double> seminorms;   // |d_i|_{L_i}, grid estimates
  std::vector<double> d_norms;     // D_gamma norm proxies of the coefficient sequences
  std::vector<CoefficientBounds> bounds;
  bool c_star_variants_differ = false;
};

namespace detail {

inline double ratio_or_inf(double num, double den) {
  return den == 0.0 ? std::numeric_limits<double>::infinity() : num / den;
}

}  // namespace detail

/// Constants of the step-size-independent convergence bound, evaluated from the
/// grid bounds and seminorm estimates of the coefficient functions.
inline ConvergenceConstants convergence_constants(const ProblemSpec& spec, Scheme scheme,
                                                  std::size_t norm_prefix = kDefaultNormPrefix) {
  const auto disc = spec.discretization(scheme);
  const auto& geo = disc.geometry;
  const std::size_t m = spec.rank();
  ConvergenceConstants k;
  k.c1 = std::numeric_limits<double>::infinity();
  k.c2 = 0.0;
  k.c3 = 0.0;
  const double sqrt2 = std::sqrt(2.0);
  for (std::size_t i = 0; i < m; ++i) {
    const auto& w = disc.coefficients[i];
    const auto [lo, hi] = std::minmax_element(w.begin(), w.end());
    detail::require(*lo > 0.0, "convergence_constants: coefficient lower bound must be positive");
    const double dl = *lo, du = *hi, dbar = std::sqrt(dl * du);
    k.bounds.push_back({dl, du});
    const double semi = geo.shape.dim(i) >= 2 ? lipschitz_seminorm_estimate(geo, w, i) : 0.0;
    const double alpha = spec.orders[i];
    const double dn = d_gamma_norm_proxy(make_coefficients(scheme, alpha, norm_prefix));
    k.seminorms.push_back(semi);
    k.d_norms.push_back(dn);
    const double width = spec.upper[i] - spec.lower[i];

    k.c1 = std::min(k.c1, std::sqrt(dl / (2.0 * du)));
    k.c2 = std::max(k.c2, std::sqrt(2.0 * du / dl));
    k.c3 = std::max(k.c3, (du * du + dl * dl + 1.0) / (2.0 * dbar));
    const double common = dn * semi * semi * width * width / (2.0 - alpha);
    k.b1 += common / (4.0 * (1.0 - sqrt2 / 2.0) * dl);
    k.b2 += common / (4.0 * (sqrt2 - 1.0) * du);
    k.b3 += dn * du * du * semi * semi * std::pow(width, 2.0 + alpha) / (dl * dl * (2.0 - alpha));
  }
  const double r1 = detail::ratio_or_inf(1.0 - k.c1, k.b1);
  const double r2 = detail::ratio_or_inf(k.c2 - 1.0, k.b2);
  const double r3 = detail::ratio_or_inf(k.c3, k.b3);
  k.c0 = std::min(r1, r2);
  k.c_star = std::min(k.c0, r3);
  k.c_star_max = std::max({r1, r2, r3});
  k.c_star_variants_differ = k.c_star != k.c_star_max;
  k.theta = std::sqrt(1.0 - k.c1 * k.c1 / (3.0 * k.c1 * k.c2 + 9.0 * k.c3 * k.c3));
  return k;
}

struct IntervalReport {
  double min = 0.0;
  double max = 0.0;
  bool pass = false;
};

inline constexpr std::size_t kTauSpectrumGuard = 1024;

/// Generalized eigenvalues of (S, tau(S)); Lemma-level claim: all inside (1/2, 3/2).
inline IntervalReport tau_spectrum_check(Scheme scheme, double gamma, std::size_t m) {
  detail::guard(m, kTauSpectrumGuard, "tau_spectrum_check");
  const ToeplitzSymbol sym(make_coefficients(scheme, gamma, m).values());
  const Eigen::MatrixXd s = toeplitz_dense(sym);
  const Eigen::MatrixXd tau = tau_matrix_dense(sym);
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> ges(s, tau, Eigen::EigenvaluesOnly);
  IntervalReport r;
  r.min = ges.eigenvalues().minCoeff();
  r.max = ges.eigenvalues().maxCoeff();
  r.pass = r.min > 0.5 && r.max < 1.5;
  return r;
}

struct CommutatorReport {
  double norm = 0.0;    // ||Delta_S(Z)||_2
  double bound = 0.0;   // mu_gamma(||s||_D, b~, b^) / (M+1)^gamma
  double scaled = 0.0;  // norm * (M+1)^gamma
  bool pass = false;
};

inline double mu_gamma(double x, double y, double z, double gamma) { return x * y * y / (2.0 * z * (2.0 - gamma)); }

inline constexpr std::size_t kCommutatorGuard = 512;

/// ||Z S + S Z - 2 Z^{1/2} S Z^{1/2}||_2 against its decay bound, Z = diag(z).
inline CommutatorReport commutator_bound_check(std::span<const double> z, Scheme scheme, double gamma,
                                               std::size_t norm_prefix = kDefaultNormPrefix) {
  const std::size_t m = z.size();
  detail::require(m >= 1, "commutator_bound_check: empty diagonal");
  detail::guard(m, kCommutatorGuard, "commutator_bound_check");
  for (double v : z) detail::require(v > 0.0, "commutator_bound_check: diagonal entries must be positive");
  const auto seq = make_coefficients(scheme, gamma, std::max(m, norm_prefix));
  Eigen::MatrixXd delta(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(m));
  double grad = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    if (i + 1 < m) grad = std::max(grad, std::abs(z[i + 1] - z[i]));
    for (std::size_t j = 0; j < m; ++j) {
      const double d = std::sqrt(z[i]) - std::sqrt(z[j]);
      delta(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = d * d * seq[i > j ? i - j : j - i];
    }
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(delta, Eigen::EigenvaluesOnly);
  CommutatorReport r;
  r.norm = es.eigenvalues().cwiseAbs().maxCoeff();
  const double scale = std::pow(static_cast<double>(m + 1), gamma);
  const double b_tilde = static_cast<double>(m + 1) * grad;
  const double b_check = *std::min_element(z.begin(), z.end());
  r.bound = b_tilde == 0.0 ? 0.0 : mu_gamma(d_gamma_norm_proxy(seq), b_tilde, b_check, gamma) / scale;
  r.scaled = r.norm * scale;
  r.pass = r.norm <= r.bound * (1.0 + 1e-12) + 1e-14;
  return r;
}

struct PreconditionedSpectrumReport {
  SymmetricSplitSpectrum spectrum;  // of P^{-1/2} A P^{-1/2}
  double lower_bound = 0.0;         // c1/2
  double upper_bound = 0.0;         // 3 c2/2
  double skew_bound = 0.0;          // 3 c3/2
  bool hypothesis_met = false;      // dt <= c_star
  bool pass = false;
  ConvergenceConstants constants;
};

/// Dense P^{-1/2} A P^{-1/2} (fractional powers taken in the sine basis).
inline Eigen::MatrixXd symmetrized_preconditioned_dense(const SfdeOperator& op, const TauPreconditioner& p) {
  detail::guard(op.size(), kDenseEigenGuard, "symmetrized_preconditioned_dense");
  const auto n = static_cast<Eigen::Index>(op.size());
  Eigen::MatrixXd a = materialize_dense(op);
  Eigen::MatrixXd b(n, n);
  std::vector<double> col(op.size()), out(op.size());
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index i = 0; i < n; ++i) col[i] = a(i, j);
    p.apply_power(col, out, -0.5);
    for (Eigen::Index i = 0; i < n; ++i) b(i, j) = out[i];
  }
  // (P^{-1/2} A) P^{-1/2} = (P^{-1/2} (P^{-1/2} A)^T)^T since P^{-1/2} is symmetric.
  Eigen::MatrixXd c(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index i = 0; i < n; ++i) col[i] = b(j, i);
    p.apply_power(col, out, -0.5);
    for (Eigen::Index i = 0; i < n; ++i) c(j, i) = out[i];
  }
  return c;
}

inline PreconditionedSpectrumReport preconditioned_spectrum_check(const ProblemSpec& spec, Scheme scheme) {
  PreconditionedSpectrumReport r;
  r.constants = convergence_constants(spec, scheme);
  r.hypothesis_met = spec.dt() <= r.constants.c_star;
  const auto op = build_operator(spec.discretization(scheme));
  const auto p = build_tau(op);
  r.spectrum = symmetric_split_spectrum(symmetrized_preconditioned_dense(op, p));
  r.lower_bound = r.constants.c1 / 2.0;
  r.upper_bound = 1.5 * r.constants.c2;
  r.skew_bound = 1.5 * r.constants.c3;
  r.pass = r.spectrum.lambda_min >= r.lower_bound && r.spectrum.lambda_max <= r.upper_bound &&
           r.spectrum.skew_radius <= r.skew_bound;
  return r;
}

struct RateReport {
  ConvergenceConstants constants;
  double dt = 0.0;
  bool hypothesis_met = false;
  double worst_root = 0.0;  // max over steps and k of (||r_k|| / ||r^_0||)^{1/k}
  std::size_t steps = 0;
  bool pass = false;
};

/// Runs the time-stepping loop with the tau preconditioner and checks every GMRES
/// residual against theta^k ||P^{-1/2}(b - A u_0)||.
inline RateReport theorem_rate_check(const ProblemSpec& spec, Scheme scheme, const SolverConfig& cfg = {}) {
  RateReport r;
  r.constants = convergence_constants(spec, scheme);
  r.dt = spec.dt();
  r.hypothesis_met = r.dt <= r.constants.c_star;
  const auto disc = spec.discretization(scheme);
  const auto op = build_operator(disc);
  const auto p = build_tau(op);
  const auto& geo = disc.geometry;
  std::vector<double> u = geo.sample(spec.initial), b(u.size()), res(u.size()), tmp(u.size());
  const double theta = r.constants.theta;
  bool ok = theta > 0.0 && theta < 1.0;
  for (std::size_t n = 1; n <= spec.time_steps; ++n) {
    const double t = static_cast<double>(n) * r.dt;
    const auto f = geo.sample([&](std::span<const double> x) { return spec.source(x, t); });
    for (std::size_t i = 0; i < b.size(); ++i) b[i] = u[i] + r.dt * f[i];
    op.apply(u, res);
    for (std::size_t i = 0; i < b.size(); ++i) res[i] = b[i] - res[i];
    p.apply_power(res, tmp, -0.5);
    const double r0_hat = detail::norm2(tmp);
    auto out = gmres([&](auto x, auto y) { op.apply(x, y); }, [&](auto x, auto y) { p.apply_inverse(x, y); }, b,
                     u, cfg);
    for (std::size_t k = 1; k < out.residual_norms.size(); ++k) {
      const double ratio = out.residual_norms[k] / r0_hat;
      r.worst_root = std::max(r.worst_root, std::pow(ratio, 1.0 / static_cast<double>(k)));
      if (out.residual_norms[k] > std::pow(theta, static_cast<double>(k)) * r0_hat * (1.0 + 1e-10)) ok = false;
    }
    u = std::move(out.solution);
    ++r.steps;
  }
  r.pass = ok;
  return r;
}

}  // namespace tausfde

#endif  // TAUSFDE_ANALYSIS_HPP
