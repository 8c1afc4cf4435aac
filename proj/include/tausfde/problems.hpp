#ifndef TAUSFDE_PROBLEMS_HPP
#define TAUSFDE_PROBLEMS_HPP

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <functional>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "tausfde/coefficients.hpp"
#include "tausfde/errors.hpp"
#include "tausfde/grid.hpp"
#include "tausfde/krylov.hpp"
#include "tausfde/operator.hpp"
#include "tausfde/preconditioners.hpp"

namespace tausfde {

using Field = std::function<double(std::span<const double>)>;
using SpaceTimeField = std::function<double(std::span<const double>, double)>;

/// f(x,t) = time_factor(t) * profile(x); lets the driver sample the profile once.
struct SeparableSource {
  std::function<double(double)> time_factor;
  Field profile;
};

struct ProblemSpec {
  std::string name;
  std::vector<double> lower;
  std::vector<double> upper;
  double final_time = 1.0;
  std::vector<double> orders;
  std::vector<Field> coefficients;
  SpaceTimeField source;
  std::optional<SeparableSource> separable_source;
  Field initial;
  std::optional<SpaceTimeField> exact;
  std::vector<std::size_t> interior;  // M_i interior points per axis
  std::size_t time_steps = 1;         // N

  std::size_t rank() const { return orders.size(); }
  double dt() const { return final_time / static_cast<double>(time_steps); }
  GridGeometry geometry() const { return {GridShape(interior), lower, upper}; }

  void validate() const {
    const std::size_t m = orders.size();
    detail::require(m >= 1, "ProblemSpec: at least one dimension");
    detail::require(lower.size() == m && upper.size() == m && coefficients.size() == m &&
                        interior.size() == m,
                    "ProblemSpec: orders, bounds, coefficients and grid sizes must agree in dimension");
    for (std::size_t i = 0; i < m; ++i) {
      detail::require(orders[i] > 1.0 && orders[i] < 2.0, "ProblemSpec: fractional orders must lie in (1,2)");
      detail::require(lower[i] < upper[i], "ProblemSpec: need l_i < r_i");
      detail::require(interior[i] >= 1, "ProblemSpec: grid sizes must be positive");
      detail::require(static_cast<bool>(coefficients[i]), "ProblemSpec: missing coefficient function");
    }
    detail::require(final_time > 0.0, "ProblemSpec: T must be positive");
    detail::require(time_steps >= 1, "ProblemSpec: N must be positive");
    detail::require(static_cast<bool>(source) || separable_source.has_value(), "ProblemSpec: missing source");
    detail::require(static_cast<bool>(initial), "ProblemSpec: missing initial condition");
  }

  Discretization discretization(Scheme scheme) const {
    validate();
    Discretization d{geometry(), orders, dt(), scheme, {}};
    for (const auto& c : coefficients) d.coefficients.push_back(d.geometry.sample(c));
    return d;
  }
};

namespace detail {

// Sum over i = 2..4 of C(2,i-2) L^{4-i} (-1)^i i! [z^{i-a} + (L-z)^{i-a}] / Gamma(i+1-a):
// the sum of the left and right Riemann-Liouville derivatives of z^2 (L-z)^2.
inline double two_sided_derivative_of_bump(double z, double a, double len) {
  static constexpr double binom[3] = {1.0, 2.0, 1.0};
  static constexpr double fact[3] = {2.0, 6.0, 24.0};
  double s = 0.0;
  for (int i = 2; i <= 4; ++i) {
    const double sign = (i % 2 == 0) ? 1.0 : -1.0;
    const double terms = std::pow(z, i - a) + std::pow(len - z, i - a);
    s += binom[i - 2] * std::pow(len, 4 - i) * sign * fact[i - 2] * terms / std::tgamma(i + 1.0 - a);
  }
  return s;
}

inline double bump(double z, double len) { return z * z * (len - z) * (len - z); }

inline double riesz_factor(double a) { return 1.0 / (2.0 * std::cos(a * std::numbers::pi / 2.0)); }

}  // namespace detail

/// 2-D problem on (0,2)^2, T = 1, exact solution e^{-t} x^2(2-x)^2 y^2(2-y)^2.
/// `literal_printed_source` reproduces a variant of the source with an extra
/// 1/Gamma(2-alpha) factor on each fractional term (not consistent with the exact solution).
inline ProblemSpec example1(double alpha, double beta, std::size_t m, std::size_t n,
                            bool literal_printed_source = false) {
  detail::require(alpha > 1.0 && alpha < 2.0 && beta > 1.0 && beta < 2.0,
                  "example1: fractional orders must lie in (1,2)");
  ProblemSpec p;
  p.name = "example1";
  p.lower = {0.0, 0.0};
  p.upper = {2.0, 2.0};
  p.final_time = 1.0;
  p.orders = {alpha, beta};
  p.interior = {m, m};
  p.time_steps = n;

  auto d = [alpha, beta](std::span<const double> x) {
    return 1.0 + std::pow(x[0], alpha) + std::pow(2.0 - x[0], alpha) + std::pow(x[1], beta) +
           std::pow(2.0 - x[1], beta);
  };
  auto e = [](std::span<const double> x) {
    return 2.0 + std::cos(std::numbers::pi * x[0] / 5.0) + std::cos(std::numbers::pi * x[1] / 5.0);
  };
  p.coefficients = {d, e};

  const double ka = detail::riesz_factor(alpha) / (literal_printed_source ? std::tgamma(2.0 - alpha) : 1.0);
  const double kb = detail::riesz_factor(beta) / (literal_printed_source ? std::tgamma(2.0 - beta) : 1.0);
  Field profile = [=](std::span<const double> x) {
    const double bx = detail::bump(x[0], 2.0), by = detail::bump(x[1], 2.0);
    return -bx * by + d(x) * by * ka * detail::two_sided_derivative_of_bump(x[0], alpha, 2.0) +
           e(x) * bx * kb * detail::two_sided_derivative_of_bump(x[1], beta, 2.0);
  };
  p.separable_source = SeparableSource{[](double t) { return std::exp(-t); }, profile};
  p.source = [profile](std::span<const double> x, double t) { return std::exp(-t) * profile(x); };
  p.initial = [](std::span<const double> x) { return detail::bump(x[0], 2.0) * detail::bump(x[1], 2.0); };
  p.exact = [](std::span<const double> x, double t) {
    return std::exp(-t) * detail::bump(x[0], 2.0) * detail::bump(x[1], 2.0);
  };
  return p;
}

/// 3-D problem on (0,1)^3, T = 1, exact solution e^{-t} prod x_i^2(1-x_i)^2.
inline ProblemSpec example2(double alpha1, double alpha2, double alpha3, std::size_t m, std::size_t n) {
  const std::vector<double> a = {alpha1, alpha2, alpha3};
  for (double ai : a) detail::require(ai > 1.0 && ai < 2.0, "example2: fractional orders must lie in (1,2)");
  ProblemSpec p;
  p.name = "example2";
  p.lower = {0.0, 0.0, 0.0};
  p.upper = {1.0, 1.0, 1.0};
  p.final_time = 1.0;
  p.orders = a;
  p.interior = {m, m, m};
  p.time_steps = n;

  auto d1 = [a](std::span<const double> x) {
    double s = 0.0;
    for (std::size_t i = 0; i < 3; ++i) s += std::pow(x[i], a[i]) * std::pow(1.0 - x[i], a[i]);
    return s;
  };
  auto d2 = [](std::span<const double> x) {
    double s = 2.0;
    for (std::size_t i = 0; i < 3; ++i) s += std::cos(std::numbers::pi * x[i] / 2.0);
    return s;
  };
  auto d3 = [](std::span<const double> x) { return 1.0 + x[0] * x[1] * x[2]; };
  p.coefficients = {d1, d2, d3};

  const std::vector<Field> coeff = p.coefficients;
  Field profile = [a, coeff](std::span<const double> x) {
    const double b[3] = {detail::bump(x[0], 1.0), detail::bump(x[1], 1.0), detail::bump(x[2], 1.0)};
    double s = -b[0] * b[1] * b[2];
    for (std::size_t j = 0; j < 3; ++j) {
      const double others = b[(j + 1) % 3] * b[(j + 2) % 3];
      s += coeff[j](x) * others * detail::riesz_factor(a[j]) *
           detail::two_sided_derivative_of_bump(x[j], a[j], 1.0);
    }
    return s;
  };
  p.separable_source = SeparableSource{[](double t) { return std::exp(-t); }, profile};
  p.source = [profile](std::span<const double> x, double t) { return std::exp(-t) * profile(x); };
  p.initial = [](std::span<const double> x) {
    return detail::bump(x[0], 1.0) * detail::bump(x[1], 1.0) * detail::bump(x[2], 1.0);
  };
  p.exact = [](std::span<const double> x, double t) {
    return std::exp(-t) * detail::bump(x[0], 1.0) * detail::bump(x[1], 1.0) * detail::bump(x[2], 1.0);
  };
  return p;
}

/// ||exact - computed||_inf / ||exact||_inf.
inline double relative_error(std::span<const double> exact, std::span<const double> computed) {
  detail::require_size(computed.size(), exact.size(), "relative_error");
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < exact.size(); ++i) {
    num = std::max(num, std::abs(exact[i] - computed[i]));
    den = std::max(den, std::abs(exact[i]));
  }
  if (den == 0.0) throw DomainError("relative_error: exact solution is identically zero");
  return num / den;
}

enum class PreconditionerKind { Tau, Circulant, None };

inline std::string_view preconditioner_name(PreconditionerKind k) {
  switch (k) {
    case PreconditionerKind::Tau: return "tau";
    case PreconditionerKind::Circulant: return "circulant";
    case PreconditionerKind::None: return "none";
  }
  return "unknown";
}

inline PreconditionerKind parse_preconditioner(std::string_view name) {
  if (name == "tau") return PreconditionerKind::Tau;
  if (name == "circulant" || name == "strang") return PreconditionerKind::Circulant;
  if (name == "none") return PreconditionerKind::None;
  throw DomainError("unknown preconditioner '" + std::string(name) + "'");
}

struct SolveReport {
  std::vector<std::size_t> iterations;              // per time step
  std::vector<std::vector<double>> residual_histories;
  std::vector<bool> step_converged;
  std::vector<std::string> failures;                // one message per failed step
  double mean_iterations = 0.0;
  std::optional<double> relative_error;             // E_MN at t = T
  bool converged = true;
  double build_seconds = 0.0;
  double solve_seconds = 0.0;                       // GMRES time summed over all steps
  std::vector<double> step_seconds;
  std::vector<double> solution;                     // u^N on the interior grid
};

namespace detail {

inline double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace detail

/// Backward-Euler sequence A u^n = u^{n-1} + dt f^n, n = 1..N, one GMRES solve per step.
inline SolveReport time_step_solve(const ProblemSpec& spec, Scheme scheme, PreconditionerKind kind,
                                   const SolverConfig& cfg, bool warm_start = true) {
  cfg.validate();
  SolveReport rep;
  const auto t_build = std::chrono::steady_clock::now();
  const auto disc = spec.discretization(scheme);
  const auto& geo = disc.geometry;
  const SfdeOperator op = build_operator(disc);
  std::optional<TauPreconditioner> tau;
  std::optional<CirculantPreconditioner> circ;
  if (kind == PreconditionerKind::Tau) tau.emplace(build_tau(op));
  if (kind == PreconditionerKind::Circulant) circ.emplace(build_strang_circulant(op, sampled_bounds(op)));
  std::vector<double> profile;
  if (spec.separable_source) profile = geo.sample(spec.separable_source->profile);
  std::vector<double> u = geo.sample(spec.initial);
  rep.build_seconds = detail::seconds_since(t_build);

  auto apply_a = [&op](std::span<const double> x, std::span<double> y) { op.apply(x, y); };
  auto apply_pinv = [&](std::span<const double> x, std::span<double> y) {
    if (tau) tau->apply_inverse(x, y);
    else if (circ) circ->apply_inverse(x, y);
    else std::copy(x.begin(), x.end(), y.begin());
  };

  const double dt = spec.dt();
  const std::vector<double> zeros(u.size(), 0.0);
  std::vector<double> b(u.size());
  for (std::size_t n = 1; n <= spec.time_steps; ++n) {
    const double t = static_cast<double>(n) * dt;
    if (spec.separable_source) {
      const double w = dt * spec.separable_source->time_factor(t);
      for (std::size_t p = 0; p < b.size(); ++p) b[p] = u[p] + w * profile[p];
    } else {
      const auto f = geo.sample([&](std::span<const double> x) { return spec.source(x, t); });
      for (std::size_t p = 0; p < b.size(); ++p) b[p] = u[p] + dt * f[p];
    }
    const auto t_step = std::chrono::steady_clock::now();
    try {
      auto res = gmres(apply_a, apply_pinv, b, warm_start ? std::span<const double>(u) : zeros, cfg);
      rep.iterations.push_back(res.iterations);
      rep.residual_histories.push_back(std::move(res.residual_norms));
      rep.step_converged.push_back(res.converged);
      if (!res.converged) {
        rep.failures.push_back("step " + std::to_string(n) + ": no convergence within " +
                               std::to_string(cfg.max_iters) + " iterations");
      }
      u = std::move(res.solution);
    } catch (const std::exception& ex) {
      rep.iterations.push_back(0);
      rep.residual_histories.emplace_back();
      rep.step_converged.push_back(false);
      rep.failures.push_back("step " + std::to_string(n) + ": " + ex.what());
    }
    rep.step_seconds.push_back(detail::seconds_since(t_step));
    rep.solve_seconds += rep.step_seconds.back();
  }

  double total = 0.0;
  for (auto k : rep.iterations) total += static_cast<double>(k);
  rep.mean_iterations = total / static_cast<double>(spec.time_steps);
  rep.converged = rep.failures.empty();
  if (spec.exact) {
    const auto ex = geo.sample([&](std::span<const double> x) { return (*spec.exact)(x, spec.final_time); });
    bool nonzero = std::any_of(ex.begin(), ex.end(), [](double v) { return v != 0.0; });
    if (nonzero) rep.relative_error = relative_error(ex, u);
  }
  rep.solution = std::move(u);
  return rep;
}

}  // namespace tausfde

#endif  // TAUSFDE_PROBLEMS_HPP
