#ifndef TAUSFDE_BENCH_HPP
#define TAUSFDE_BENCH_HPP

// Drivers behind the command-line tool: benchmark sweeps and the verification suite.

#include <Eigen/Dense>

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <optional>
#include <ostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "tausfde/analysis.hpp"
#include "tausfde/coefficients.hpp"
#include "tausfde/errors.hpp"
#include "tausfde/operator.hpp"
#include "tausfde/preconditioners.hpp"
#include "tausfde/problems.hpp"
#include "tausfde/report.hpp"

namespace tausfde {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitFailed = 2;

namespace detail {

// {"constant": c} or {"affine": [c0, c1, ..., cm]} meaning c0 + sum c_i x_i.
inline Field field_from_json(const Json& j, std::size_t rank, const std::string& what) {
  if (j.is_number()) {
    const double c = j.get<double>();
    return [c](std::span<const double>) { return c; };
  }
  if (j.contains("constant")) {
    const double c = j.at("constant").get<double>();
    return [c](std::span<const double>) { return c; };
  }
  if (j.contains("affine")) {
    const auto a = j.at("affine").get<std::vector<double>>();
    if (a.size() != rank + 1) throw DomainError(what + ": affine field needs " + std::to_string(rank + 1) + " numbers");
    return [a](std::span<const double> x) {
      double s = a[0];
      for (std::size_t i = 0; i < x.size(); ++i) s += a[i + 1] * x[i];
      return s;
    };
  }
  throw DomainError(what + ": expected {\"constant\": c} or {\"affine\": [...]}");
}

}  // namespace detail

/// Problem described by a JSON file: box bounds, final time, coefficient, source and
/// initial fields (constant or affine). No exact solution.
inline ProblemSpec custom_problem_from_json(const Json& j, const std::vector<double>& orders, std::size_t m,
                                            std::size_t n) {
  ProblemSpec p;
  p.name = "custom";
  p.lower = j.at("lower").get<std::vector<double>>();
  p.upper = j.at("upper").get<std::vector<double>>();
  const std::size_t rank = p.lower.size();
  detail::require(orders.size() == rank, "custom problem: number of orders must match the domain dimension");
  p.orders = orders;
  p.final_time = j.value("final_time", 1.0);
  const auto& coeffs = j.at("coefficients");
  detail::require(coeffs.is_array() && coeffs.size() == rank, "custom problem: one coefficient per dimension");
  for (std::size_t i = 0; i < rank; ++i) {
    p.coefficients.push_back(detail::field_from_json(coeffs[i], rank, "coefficient " + std::to_string(i + 1)));
  }
  Field src = detail::field_from_json(j.value("source", Json(0.0)), rank, "source");
  p.separable_source = SeparableSource{[](double) { return 1.0; }, src};
  p.source = [src](std::span<const double> x, double) { return src(x); };
  p.initial = detail::field_from_json(j.value("initial", Json(0.0)), rank, "initial");
  p.interior.assign(rank, m);
  p.time_steps = n;
  p.validate();
  return p;
}

inline ProblemSpec make_problem(const RunConfig& cfg, const std::vector<double>& orders, std::size_t m,
                                std::size_t n) {
  if (cfg.problem == "example1") return example1(orders.at(0), orders.at(1), m, n);
  if (cfg.problem == "example2") return example2(orders.at(0), orders.at(1), orders.at(2), m, n);
  std::ifstream in(cfg.problem_file);
  if (!in) throw DomainError("cannot open problem file '" + cfg.problem_file + "'");
  Json j;
  try {
    j = Json::parse(in);
  } catch (const Json::exception& ex) {
    throw DomainError(std::string("problem file is not valid JSON: ") + ex.what());
  }
  return custom_problem_from_json(j, orders, m, n);
}

struct BenchmarkOutcome {
  std::vector<BenchmarkRow> rows;
  int exit_code = kExitOk;
};

/// Runs every (orders, N, M+1, preconditioner) cell of the configuration.
inline BenchmarkOutcome run_benchmark(const RunConfig& cfg, std::ostream& log) {
  cfg.validate();
  const Scheme scheme = parse_scheme(cfg.scheme);
  std::vector<PreconditionerKind> kinds;
  for (const auto& name : cfg.preconditioners) kinds.push_back(parse_preconditioner(name));
  SolverConfig solver;
  solver.tol_rel = cfg.tol;
  solver.max_iters = cfg.max_iters;
  solver.restart = cfg.restart;

  BenchmarkOutcome out;
  for (const auto& orders : cfg.orders) {
    for (int q : cfg.time_exp) {
      for (int p : cfg.grid_exp) {
        const std::size_t n = std::size_t{1} << q;
        const std::size_t m1 = std::size_t{1} << p;
        const auto spec = make_problem(cfg, orders, m1 - 1, n);
        for (auto kind : kinds) {
          BenchmarkRow row;
          row.problem = cfg.problem;
          row.scheme = std::string(scheme_name(scheme));
          row.preconditioner = std::string(preconditioner_name(kind));
          row.orders = orders;
          row.n = n;
          row.m_plus_1 = m1;
          try {
            const auto rep = time_step_solve(spec, scheme, kind, solver);
            row.iter_mean = rep.mean_iterations;
            row.iterations = rep.iterations;
            row.build_seconds = rep.build_seconds;
            row.cpu_seconds = rep.solve_seconds;
            row.e_mn = rep.relative_error;
            row.converged = rep.converged;
            row.failures = rep.failures;
          } catch (const std::exception& ex) {
            row.converged = false;
            row.failures.push_back(ex.what());
          }
          if (!row.converged) {
            out.exit_code = kExitFailed;
            for (const auto& f : row.failures) log << "warning: " << format_orders(orders) << " N=" << n
                                                   << " M+1=" << m1 << ' ' << row.preconditioner << ": " << f << '\n';
          }
          out.rows.push_back(std::move(row));
        }
      }
    }
  }
  return out;
}

struct VerifyConfig {
  std::vector<double> gammas = {1.1, 1.3, 1.5, 1.7, 1.9};
  std::size_t prefix = 4096;
  std::vector<double> spectrum_gammas = {1.1, 1.5, 1.9};
  std::vector<std::size_t> spectrum_sizes = {8, 64, 512};
  std::uint64_t seed = 1;
  std::optional<std::size_t> corrupt_coefficient;  // test hook: flips the sign of s_k at this index
};

namespace detail {

inline std::string fmt(double v) {
  std::ostringstream s;
  s.precision(6);
  s << v;
  return s.str();
}

inline double rel_inf_error(std::span<const double> a, std::span<const double> b) {
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    num = std::max(num, std::abs(a[i] - b[i]));
    den = std::max(den, std::abs(b[i]));
  }
  return den == 0.0 ? num : num / den;
}

/// Random operator with the given dims: random orders, eta and positive coefficients.
inline SfdeOperator random_operator(const GridShape& shape, Scheme scheme, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> order(1.05, 1.95), eta(0.1, 20.0), coef(0.5, 3.0);
  std::vector<double> etas;
  std::vector<ToeplitzSymbol> syms;
  std::vector<std::vector<double>> diags;
  for (std::size_t i = 0; i < shape.rank(); ++i) {
    etas.push_back(eta(rng));
    syms.emplace_back(make_coefficients(scheme, order(rng), shape.dim(i)).values());
    std::vector<double> d(shape.size());
    for (double& x : d) x = coef(rng);
    diags.push_back(std::move(d));
  }
  return SfdeOperator(shape, std::move(etas), std::move(syms), std::move(diags));
}

inline std::vector<double> random_vector(std::size_t n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<double> v(n);
  for (double& x : v) x = u(rng);
  return v;
}

}  // namespace detail

inline constexpr double kNearTwoThreshold = 1.95;

/// Property checks on coefficient sequences, with the optional corruption hook applied.
inline void verify_coefficients(const VerifyConfig& cfg, std::vector<CheckResult>& checks,
                                std::vector<std::string>& notes) {
  for (Scheme scheme : {Scheme::CenteredDifference, Scheme::ShiftedGrunwald, Scheme::CubicSpline}) {
    for (double g : cfg.gammas) {
      auto seq = make_coefficients(scheme, g, cfg.prefix);
      if (cfg.corrupt_coefficient && *cfg.corrupt_coefficient < seq.size()) {
        auto v = seq.values();
        v[*cfg.corrupt_coefficient] = -v[*cfg.corrupt_coefficient] + (*cfg.corrupt_coefficient == 0 ? 0.0 : 1e-3);
        seq = CoefficientSequence(scheme, g, std::move(v));
      }
      const double growth = g >= kNearTwoThreshold ? 2.0 : 1.25;
      if (g >= kNearTwoThreshold && scheme == Scheme::CenteredDifference) {
        notes.push_back("gamma=" + detail::fmt(g) + " is near 2: decay check uses growth tolerance " +
                        detail::fmt(growth) + " instead of 1.25");
      }
      const auto rep = validate_properties(seq, growth);
      CheckResult c;
      c.name = "coefficients/" + std::string(scheme_name(scheme)) + "/gamma=" + detail::fmt(g);
      c.pass = rep.all_pass() && rep.scaled_sum_bounded_below;
      if (c.pass) {
        c.detail = "decay constant " + detail::fmt(rep.decay_constant) + ", min scaled sum " +
                   detail::fmt(rep.min_scaled_sum);
      } else {
        const std::string failed = rep.first_failed().empty() ? "scaled_sum_bounded_below" : rep.first_failed();
        c.detail = "failed property " + failed;
        const PropertyCheck* pc = failed == "decay"              ? &rep.decay
                                  : failed == "leading_positive" ? &rep.leading_positive
                                  : failed == "tail_nonpositive" ? &rep.tail_nonpositive
                                  : failed == "scaled_sums"      ? &rep.scaled_sums
                                  : failed == "monotone_tail"    ? &rep.monotone_tail
                                                                 : nullptr;
        if (pc && pc->first_failure) c.detail += " at index " + std::to_string(*pc->first_failure);
      }
      checks.push_back(std::move(c));
    }
  }
}

inline std::vector<CheckResult> run_verification(const VerifyConfig& cfg, std::vector<std::string>& notes) {
  std::vector<CheckResult> checks;
  std::mt19937_64 rng(cfg.seed);
  verify_coefficients(cfg, checks, notes);

  for (Scheme scheme : {Scheme::CenteredDifference, Scheme::ShiftedGrunwald, Scheme::CubicSpline}) {
    for (double g : cfg.spectrum_gammas) {
      for (std::size_t m : cfg.spectrum_sizes) {
        const auto r = tau_spectrum_check(scheme, g, m);
        checks.push_back({"tau_spectrum/" + std::string(scheme_name(scheme)) + "/gamma=" + detail::fmt(g) +
                              "/M=" + std::to_string(m),
                          r.pass, "[" + detail::fmt(r.min) + ", " + detail::fmt(r.max) + "]"});
      }
    }
  }

  {
    bool ok = true;
    std::string detail;
    double prev = 0.0;
    for (std::size_t m : {32u, 64u, 128u, 256u}) {
      std::vector<double> z(m);
      for (std::size_t k = 0; k < m; ++k) z[k] = 2.0 + static_cast<double>(k + 1) / static_cast<double>(m + 1);
      const auto r = commutator_bound_check(z, Scheme::CenteredDifference, 1.5);
      ok = ok && r.pass && (prev == 0.0 || r.scaled <= 1.1 * prev);
      prev = r.scaled;
      detail += "M=" + std::to_string(m) + ": " + detail::fmt(r.norm) + "<=" + detail::fmt(r.bound) + "; ";
    }
    checks.push_back({"commutator_decay", ok, detail});
  }

  {
    double worst_inv = 0.0, worst_op = 0.0;
    const std::vector<GridShape> shapes = {GridShape{37}, GridShape{12, 9}, GridShape{6, 5, 7}};
    for (std::size_t trial = 0; trial < 6; ++trial) {
      const auto& shape = shapes[trial % shapes.size()];
      const auto op = detail::random_operator(shape, Scheme::CenteredDifference, rng);
      const auto v = detail::random_vector(shape.size(), rng);
      const Eigen::MatrixXd a = materialize_dense(op);
      const Eigen::VectorXd av = a * Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
      const auto mf = op.apply(v);
      worst_op = std::max(worst_op, detail::rel_inf_error(mf, std::span<const double>(av.data(), v.size())));

      const auto bounds = sampled_bounds(op);
      const auto p = build_tau(op, bounds);
      const Eigen::MatrixXd pd = tau_preconditioner_dense(op, bounds);
      const auto pv = p.apply_inverse(v);
      const Eigen::VectorXd back = pd * Eigen::Map<const Eigen::VectorXd>(pv.data(), static_cast<Eigen::Index>(v.size()));
      worst_inv = std::max(worst_inv, detail::rel_inf_error(std::span<const double>(back.data(), v.size()), v));
    }
    checks.push_back({"operator_matches_dense", worst_op <= 1e-10, "max rel error " + detail::fmt(worst_op)});
    checks.push_back({"tau_inverse_exact", worst_inv <= 1e-10, "max rel error " + detail::fmt(worst_inv)});
  }

  {
    const auto spec = example1(1.5, 1.9, 31, 16);
    const auto k = convergence_constants(spec, Scheme::CenteredDifference);
    checks.push_back({"convergence_rate_constant", k.theta > 0.0 && k.theta < 1.0 && k.c_star > 0.0,
                      "theta=" + detail::fmt(k.theta) + " c_star=" + detail::fmt(k.c_star)});
    if (k.c_star_variants_differ) {
      notes.push_back("c_star: min-form " + detail::fmt(k.c_star) + " vs max-form " + detail::fmt(k.c_star_max) +
                      "; the min-form is used");
    }
    std::size_t n = 1;
    while (spec.final_time / static_cast<double>(n) > k.c_star && n < (std::size_t{1} << 16)) n *= 2;
    const auto small = example1(1.5, 1.9, 15, n);
    const auto ps = preconditioned_spectrum_check(small, Scheme::CenteredDifference);
    checks.push_back({"preconditioned_spectrum", ps.pass && ps.hypothesis_met,
                      "H in [" + detail::fmt(ps.spectrum.lambda_min) + ", " + detail::fmt(ps.spectrum.lambda_max) +
                          "] vs [" + detail::fmt(ps.lower_bound) + ", " + detail::fmt(ps.upper_bound) +
                          "], skew " + detail::fmt(ps.spectrum.skew_radius) + " <= " + detail::fmt(ps.skew_bound)});
  }
  return checks;
}

}  // namespace tausfde

#endif  // TAUSFDE_BENCH_HPP
