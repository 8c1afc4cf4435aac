#ifndef TAUSFDE_REPORT_HPP
#define TAUSFDE_REPORT_HPP

// Benchmark configuration and the CSV/JSON report formats (see docs/report_schema.md).

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "tausfde/errors.hpp"

namespace tausfde {

using Json = nlohmann::ordered_json;

struct RunConfig {
  std::string problem = "example1";  // example1 | example2 | custom
  std::string problem_file;          // JSON description when problem == custom
  std::vector<std::vector<double>> orders;
  std::vector<int> grid_exp = {8};   // M + 1 = 2^p
  std::vector<int> time_exp = {4};   // N = 2^q
  std::string scheme = "centered";
  std::vector<std::string> preconditioners = {"tau"};
  double tol = 1e-7;
  std::optional<std::size_t> restart;
  std::size_t max_iters = 500;
  std::uint64_t seed = 1;
  std::string out;                   // prefix for <out>.csv / <out>.json; empty = stdout only

  std::size_t expected_rank() const { return problem == "example2" ? 3 : 2; }

  void validate() const {
    detail::require(problem == "example1" || problem == "example2" || problem == "custom",
                    "unknown problem '" + problem + "'");
    detail::require(problem != "custom" || !problem_file.empty(), "problem 'custom' needs a problem file");
    detail::require(!orders.empty(), "at least one order tuple is required");
    for (const auto& o : orders) {
      if (problem != "custom") {
        detail::require(o.size() == expected_rank(), problem + " needs " + std::to_string(expected_rank()) +
                                                         " fractional orders per tuple");
      }
      for (double a : o) detail::require(a > 1.0 && a < 2.0, "fractional orders must lie in (1,2)");
    }
    detail::require(!grid_exp.empty() && !time_exp.empty(), "grid and time exponents are required");
    for (int p : grid_exp) detail::require(p >= 1 && p <= 14, "grid exponent must lie in [1,14]");
    for (int q : time_exp) detail::require(q >= 0 && q <= 20, "time exponent must lie in [0,20]");
    detail::require(tol > 0.0 && tol < 1.0, "tol must lie in (0,1)");
    detail::require(!preconditioners.empty(), "at least one preconditioner is required");
    detail::require(max_iters > 0, "max_iters must be positive");
    detail::require(!restart || *restart > 0, "restart must be positive");
  }
};

inline std::vector<std::vector<double>> parse_order_tuples(const Json& j) {
  std::vector<std::vector<double>> out;
  if (!j.is_array()) throw DomainError("'orders' must be an array");
  if (!j.empty() && j.front().is_number()) {
    out.push_back(j.get<std::vector<double>>());
  } else {
    for (const auto& t : j) out.push_back(t.get<std::vector<double>>());
  }
  return out;
}

/// Overlays the fields of a flat JSON object onto `cfg`. Unknown keys are rejected.
inline void apply_config_json(RunConfig& cfg, const Json& j) {
  if (!j.is_object()) throw DomainError("config must be a JSON object");
  // A benchmark report replays its recorded config.
  if (j.value("kind", "") == "benchmark" && j.contains("config")) return apply_config_json(cfg, j.at("config"));
  for (const auto& [key, v] : j.items()) {
    if (key == "problem") cfg.problem = v.get<std::string>();
    else if (key == "problem_file") cfg.problem_file = v.get<std::string>();
    else if (key == "orders") cfg.orders = parse_order_tuples(v);
    else if (key == "grid_exp") cfg.grid_exp = v.is_array() ? v.get<std::vector<int>>() : std::vector<int>{v.get<int>()};
    else if (key == "time_exp") cfg.time_exp = v.is_array() ? v.get<std::vector<int>>() : std::vector<int>{v.get<int>()};
    else if (key == "scheme") cfg.scheme = v.get<std::string>();
    else if (key == "preconditioners" || key == "precond")
      cfg.preconditioners = v.is_array() ? v.get<std::vector<std::string>>() : std::vector<std::string>{v.get<std::string>()};
    else if (key == "tol") cfg.tol = v.get<double>();
    else if (key == "restart") {
      if (v.is_null()) cfg.restart.reset();
      else cfg.restart = v.get<std::size_t>();
    }
    else if (key == "max_iters") cfg.max_iters = v.get<std::size_t>();
    else if (key == "seed") cfg.seed = v.get<std::uint64_t>();
    else if (key == "out") cfg.out = v.get<std::string>();
    else throw DomainError("unknown config key '" + key + "'");
  }
}

inline Json config_to_json(const RunConfig& cfg) {
  Json j;
  j["problem"] = cfg.problem;
  if (!cfg.problem_file.empty()) j["problem_file"] = cfg.problem_file;
  j["orders"] = cfg.orders;
  j["grid_exp"] = cfg.grid_exp;
  j["time_exp"] = cfg.time_exp;
  j["scheme"] = cfg.scheme;
  j["preconditioners"] = cfg.preconditioners;
  j["tol"] = cfg.tol;
  j["restart"] = cfg.restart ? Json(*cfg.restart) : Json(nullptr);
  j["max_iters"] = cfg.max_iters;
  j["seed"] = cfg.seed;
  return j;
}

/// One (orders, N, M+1, preconditioner) cell.
struct BenchmarkRow {
  std::string problem;
  std::string scheme;
  std::string preconditioner;
  std::vector<double> orders;
  std::size_t n = 0;
  std::size_t m_plus_1 = 0;
  double iter_mean = 0.0;
  std::vector<std::size_t> iterations;
  double build_seconds = 0.0;
  double cpu_seconds = 0.0;
  std::optional<double> e_mn;
  bool converged = true;
  std::vector<std::string> failures;
};

inline std::string format_orders(const std::vector<double>& orders) {
  std::ostringstream s;
  s << '(';
  for (std::size_t i = 0; i < orders.size(); ++i) s << (i ? "," : "") << orders[i];
  s << ')';
  return s.str();
}

inline std::string format_fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

inline constexpr const char* kCsvHeader =
    "problem,scheme,preconditioner,orders,N,M_plus_1,iter_mean,cpu_seconds,E_MN,converged";

inline void write_csv(std::ostream& os, const std::vector<BenchmarkRow>& rows) {
  os << kCsvHeader << '\n';
  for (const auto& r : rows) {
    char err[64] = "";
    if (r.e_mn) std::snprintf(err, sizeof err, "%.6e", *r.e_mn);
    os << r.problem << ',' << r.scheme << ',' << r.preconditioner << ",\"" << format_orders(r.orders) << "\","
       << r.n << ',' << r.m_plus_1 << ',' << format_fixed(r.iter_mean, 1) << ',' << format_fixed(r.cpu_seconds, 3)
       << ',' << err << ',' << (r.converged ? "true" : "false") << '\n';
  }
}

inline Json row_to_json(const BenchmarkRow& r) {
  Json j;
  j["problem"] = r.problem;
  j["scheme"] = r.scheme;
  j["preconditioner"] = r.preconditioner;
  j["orders"] = r.orders;
  j["N"] = r.n;
  j["M_plus_1"] = r.m_plus_1;
  j["iter_mean"] = std::round(r.iter_mean * 10.0) / 10.0;
  j["iterations"] = r.iterations;
  j["E_MN"] = r.e_mn ? Json(*r.e_mn) : Json(nullptr);
  j["converged"] = r.converged;
  j["failures"] = r.failures;
  j["timing"] = {{"build_seconds", r.build_seconds}, {"cpu_seconds", r.cpu_seconds}};
  return j;
}

inline Json benchmark_report(const RunConfig& cfg, const std::vector<BenchmarkRow>& rows) {
  Json j;
  j["kind"] = "benchmark";
  j["schema_version"] = 1;
  j["config"] = config_to_json(cfg);
  j["rows"] = Json::array();
  bool all = true;
  for (const auto& r : rows) {
    j["rows"].push_back(row_to_json(r));
    all = all && r.converged;
  }
  j["all_converged"] = all;
  return j;
}

/// Plain-text table, iterations to one decimal.
inline void write_table(std::ostream& os, const std::vector<BenchmarkRow>& rows) {
  char line[256];
  std::snprintf(line, sizeof line, "%-18s %-10s %6s %7s %6s %10s %12s %s\n", "orders", "precond", "N", "M+1",
                "iter", "cpu(s)", "E_MN", "ok");
  os << line;
  for (const auto& r : rows) {
    char err[32] = "-";
    if (r.e_mn) std::snprintf(err, sizeof err, "%.3e", *r.e_mn);
    std::snprintf(line, sizeof line, "%-18s %-10s %6zu %7zu %6.1f %10.3f %12s %s\n", format_orders(r.orders).c_str(),
                  r.preconditioner.c_str(), r.n, r.m_plus_1, r.iter_mean, r.cpu_seconds, err,
                  r.converged ? "yes" : "NO");
    os << line;
  }
}

/// One named invariant of the verification suite.
struct CheckResult {
  std::string name;
  bool pass = false;
  std::string detail;
};

inline Json verification_report(const std::vector<CheckResult>& checks, const std::vector<std::string>& notes,
                                std::uint64_t seed) {
  Json j;
  j["kind"] = "verification";
  j["schema_version"] = 1;
  j["seed"] = seed;
  j["checks"] = Json::array();
  bool all = true;
  for (const auto& c : checks) {
    j["checks"].push_back({{"name", c.name}, {"pass", c.pass}, {"detail", c.detail}});
    all = all && c.pass;
  }
  j["notes"] = notes;
  j["all_pass"] = all;
  return j;
}

}  // namespace tausfde

#endif  // TAUSFDE_REPORT_HPP
