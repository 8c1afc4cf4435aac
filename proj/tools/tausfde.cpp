// Benchmark and verification harness.
//
//   tausfde solve  --problem example1 --orders 1.5,1.9 --grid-exp 8 --time-exp 4 --precond tau,circulant
//   tausfde verify [--gamma 1.999] [--out report]

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "tausfde/bench.hpp"
#include "tausfde/report.hpp"

namespace {

using namespace tausfde;

std::vector<double> parse_tuple(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != item.size()) throw DomainError("cannot parse order '" + item + "'");
    out.push_back(v);
  }
  if (out.empty()) throw DomainError("empty order tuple");
  return out;
}

Json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DomainError("cannot open '" + path + "'");
  try {
    return Json::parse(in);
  } catch (const Json::exception& ex) {
    throw DomainError("'" + path + "' is not valid JSON: " + ex.what());
  }
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw DomainError("cannot write '" + path + "'");
  out << text;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Tau-preconditioned GMRES for Riesz space-fractional diffusion: benchmarks and checks"};
  app.require_subcommand(1);

  auto* solve = app.add_subcommand("solve", "run a benchmark sweep and emit CSV/JSON reports");
  std::string config_path, problem, problem_file, scheme, out;
  std::vector<std::string> orders_raw, precond;
  std::vector<int> grid_exp, time_exp;
  double tol = 0.0;
  std::size_t restart = 0, max_iters = 0;
  std::uint64_t seed = 0;
  auto* o_config = solve->add_option("--config", config_path, "flat JSON config; flags override its values");
  auto* o_problem = solve->add_option("--problem", problem, "example1 | example2 | custom");
  auto* o_pfile = solve->add_option("--problem-file", problem_file, "JSON problem for --problem custom");
  auto* o_orders = solve->add_option("--orders", orders_raw, "order tuple(s), e.g. 1.5,1.9 (repeatable)");
  auto* o_grid = solve->add_option("--grid-exp", grid_exp, "p in M+1 = 2^p (list)")->delimiter(',');
  auto* o_time = solve->add_option("--time-exp", time_exp, "q in N = 2^q (list)")->delimiter(',');
  auto* o_scheme = solve->add_option("--scheme", scheme, "centered | grunwald | spline");
  auto* o_precond = solve->add_option("--precond", precond, "tau, circulant, none (list)")->delimiter(',');
  auto* o_tol = solve->add_option("--tol", tol, "relative GMRES tolerance");
  auto* o_restart = solve->add_option("--restart", restart, "GMRES restart length (default: none)");
  auto* o_maxit = solve->add_option("--max-iters", max_iters, "GMRES iteration cap per step");
  auto* o_seed = solve->add_option("--seed", seed, "seed recorded in the report");
  auto* o_out = solve->add_option("--out", out, "write <out>.csv and <out>.json");

  auto* verify = app.add_subcommand("verify", "run the invariant suite; nonzero exit on any failure");
  std::vector<double> gammas;
  std::size_t prefix = 0;
  std::uint64_t vseed = 1;
  std::string vout;
  std::size_t corrupt = 0;
  auto* o_gamma = verify->add_option("--gamma", gammas, "fractional orders for the coefficient checks")->delimiter(',');
  auto* o_prefix = verify->add_option("--prefix", prefix, "coefficient prefix length (default 4096)");
  verify->add_option("--seed", vseed, "seed for the randomized checks");
  verify->add_option("--out", vout, "write <out>.json");
  auto* o_corrupt = verify->add_option("--corrupt-coefficient", corrupt)->group("");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  if (solve->parsed()) {
    RunConfig cfg;
    try {
      if (*o_config) apply_config_json(cfg, read_json_file(config_path));
      if (*o_problem) cfg.problem = problem;
      if (*o_pfile) cfg.problem_file = problem_file;
      if (*o_orders) {
        cfg.orders.clear();
        for (const auto& t : orders_raw) cfg.orders.push_back(parse_tuple(t));
      }
      if (*o_grid) cfg.grid_exp = grid_exp;
      if (*o_time) cfg.time_exp = time_exp;
      if (*o_scheme) cfg.scheme = scheme;
      if (*o_precond) cfg.preconditioners = precond;
      if (*o_tol) cfg.tol = tol;
      if (*o_restart) cfg.restart = restart;
      if (*o_maxit) cfg.max_iters = max_iters;
      if (*o_seed) cfg.seed = seed;
      if (*o_out) cfg.out = out;
      if (cfg.orders.empty()) {
        cfg.orders = {cfg.problem == "example2" ? std::vector<double>{1.1, 1.9, 1.5} : std::vector<double>{1.5, 1.9}};
      }
      cfg.validate();
      parse_scheme(cfg.scheme);
      for (const auto& p : cfg.preconditioners) parse_preconditioner(p);
    } catch (const std::exception& ex) {
      std::cerr << "usage error: " << ex.what() << '\n';
      return kExitUsage;
    }
    try {
      const auto outcome = run_benchmark(cfg, std::cerr);
      write_table(std::cout, outcome.rows);
      if (!cfg.out.empty()) {
        std::ostringstream csv;
        write_csv(csv, outcome.rows);
        write_text(cfg.out + ".csv", csv.str());
        write_text(cfg.out + ".json", benchmark_report(cfg, outcome.rows).dump(2) + "\n");
      }
      return outcome.exit_code;
    } catch (const DomainError& ex) {
      std::cerr << "usage error: " << ex.what() << '\n';
      return kExitUsage;
    } catch (const std::exception& ex) {
      std::cerr << "error: " << ex.what() << '\n';
      return kExitFailed;
    }
  }

  VerifyConfig vc;
  vc.seed = vseed;
  if (*o_gamma) vc.gammas = gammas;
  if (*o_prefix) vc.prefix = prefix;
  if (*o_corrupt) vc.corrupt_coefficient = corrupt;
  try {
    for (double g : vc.gammas) detail::require(g > 1.0 && g < 2.0, "gamma must lie in (1,2)");
    detail::require(vc.prefix >= 2, "prefix must be at least 2");
  } catch (const std::exception& ex) {
    std::cerr << "usage error: " << ex.what() << '\n';
    return kExitUsage;
  }
  std::vector<std::string> notes;
  const auto checks = run_verification(vc, notes);
  bool all = true;
  for (const auto& c : checks) {
    std::cout << (c.pass ? "PASS " : "FAIL ") << c.name << "  " << c.detail << '\n';
    all = all && c.pass;
  }
  for (const auto& n : notes) std::cout << "note: " << n << '\n';
  if (!vout.empty()) write_text(vout + ".json", verification_report(checks, notes, vc.seed).dump(2) + "\n");
  return all ? kExitOk : kExitFailed;
}
