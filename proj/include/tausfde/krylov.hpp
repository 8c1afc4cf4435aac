#ifndef TAUSFDE_KRYLOV_HPP
#define TAUSFDE_KRYLOV_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "tausfde/errors.hpp"

namespace tausfde {

/// Which norm the relative tolerance is measured against.
enum class ResidualReference {
  PreconditionedRhs,  // ||P^{-1} b||
  InitialResidual,    // ||P^{-1}(b - A x0)||
};

struct SolverConfig {
  double tol_rel = 1e-7;
  std::size_t max_iters = 500;
  std::optional<std::size_t> restart;
  ResidualReference reference = ResidualReference::PreconditionedRhs;

  void validate() const {
    detail::require(tol_rel > 0.0 && tol_rel < 1.0, "SolverConfig: tol_rel must lie in (0,1)");
    detail::require(max_iters > 0, "SolverConfig: max_iters must be positive");
    detail::require(!restart || *restart > 0, "SolverConfig: restart must be positive");
  }
};

struct KrylovResult {
  std::vector<double> solution;
  std::size_t iterations = 0;
  std::vector<double> residual_norms;  // ||P^{-1}(b - A x_k)||_2, k = 0..iterations
  bool converged = false;
  double reference_norm = 0.0;
};

namespace detail {

inline double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double norm2(std::span<const double> a) { return std::sqrt(dot(a, a)); }

inline void require_finite(double x, const char* what) {
  if (!std::isfinite(x)) throw NumericError(std::string("gmres: non-finite ") + what);
}

/// Krylov basis and work vectors kept per thread between solves. Fresh
/// multi-megabyte allocations every iteration otherwise cost a round of page
/// faults each time step once the grid outgrows the allocator's cached heap.
struct KrylovWorkspace {
  std::vector<std::vector<double>> basis;
  std::vector<double> w, tmp, r;
  bool busy = false;

  std::vector<double>& vec(std::size_t j, std::size_t n) {
    if (basis.size() <= j) basis.resize(j + 1);
    basis[j].resize(n);
    return basis[j];
  }
};

/// The thread's shared workspace, or `fallback` when a solve is already running
/// on this thread (nested solve inside an operator callback).
class WorkspaceLease {
public:
  explicit WorkspaceLease(KrylovWorkspace& fallback) {
    thread_local KrylovWorkspace shared;
    ws_ = shared.busy ? &fallback : &shared;
    ws_->busy = true;
  }
  ~WorkspaceLease() { ws_->busy = false; }
  WorkspaceLease(const WorkspaceLease&) = delete;
  WorkspaceLease& operator=(const WorkspaceLease&) = delete;
  KrylovWorkspace& get() { return *ws_; }

private:
  KrylovWorkspace* ws_;
};

}  // namespace detail

/// Left-preconditioned GMRES with modified Gram-Schmidt and Givens rotations.
/// `apply_a(x, y)` and `apply_pinv(x, y)` write y = A x and y = P^{-1} x.
template <class ApplyA, class ApplyPinv>
KrylovResult gmres(ApplyA&& apply_a, ApplyPinv&& apply_pinv, std::span<const double> b,
                   std::span<const double> x0, const SolverConfig& cfg) {
  cfg.validate();
  const std::size_t n = b.size();
  detail::require_size(x0.size(), n, "gmres");

  KrylovResult res;
  res.solution.assign(x0.begin(), x0.end());
  detail::KrylovWorkspace fallback;
  detail::WorkspaceLease lease(fallback);
  auto& ws = lease.get();
  auto& w = ws.w;
  auto& tmp = ws.tmp;
  auto& r = ws.r;
  w.resize(n);
  tmp.resize(n);
  r.resize(n);

  auto precond_residual = [&](std::span<const double> x) {
    apply_a(x, std::span<double>(tmp));
    for (std::size_t i = 0; i < n; ++i) tmp[i] = b[i] - tmp[i];
    apply_pinv(std::span<const double>(tmp), std::span<double>(r));
    return detail::norm2(r);
  };

  double beta = precond_residual(res.solution);
  detail::require_finite(beta, "initial residual");
  if (cfg.reference == ResidualReference::PreconditionedRhs) {
    apply_pinv(b, std::span<double>(tmp));
    res.reference_norm = detail::norm2(tmp);
  } else {
    res.reference_norm = beta;
  }
  const double target = cfg.tol_rel * res.reference_norm;
  res.residual_norms.push_back(beta);
  if (beta <= target) {
    res.converged = true;
    return res;
  }

  const std::size_t cycle = cfg.restart ? *cfg.restart : cfg.max_iters;
  std::vector<std::vector<double>> h;  // column j holds H(0..j+1, j)
  std::vector<double> cs, sn, g;

  while (res.iterations < cfg.max_iters) {
    auto v = [&ws, n](std::size_t j) -> std::vector<double>& { return ws.basis[j]; };
    {
      auto& v0 = ws.vec(0, n);
      for (std::size_t i = 0; i < n; ++i) v0[i] = r[i] / beta;
    }
    h.clear();
    cs.clear();
    sn.clear();
    g.assign(1, beta);
    bool done = false;
    std::size_t k = 0;
    for (; k < cycle && res.iterations < cfg.max_iters; ++k) {
      apply_a(std::span<const double>(v(k)), std::span<double>(tmp));
      apply_pinv(std::span<const double>(tmp), std::span<double>(w));
      const double wnorm = detail::norm2(w);
      detail::require_finite(wnorm, "Krylov vector");
      std::vector<double> col(k + 2, 0.0);
      for (std::size_t j = 0; j <= k; ++j) {
        const auto& vj = v(j);
        col[j] = detail::dot(w, vj);
        for (std::size_t i = 0; i < n; ++i) w[i] -= col[j] * vj[i];
      }
      col[k + 1] = detail::norm2(w);
      detail::require_finite(col[k + 1], "Arnoldi coefficient");
      const bool breakdown = col[k + 1] < 1e-14 * std::max(wnorm, beta);

      for (std::size_t j = 0; j < k; ++j) {
        const double t = cs[j] * col[j] + sn[j] * col[j + 1];
        col[j + 1] = -sn[j] * col[j] + cs[j] * col[j + 1];
        col[j] = t;
      }
      const double rho = std::hypot(col[k], col[k + 1]);
      cs.push_back(col[k] / rho);
      sn.push_back(col[k + 1] / rho);
      col[k] = rho;
      col[k + 1] = 0.0;
      g.push_back(-sn[k] * g[k]);
      g[k] *= cs[k];
      h.push_back(std::move(col));
      ++res.iterations;

      const double est = std::abs(g[k + 1]);
      res.residual_norms.push_back(est);
      if (est <= target) {
        done = true;
        ++k;
        break;
      }
      if (breakdown) {
        throw NumericError("gmres: Arnoldi breakdown with residual " + std::to_string(est) +
                           " above target " + std::to_string(target));
      }
      const double hn = detail::norm2(w);
      auto& next = ws.vec(k + 1, n);
      for (std::size_t i = 0; i < n; ++i) next[i] = w[i] / hn;
    }

    // Back substitution H y = g and x += V y.
    std::vector<double> y(k);
    for (std::size_t i = k; i-- > 0;) {
      double s = g[i];
      for (std::size_t j = i + 1; j < k; ++j) s -= h[j][i] * y[j];
      y[i] = s / h[i][i];
    }
    for (std::size_t j = 0; j < k; ++j) {
      const auto& vj = v(j);
      for (std::size_t i = 0; i < n; ++i) res.solution[i] += y[j] * vj[i];
    }
    if (done) {
      res.converged = true;
      return res;
    }
    if (res.iterations >= cfg.max_iters) break;
    beta = precond_residual(res.solution);
    detail::require_finite(beta, "restart residual");
    if (beta <= target) {
      res.converged = true;
      return res;
    }
  }
  return res;
}

}  // namespace tausfde

#endif  // TAUSFDE_KRYLOV_HPP
