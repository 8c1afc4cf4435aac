#ifndef TAUSFDE_OPERATOR_HPP
#define TAUSFDE_OPERATOR_HPP

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <memory>
#include <span>
#include <sstream>
#include <vector>

#include "tausfde/coefficients.hpp"
#include "tausfde/errors.hpp"
#include "tausfde/grid.hpp"
#include "tausfde/transforms.hpp"

namespace tausfde {

/// One term eta_i D_i (I (x) S_{alpha_i,M_i} (x) I) of the system matrix.
struct DimensionTerm {
  double eta = 0.0;
  ToeplitzSymbol symbol;
  std::vector<double> diag;  // d_i sampled at every grid point, grid order
  double diag_min = 0.0;
  double diag_max = 0.0;
  std::shared_ptr<const ToeplitzKernel> kernel;
};

/// Matrix-free A = I_J + sum_i eta_i D_i (I_{M_i^-} (x) S_i (x) I_{M_i^+}).
class SfdeOperator {
public:
  SfdeOperator() = default;

  /// Assembles from raw parts. Every diag entry must be positive, every eta non-negative.
  SfdeOperator(GridShape shape, std::vector<double> eta, std::vector<ToeplitzSymbol> symbols,
               std::vector<std::vector<double>> diags)
      : shape_(std::move(shape)) {
    const std::size_t m = shape_.rank();
    detail::require(eta.size() == m && symbols.size() == m && diags.size() == m,
                    "SfdeOperator: need one eta, symbol and coefficient vector per dimension");
    terms_.resize(m);
    for (std::size_t i = 0; i < m; ++i) {
      auto& t = terms_[i];
      detail::require(std::isfinite(eta[i]) && eta[i] >= 0.0, "SfdeOperator: eta must be >= 0");
      detail::require_size(symbols[i].size(), shape_.dim(i), "SfdeOperator symbol");
      detail::require_size(diags[i].size(), shape_.size(), "SfdeOperator coefficient");
      t.eta = eta[i];
      t.symbol = std::move(symbols[i]);
      t.diag = std::move(diags[i]);
      for (std::size_t p = 0; p < t.diag.size(); ++p) {
        if (!(t.diag[p] > 0.0) || !std::isfinite(t.diag[p])) {
          std::ostringstream msg;
          msg << "coefficient d_" << (i + 1) << " is not positive at grid point (";
          const auto idx = shape_.unravel(p);
          for (std::size_t a = 0; a < idx.size(); ++a) msg << (a ? "," : "") << idx[a] + 1;
          msg << "): " << t.diag[p];
          throw DomainError(msg.str());
        }
      }
      const auto [lo, hi] = std::minmax_element(t.diag.begin(), t.diag.end());
      t.diag_min = *lo;
      t.diag_max = *hi;
      t.kernel = std::make_shared<const ToeplitzKernel>(t.symbol);
    }
  }

  const GridShape& shape() const { return shape_; }
  std::size_t size() const { return shape_.size(); }
  std::size_t rank() const { return shape_.rank(); }
  const DimensionTerm& term(std::size_t i) const { return terms_.at(i); }
  const std::vector<DimensionTerm>& terms() const { return terms_; }

  /// out = A v. `out` must not alias `v`.
  void apply(std::span<const double> v, std::span<double> out) const {
    detail::require_size(v.size(), size(), "SfdeOperator::apply");
    detail::require_size(out.size(), size(), "SfdeOperator::apply");
    std::copy(v.begin(), v.end(), out.begin());
    thread_local std::vector<double> tmp;
    tmp.resize(size());
    for (std::size_t i = 0; i < terms_.size(); ++i) {
      const auto& t = terms_[i];
      if (t.eta == 0.0) continue;
      apply_along_axis(shape_, i, *t.kernel, v, std::span<double>(tmp));
      const double* d = t.diag.data();
      for (std::size_t p = 0; p < tmp.size(); ++p) out[p] += t.eta * d[p] * tmp[p];
    }
  }

  std::vector<double> apply(std::span<const double> v) const {
    std::vector<double> out(size());
    apply(v, out);
    return out;
  }

private:
  GridShape shape_;
  std::vector<DimensionTerm> terms_;
};

/// Everything needed to discretize one problem: grid, orders, time step, scheme and
/// the coefficient functions sampled on the interior grid (grid order).
struct Discretization {
  GridGeometry geometry;
  std::vector<double> orders;
  double dt = 0.0;
  Scheme scheme = Scheme::CenteredDifference;
  std::vector<std::vector<double>> coefficients;
};

/// eta_i = dt / h_i^{alpha_i}.
inline double step_ratio(double dt, double h, double alpha) { return dt / std::pow(h, alpha); }

inline SfdeOperator build_operator(const Discretization& disc) {
  const auto& g = disc.geometry;
  const std::size_t m = g.shape.rank();
  detail::require(disc.orders.size() == m, "build_operator: one fractional order per dimension");
  detail::require(disc.coefficients.size() == m, "build_operator: one coefficient per dimension");
  detail::require(disc.dt > 0.0 && std::isfinite(disc.dt), "build_operator: time step must be positive");
  std::vector<double> eta(m);
  std::vector<ToeplitzSymbol> symbols;
  for (std::size_t i = 0; i < m; ++i) {
    const double alpha = disc.orders[i];
    auto seq = make_coefficients(disc.scheme, alpha, g.shape.dim(i));
    symbols.emplace_back(seq.values());
    eta[i] = step_ratio(disc.dt, g.spacing(i), alpha);
  }
  return SfdeOperator(g.shape, std::move(eta), std::move(symbols), disc.coefficients);
}

namespace detail {

// Adds scale * diag(w) (I (x) T (x) I) along `axis` into the dense matrix.
inline void add_axis_term(Eigen::MatrixXd& a, const GridShape& shape, std::size_t axis,
                          const ToeplitzSymbol& sym, std::span<const double> w, double scale) {
  const std::size_t len = shape.dim(axis);
  const std::size_t stride = shape.stride(axis);
  for (std::size_t p = 0; p < shape.size(); ++p) {
    const std::size_t k = (p / stride) % len;
    const std::size_t base = p - k * stride;
    const double rs = scale * (w.empty() ? 1.0 : w[p]);
    for (std::size_t q = 0; q < len; ++q) {
      const std::size_t off = k > q ? k - q : q - k;
      a(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(base + q * stride)) += rs * sym[off];
    }
  }
}

}  // namespace detail

inline constexpr std::size_t kDenseOperatorGuard = 20000;
inline constexpr std::size_t kDenseEigenGuard = 4096;

/// Dense I + sum eta_i diag(d_i)(I (x) S_i (x) I). Oracle for small J only.
inline Eigen::MatrixXd materialize_dense(const SfdeOperator& op) {
  detail::guard(op.size(), kDenseOperatorGuard, "materialize_dense");
  const auto n = static_cast<Eigen::Index>(op.size());
  Eigen::MatrixXd a = Eigen::MatrixXd::Identity(n, n);
  for (std::size_t i = 0; i < op.rank(); ++i) {
    const auto& t = op.term(i);
    detail::add_axis_term(a, op.shape(), i, t.symbol, t.diag, t.eta);
  }
  return a;
}

struct SymmetricSplitSpectrum {
  double lambda_min = 0.0;  // of H(Z) = (Z + Z^T)/2
  double lambda_max = 0.0;
  double skew_radius = 0.0;  // spectral radius of S(Z) = (Z - Z^T)/2
};

/// Extreme eigenvalues of the symmetric part and spectral radius of the skew part of a dense matrix.
inline SymmetricSplitSpectrum symmetric_split_spectrum(const Eigen::MatrixXd& z) {
  detail::guard(static_cast<std::size_t>(z.rows()), kDenseEigenGuard, "symmetric_split_spectrum");
  const Eigen::MatrixXd h = 0.5 * (z + z.transpose());
  const Eigen::MatrixXd s = 0.5 * (z - z.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eh(h, Eigen::EigenvaluesOnly);
  // S is normal with purely imaginary spectrum, so rho(S)^2 = lambda_max(S^T S).
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(s.transpose() * s, Eigen::EigenvaluesOnly);
  SymmetricSplitSpectrum r;
  r.lambda_min = eh.eigenvalues().minCoeff();
  r.lambda_max = eh.eigenvalues().maxCoeff();
  r.skew_radius = std::sqrt(std::max(0.0, es.eigenvalues().maxCoeff()));
  return r;
}

inline SymmetricSplitSpectrum symmetric_part_extreme_eigs(const SfdeOperator& op) {
  detail::guard(op.size(), kDenseEigenGuard, "symmetric_part_extreme_eigs");
  return symmetric_split_spectrum(materialize_dense(op));
}

}  // namespace tausfde

#endif  // TAUSFDE_OPERATOR_HPP
