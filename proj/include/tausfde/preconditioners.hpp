#ifndef TAUSFDE_PRECONDITIONERS_HPP
#define TAUSFDE_PRECONDITIONERS_HPP

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <span>
#include <vector>

#include "tausfde/errors.hpp"
#include "tausfde/fft.hpp"
#include "tausfde/grid.hpp"
#include "tausfde/operator.hpp"
#include "tausfde/transforms.hpp"

namespace tausfde {

inline double mean_coefficient(double lower, double upper) {
  detail::require(lower > 0.0 && lower <= upper, "mean_coefficient: need 0 < lower <= upper");
  return std::sqrt(lower * upper);
}

struct CoefficientBounds {
  double lower = 1.0;
  double upper = 1.0;
};

/// Grid min/max of every d_i, as recorded when the operator was built.
inline std::vector<CoefficientBounds> sampled_bounds(const SfdeOperator& op) {
  std::vector<CoefficientBounds> b;
  for (const auto& t : op.terms()) b.push_back({t.diag_min, t.diag_max});
  return b;
}

namespace detail {

inline std::vector<double> mean_coefficients(const SfdeOperator& op,
                                             std::span<const CoefficientBounds> bounds) {
  detail::require(bounds.size() == op.rank(), "preconditioner: one bound pair per dimension");
  std::vector<double> dbar;
  for (const auto& b : bounds) dbar.push_back(mean_coefficient(b.lower, b.upper));
  return dbar;
}

// lambda[K] = 1 + sum_i w_i mu_{i,K(i)} over the grid, first dimension fastest.
template <class T>
std::vector<T> tensor_sum_diagonal(const GridShape& shape, const std::vector<std::vector<T>>& per_axis,
                                   std::span<const double> weights) {
  std::vector<T> out(shape.size(), T(1.0));
  for (std::size_t i = 0; i < shape.rank(); ++i) {
    const std::size_t len = shape.dim(i), stride = shape.stride(i);
    for (std::size_t p = 0; p < out.size(); ++p) out[p] += weights[i] * per_axis[i][(p / stride) % len];
  }
  return out;
}

}  // namespace detail

/// P = Q Lambda Q with Q the multi-dimensional sine transform.
class TauPreconditioner {
public:
  TauPreconditioner(GridShape shape, std::vector<double> lambda, std::vector<double> dbar,
                    std::vector<double> eta)
      : shape_(std::move(shape)), lambda_(std::move(lambda)), dbar_(std::move(dbar)), eta_(std::move(eta)) {
    detail::require_size(lambda_.size(), shape_.size(), "TauPreconditioner");
    for (double l : lambda_) detail::require(l > 0.0, "TauPreconditioner: eigenvalues must be positive");
  }

  const GridShape& shape() const { return shape_; }
  const std::vector<double>& lambda() const { return lambda_; }
  const std::vector<double>& dbar() const { return dbar_; }
  const std::vector<double>& eta() const { return eta_; }

  /// out = Q Lambda^power Q v. power = -1 gives P^{-1}; +-1/2 give the square roots.
  void apply_power(std::span<const double> v, std::span<double> out, double power) const {
    detail::require_size(v.size(), shape_.size(), "TauPreconditioner");
    detail::require_size(out.size(), shape_.size(), "TauPreconditioner");
    if (out.data() != v.data()) std::copy(v.begin(), v.end(), out.begin());
    sine_all_axes(out);
    if (power == -1.0) {
      for (std::size_t p = 0; p < out.size(); ++p) out[p] /= lambda_[p];
    } else {
      for (std::size_t p = 0; p < out.size(); ++p) out[p] *= std::pow(lambda_[p], power);
    }
    sine_all_axes(out);
  }

  void apply_inverse(std::span<const double> v, std::span<double> out) const { apply_power(v, out, -1.0); }
  void apply(std::span<const double> v, std::span<double> out) const { apply_power(v, out, 1.0); }

  std::vector<double> apply_inverse(std::span<const double> v) const {
    std::vector<double> out(v.size());
    apply_inverse(v, out);
    return out;
  }
  std::vector<double> apply(std::span<const double> v) const {
    std::vector<double> out(v.size());
    apply(v, out);
    return out;
  }
  std::vector<double> apply_power(std::span<const double> v, double power) const {
    std::vector<double> out(v.size());
    apply_power(v, out, power);
    return out;
  }

private:
  void sine_all_axes(std::span<double> x) const {
    for (std::size_t a = 0; a < shape_.rank(); ++a) {
      apply_along_axis(shape_, a, SineTransformKernel(shape_.dim(a)), x, x);
    }
  }

  GridShape shape_;
  std::vector<double> lambda_;
  std::vector<double> dbar_;
  std::vector<double> eta_;
};

inline TauPreconditioner build_tau(const SfdeOperator& op, std::span<const CoefficientBounds> bounds) {
  auto dbar = detail::mean_coefficients(op, bounds);
  std::vector<double> eta, weights;
  std::vector<std::vector<double>> per_axis;
  for (std::size_t i = 0; i < op.rank(); ++i) {
    const auto& t = op.term(i);
    eta.push_back(t.eta);
    weights.push_back(dbar[i] * t.eta);
    per_axis.push_back(tau_eigenvalues(t.symbol));
  }
  auto lambda = detail::tensor_sum_diagonal(op.shape(), per_axis, weights);
  return TauPreconditioner(op.shape(), std::move(lambda), std::move(dbar), std::move(eta));
}

inline TauPreconditioner build_tau(const SfdeOperator& op) {
  const auto b = sampled_bounds(op);
  return build_tau(op, b);
}

/// Dense P = I + sum_i dbar_i eta_i (I (x) tau(S_i) (x) I), assembled from tau matrices (oracle).
inline Eigen::MatrixXd tau_preconditioner_dense(const SfdeOperator& op,
                                                std::span<const CoefficientBounds> bounds) {
  detail::guard(op.size(), kDenseOperatorGuard, "tau_preconditioner_dense");
  const auto dbar = detail::mean_coefficients(op, bounds);
  const auto n = static_cast<Eigen::Index>(op.size());
  Eigen::MatrixXd p = Eigen::MatrixXd::Identity(n, n);
  const auto& shape = op.shape();
  for (std::size_t i = 0; i < op.rank(); ++i) {
    const Eigen::MatrixXd tau = tau_matrix_dense(op.term(i).symbol);
    const double w = dbar[i] * op.term(i).eta;
    const std::size_t len = shape.dim(i), stride = shape.stride(i);
    for (std::size_t r = 0; r < op.size(); ++r) {
      const std::size_t k = (r / stride) % len;
      const std::size_t base = r - k * stride;
      for (std::size_t q = 0; q < len; ++q) {
        p(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(base + q * stride)) +=
            w * tau(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(q));
      }
    }
  }
  return p;
}

/// Dense P~ = I + sum_i dbar_i eta_i (I (x) S_i (x) I): the operator with every d_i
/// replaced by its mean value.
inline Eigen::MatrixXd tilde_p_dense(const SfdeOperator& op, std::span<const CoefficientBounds> bounds) {
  detail::guard(op.size(), kDenseEigenGuard, "tilde_p_dense");
  const auto dbar = detail::mean_coefficients(op, bounds);
  const auto n = static_cast<Eigen::Index>(op.size());
  Eigen::MatrixXd p = Eigen::MatrixXd::Identity(n, n);
  for (std::size_t i = 0; i < op.rank(); ++i) {
    detail::add_axis_term(p, op.shape(), i, op.term(i).symbol, {}, dbar[i] * op.term(i).eta);
  }
  return p;
}

/// Strang circulant approximation c of a symmetric Toeplitz symbol:
/// c_k = t_k for k <= M/2, t_{M-k} otherwise.
inline std::vector<double> strang_first_column(const ToeplitzSymbol& sym) {
  const std::size_t m = sym.size();
  std::vector<double> c(m);
  for (std::size_t k = 0; k < m; ++k) c[k] = (k <= m / 2) ? sym[k] : sym[m - k];
  return c;
}

/// Eigenvalues of the circulant with first column c (real because c is symmetric).
inline std::vector<double> circulant_eigenvalues(std::span<const double> c) {
  const std::size_t m = c.size();
  fft::ComplexBuffer in(m), out(m);
  for (std::size_t k = 0; k < m; ++k) in[k] = c[k];
  fft::transform_batch(m, 1, fft::Direction::Forward, in, out);
  std::vector<double> mu(m);
  for (std::size_t k = 0; k < m; ++k) mu[k] = out[k].real();
  return mu;
}

/// Multilevel Strang circulant I + sum_i dbar_i eta_i C_i, diagonalized by the
/// multi-dimensional DFT.
class CirculantPreconditioner {
public:
  CirculantPreconditioner(GridShape shape, std::vector<std::complex<double>> diagonal)
      : shape_(std::move(shape)), diagonal_(std::move(diagonal)) {
    detail::require_size(diagonal_.size(), shape_.size(), "CirculantPreconditioner");
    double scale = 0.0;
    for (auto z : diagonal_) scale = std::max(scale, std::abs(z));
    for (auto z : diagonal_) {
      if (!(std::abs(z) > 1e-14 * scale)) {
        throw DomainError("circulant preconditioner is singular (zero Fourier diagonal entry)");
      }
    }
  }

  const GridShape& shape() const { return shape_; }
  const std::vector<std::complex<double>>& fourier_diagonal() const { return diagonal_; }

  void apply_inverse(std::span<const double> v, std::span<double> out) const {
    detail::require_size(v.size(), shape_.size(), "CirculantPreconditioner");
    detail::require_size(out.size(), shape_.size(), "CirculantPreconditioner");
    const std::size_t n = shape_.size();
    auto& ws = fft::Workspace::local();
    ws.a.resize(n);
    ws.b.resize(n);
    for (std::size_t p = 0; p < n; ++p) ws.a[p] = v[p];
    fft::transform_grid(shape_.dims(), fft::Direction::Forward, ws.a, ws.b);
    const double inv_n = 1.0 / static_cast<double>(n);
    for (std::size_t p = 0; p < n; ++p) ws.b[p] *= inv_n / diagonal_[p];
    fft::transform_grid(shape_.dims(), fft::Direction::Backward, ws.b, ws.a);
    double vnorm = 0.0, residue = 0.0;
    for (std::size_t p = 0; p < n; ++p) {
      vnorm += v[p] * v[p];
      residue = std::max(residue, std::abs(ws.a[p].imag()));
      out[p] = ws.a[p].real();
    }
    if (residue > 1e-8 * std::sqrt(vnorm)) {
      throw NumericError("circulant preconditioner: imaginary residue exceeds 1e-8*||v||");
    }
  }

  std::vector<double> apply_inverse(std::span<const double> v) const {
    std::vector<double> out(v.size());
    apply_inverse(v, out);
    return out;
  }

private:
  GridShape shape_;
  std::vector<std::complex<double>> diagonal_;
};

inline CirculantPreconditioner build_strang_circulant(const SfdeOperator& op,
                                                      std::span<const CoefficientBounds> bounds) {
  const auto dbar = detail::mean_coefficients(op, bounds);
  std::vector<double> weights;
  std::vector<std::vector<std::complex<double>>> per_axis;
  for (std::size_t i = 0; i < op.rank(); ++i) {
    weights.push_back(dbar[i] * op.term(i).eta);
    const auto mu = circulant_eigenvalues(strang_first_column(op.term(i).symbol));
    per_axis.emplace_back(mu.begin(), mu.end());
  }
  return CirculantPreconditioner(op.shape(), detail::tensor_sum_diagonal(op.shape(), per_axis, weights));
}

inline CirculantPreconditioner build_strang_circulant(const SfdeOperator& op) {
  const auto b = sampled_bounds(op);
  return build_strang_circulant(op, b);
}

}  // namespace tausfde

#endif  // TAUSFDE_PRECONDITIONERS_HPP
