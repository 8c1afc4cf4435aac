#ifndef TAUSFDE_TRANSFORMS_HPP
#define TAUSFDE_TRANSFORMS_HPP

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <concepts>
#include <cstddef>
#include <span>
#include <vector>

#include "tausfde/errors.hpp"
#include "tausfde/fft.hpp"
#include "tausfde/grid.hpp"

namespace tausfde {

/// First column t_0..t_{M-1} of a symmetric Toeplitz matrix T_M.
struct ToeplitzSymbol {
  std::vector<double> first_column;

  ToeplitzSymbol() = default;
  explicit ToeplitzSymbol(std::vector<double> column) : first_column(std::move(column)) {
    detail::require(!first_column.empty(), "ToeplitzSymbol: empty first column");
  }

  std::size_t size() const { return first_column.size(); }
  double operator[](std::size_t k) const { return first_column[k]; }
};

/// A kernel that transforms `count` fibers of equal length stored back to back, in place.
template <class K>
concept BatchKernel = requires(K& k, std::span<double> fibers, std::size_t count) {
  { k(fibers, count) };
};

/// A plain 1-D linear map y = K x on a single fiber.
template <class K>
concept FiberMap = requires(K& k, std::span<const double> in, std::span<double> out) {
  { k(in, out) };
};

namespace detail {

inline constexpr std::size_t kFiberBatch = 16;

inline std::vector<double>& gather_buffer() {
  thread_local std::vector<double> buf;
  return buf;
}

}  // namespace detail

/// Applies a 1-D kernel to every fiber of `in` along `axis`, i.e. computes
/// (I_{M^+} (x) K (x) I_{M^-}) in with the first dimension fastest. `in` and
/// `out` may alias.
template <class Kernel>
void apply_along_axis(const GridShape& shape, std::size_t axis, Kernel&& kernel,
                      std::span<const double> in, std::span<double> out) {
  detail::require(axis < shape.rank(), "apply_along_axis: axis out of range");
  detail::require_size(in.size(), shape.size(), "apply_along_axis");
  detail::require_size(out.size(), shape.size(), "apply_along_axis");

  const std::size_t len = shape.dim(axis);
  const std::size_t stride = shape.stride(axis);
  const std::size_t outer = shape.size() / (len * stride);

  if constexpr (BatchKernel<Kernel>) {
    auto& buf = detail::gather_buffer();
    buf.resize(detail::kFiberBatch * len);
    for (std::size_t o = 0; o < outer; ++o) {
      const std::size_t base = o * len * stride;
      for (std::size_t i0 = 0; i0 < stride; i0 += detail::kFiberBatch) {
        const std::size_t nb = std::min(detail::kFiberBatch, stride - i0);
        if (stride == 1) {
          std::copy_n(in.begin() + base, len, buf.begin());
        } else {
          for (std::size_t k = 0; k < len; ++k) {
            const double* src = in.data() + base + k * stride + i0;
            for (std::size_t b = 0; b < nb; ++b) buf[b * len + k] = src[b];
          }
        }
        kernel(std::span<double>(buf.data(), nb * len), nb);
        if (stride == 1) {
          std::copy_n(buf.begin(), len, out.begin() + base);
        } else {
          for (std::size_t k = 0; k < len; ++k) {
            double* dst = out.data() + base + k * stride + i0;
            for (std::size_t b = 0; b < nb; ++b) dst[b] = buf[b * len + k];
          }
        }
      }
    }
  } else {
    static_assert(FiberMap<Kernel>, "kernel must be a BatchKernel or a FiberMap");
    std::vector<double> fin(len), fout(len);
    for (std::size_t o = 0; o < outer; ++o) {
      for (std::size_t i = 0; i < stride; ++i) {
        const std::size_t base = o * len * stride + i;
        for (std::size_t k = 0; k < len; ++k) fin[k] = in[base + k * stride];
        kernel(std::span<const double>(fin), std::span<double>(fout));
        for (std::size_t k = 0; k < len; ++k) out[base + k * stride] = fout[k];
      }
    }
  }
}

/// Orthonormal DST-I, (Q_M)_{jk} = sqrt(2/(M+1)) sin(pi j k/(M+1)), applied to a
/// batch of fibers. Two real fibers share one complex FFT of the odd extension
/// (length 2(M+1)).
class SineTransformKernel {
public:
  explicit SineTransformKernel(std::size_t m) : m_(m), n_(2 * (m + 1)) {
    detail::require(m > 0, "SineTransformKernel: length must be positive");
    scale_ = std::sqrt(2.0 / static_cast<double>(m + 1));
  }

  std::size_t length() const { return m_; }

  void operator()(std::span<double> fibers, std::size_t count) const {
    detail::require_size(fibers.size(), count * m_, "SineTransformKernel");
    if (m_ == 1) return;  // Q_1 = [1]
    const std::size_t pairs = (count + 1) / 2;
    auto& ws = fft::Workspace::local();
    ws.a.resize(pairs * n_);
    ws.b.resize(pairs * n_);
    for (std::size_t p = 0; p < pairs; ++p) {
      const double* re = fibers.data() + (2 * p) * m_;
      const double* im = (2 * p + 1 < count) ? fibers.data() + (2 * p + 1) * m_ : nullptr;
      std::complex<double>* z = ws.a.data() + p * n_;
      z[0] = 0.0;
      z[m_ + 1] = 0.0;
      for (std::size_t j = 0; j < m_; ++j) {
        const std::complex<double> v(re[j], im ? im[j] : 0.0);
        z[j + 1] = v;
        z[n_ - 1 - j] = -v;
      }
    }
    fft::transform_batch(n_, pairs, fft::Direction::Forward, ws.a, ws.b);
    // For an odd real sequence x, DFT_k(x) = -2i * sum_j x_j sin(pi j k/(M+1)).
    const double half = 0.5 * scale_;
    for (std::size_t p = 0; p < pairs; ++p) {
      const std::complex<double>* z = ws.b.data() + p * n_;
      double* re = fibers.data() + (2 * p) * m_;
      double* im = (2 * p + 1 < count) ? fibers.data() + (2 * p + 1) * m_ : nullptr;
      for (std::size_t k = 0; k < m_; ++k) {
        re[k] = -z[k + 1].imag() * half;
        if (im) im[k] = z[k + 1].real() * half;
      }
    }
  }

private:
  std::size_t m_;
  std::size_t n_;
  double scale_;
};

/// Q_M v for a single vector.
inline std::vector<double> dst1(std::span<const double> v) {
  detail::require(!v.empty(), "dst1: empty input");
  std::vector<double> out(v.begin(), v.end());
  SineTransformKernel(v.size())(out, 1);
  return out;
}

/// Multi-dimensional sine transform Q = Q_{M_m} (x) ... (x) Q_{M_1}; involutory.
inline std::vector<double> apply_sine_transform(const GridShape& shape, std::span<const double> v) {
  detail::require_size(v.size(), shape.size(), "apply_sine_transform");
  std::vector<double> out(v.begin(), v.end());
  for (std::size_t a = 0; a < shape.rank(); ++a) {
    apply_along_axis(shape, a, SineTransformKernel(shape.dim(a)), out, out);
  }
  return out;
}

/// Eigenvalues of tau(T_M) in index order i = 1..M:
/// lambda_i = t_0 + 2 sum_{j>=1} t_j cos(pi i j/(M+1)), via one length-2(M+1) DFT.
inline std::vector<double> tau_eigenvalues(const ToeplitzSymbol& sym) {
  const std::size_t m = sym.size();
  detail::require(m > 0, "tau_eigenvalues: empty symbol");
  const std::size_t n = 2 * (m + 1);
  fft::ComplexBuffer in(n), out(n);
  for (std::size_t j = 0; j < n; ++j) in[j] = (j < m) ? sym[j] : 0.0;
  fft::transform_batch(n, 1, fft::Direction::Forward, in, out);
  std::vector<double> lambda(m);
  for (std::size_t i = 0; i < m; ++i) lambda[i] = 2.0 * out[i + 1].real() - sym[0];
  return lambda;
}

/// Dense symmetric Toeplitz matrix T_M (test oracle).
inline Eigen::MatrixXd toeplitz_dense(const ToeplitzSymbol& sym) {
  const auto m = static_cast<Eigen::Index>(sym.size());
  Eigen::MatrixXd t(m, m);
  for (Eigen::Index i = 0; i < m; ++i)
    for (Eigen::Index j = 0; j < m; ++j) t(i, j) = sym[static_cast<std::size_t>(std::abs(i - j))];
  return t;
}

/// tau(T_M) = T_M - H_M, where the Hankel H_M has first column [t_2..t_{M-1},0,0]
/// and last column [0,0,t_{M-1}..t_2]. Materialized exactly (test oracle).
inline Eigen::MatrixXd tau_matrix_dense(const ToeplitzSymbol& sym) {
  const std::size_t m = sym.size();
  Eigen::MatrixXd tau = toeplitz_dense(sym);
  // With 1-based (i,j) and s = i+j: H = t_s for s <= M-1, t_{2M+2-s} for s >= M+3.
  for (std::size_t i = 1; i <= m; ++i) {
    for (std::size_t j = 1; j <= m; ++j) {
      const std::size_t s = i + j;
      double h = 0.0;
      if (s + 1 <= m) h = sym[s];
      else if (s >= m + 3) h = sym[2 * m + 2 - s];
      tau(static_cast<Eigen::Index>(i - 1), static_cast<Eigen::Index>(j - 1)) -= h;
    }
  }
  return tau;
}

/// T_M applied to a batch of fibers by circulant embedding, the symbol mirrored
/// as [t_0..t_{M-1}, 0, ..., 0, t_{M-1}..t_1]. The embedding is a real
/// symmetric circulant, so its spectrum is real and two fibers are packed into
/// the real and imaginary parts of one complex transform.
class ToeplitzKernel {
public:
  ToeplitzKernel() = default;

  explicit ToeplitzKernel(const ToeplitzSymbol& sym) : m_(sym.size()), n_(embedding_length(sym.size())) {
    detail::require(m_ > 0, "ToeplitzKernel: empty symbol");
    fft::ComplexBuffer c(n_), f(n_);
    for (std::size_t j = 0; j < n_; ++j) c[j] = 0.0;
    for (std::size_t j = 0; j < m_; ++j) c[j] = sym[j];
    for (std::size_t j = 1; j < m_; ++j) c[n_ - j] = sym[j];
    fft::transform_batch(n_, 1, fft::Direction::Forward, c, f);
    spectrum_.resize(n_);
    // 1/n normalization of the inverse transform folded into the spectrum.
    for (std::size_t k = 0; k < n_; ++k) spectrum_[k] = f[k].real() / static_cast<double>(n_);
  }

  std::size_t length() const { return m_; }

  void operator()(std::span<double> fibers, std::size_t count) const {
    detail::require_size(fibers.size(), count * m_, "ToeplitzKernel");
    const std::size_t pairs = (count + 1) / 2;
    auto& ws = fft::Workspace::local();
    ws.a.resize(pairs * n_);
    ws.b.resize(pairs * n_);
    for (std::size_t p = 0; p < pairs; ++p) {
      const double* re = fibers.data() + (2 * p) * m_;
      const double* im = (2 * p + 1 < count) ? fibers.data() + (2 * p + 1) * m_ : nullptr;
      std::complex<double>* z = ws.a.data() + p * n_;
      for (std::size_t j = 0; j < m_; ++j) z[j] = {re[j], im ? im[j] : 0.0};
      for (std::size_t j = m_; j < n_; ++j) z[j] = 0.0;
    }
    fft::transform_batch(n_, pairs, fft::Direction::Forward, ws.a, ws.b);
    for (std::size_t p = 0; p < pairs; ++p) {
      std::complex<double>* z = ws.b.data() + p * n_;
      for (std::size_t k = 0; k < n_; ++k) z[k] *= spectrum_[k];
    }
    fft::transform_batch(n_, pairs, fft::Direction::Backward, ws.b, ws.a);
    for (std::size_t p = 0; p < pairs; ++p) {
      const std::complex<double>* z = ws.a.data() + p * n_;
      double* re = fibers.data() + (2 * p) * m_;
      double* im = (2 * p + 1 < count) ? fibers.data() + (2 * p + 1) * m_ : nullptr;
      for (std::size_t j = 0; j < m_; ++j) {
        re[j] = z[j].real();
        if (im) im[j] = z[j].imag();
      }
      if (!im) residue_ = std::max(residue_, max_abs_imag(z));
    }
  }

  /// Largest imaginary residue seen on an unpaired fiber since the last reset.
  double last_residue() const { return residue_; }
  void reset_residue() const { residue_ = 0.0; }

  /// Smallest power of two >= 2M. Grids with M + 1 = 2^p would otherwise get
  /// a length 2^{p+1} - 2 embedding with large prime factors.
  static std::size_t embedding_length(std::size_t m) {
    std::size_t n = 1;
    while (n < 2 * m) n *= 2;
    return n;
  }

private:
  double max_abs_imag(const std::complex<double>* z) const {
    double r = 0.0;
    for (std::size_t j = 0; j < m_; ++j) r = std::max(r, std::abs(z[j].imag()));
    return r;
  }

  std::size_t m_ = 0;
  std::size_t n_ = 0;
  std::vector<double> spectrum_;
  mutable double residue_ = 0.0;
};

/// T_M v in O(M log M).
inline std::vector<double> toeplitz_matvec(const ToeplitzSymbol& sym, std::span<const double> v) {
  detail::require_size(v.size(), sym.size(), "toeplitz_matvec");
  std::vector<double> out(v.begin(), v.end());
  ToeplitzKernel kernel(sym);
  kernel(out, 1);
  double vnorm = 0.0;
  for (double x : v) vnorm += x * x;
  vnorm = std::sqrt(vnorm);
  if (kernel.last_residue() > 1e-10 * std::max(vnorm, 1e-300) && vnorm > 0.0) {
    throw NumericError("toeplitz_matvec: imaginary residue exceeds 1e-10*||v||");
  }
  return out;
}

}  // namespace tausfde

#endif  // TAUSFDE_TRANSFORMS_HPP
