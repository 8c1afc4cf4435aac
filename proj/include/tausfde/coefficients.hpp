#ifndef TAUSFDE_COEFFICIENTS_HPP
#define TAUSFDE_COEFFICIENTS_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "tausfde/errors.hpp"

namespace tausfde {

enum class Scheme { CenteredDifference, ShiftedGrunwald, CubicSpline };

inline std::string_view scheme_name(Scheme s) {
  switch (s) {
    case Scheme::CenteredDifference: return "centered";
    case Scheme::ShiftedGrunwald: return "grunwald";
    case Scheme::CubicSpline: return "spline";
  }
  return "unknown";
}

inline Scheme parse_scheme(std::string_view name) {
  if (name == "centered" || name == "centered-difference") return Scheme::CenteredDifference;
  if (name == "grunwald" || name == "shifted-grunwald") return Scheme::ShiftedGrunwald;
  if (name == "spline" || name == "cubic-spline") return Scheme::CubicSpline;
  throw DomainError("unknown scheme '" + std::string(name) + "'");
}

/// The numbers s_0..s_{K-1} for one scheme and one fractional order. Immutable.
class CoefficientSequence {
public:
  CoefficientSequence(Scheme scheme, double gamma, std::vector<double> values)
      : scheme_(scheme), gamma_(gamma), values_(std::move(values)) {
    detail::require(!values_.empty(), "CoefficientSequence: empty");
  }

  Scheme scheme() const { return scheme_; }
  double gamma() const { return gamma_; }
  std::size_t size() const { return values_.size(); }
  const std::vector<double>& values() const { return values_; }
  double operator[](std::size_t k) const { return values_[k]; }

  /// Leading `count` coefficients as a new sequence.
  CoefficientSequence prefix(std::size_t count) const {
    detail::require(count >= 1 && count <= values_.size(), "CoefficientSequence::prefix: bad count");
    return {scheme_, gamma_, std::vector<double>(values_.begin(), values_.begin() + count)};
  }

private:
  Scheme scheme_;
  double gamma_;
  std::vector<double> values_;
};

inline double gamma_function(double x) {
  if (!std::isfinite(x) || x <= 0.0) {
    throw DomainError("gamma_function: argument must be positive and finite, got " + std::to_string(x));
  }
  return std::tgamma(x);
}

namespace detail {

inline void require_order(double gamma, const char* where) {
  if (!(gamma > 1.0 && gamma < 2.0)) {
    throw DomainError(std::string(where) + ": fractional order must lie in (1,2), got " +
                      std::to_string(gamma));
  }
}

inline void require_count(std::size_t count, const char* where) {
  if (count == 0) throw DomainError(std::string(where) + ": count must be positive");
}

// Cardinal cubic B-spline on [0,4]; Delta^4 f(y) = integral of B(t) f''''(y+t) dt.
inline double cubic_bspline(double t) {
  if (t < 0.0 || t > 4.0) return 0.0;
  if (t < 1.0) return t * t * t / 6.0;
  if (t < 2.0) return (-3.0 * t * t * t + 12.0 * t * t - 12.0 * t + 4.0) / 6.0;
  if (t < 3.0) return (3.0 * t * t * t - 24.0 * t * t + 60.0 * t - 44.0) / 6.0;
  const double u = 4.0 - t;
  return u * u * u / 6.0;
}

// Forward fourth difference of y^a at y, via the B-spline integral.
// The direct five-term formula cancels catastrophically once y is large.
inline double fourth_difference_of_power(double a, double y) {
  static constexpr std::array<double, 8> nodes = {
      -0.9602898564975363, -0.7966664774136267, -0.5255324099163290, -0.1834346424956498,
      0.1834346424956498,  0.5255324099163290,  0.7966664774136267,  0.9602898564975363};
  static constexpr std::array<double, 8> weights = {
      0.1012285362903763, 0.2223810344533745, 0.3137066518667891, 0.3626837833783620,
      0.3626837833783620, 0.3137066518667891, 0.2223810344533745, 0.1012285362903763};
  const double c4 = a * (a - 1.0) * (a - 2.0) * (a - 3.0);
  double sum = 0.0;
  for (int piece = 0; piece < 4; ++piece) {
    for (std::size_t q = 0; q < nodes.size(); ++q) {
      const double t = piece + 0.5 * (nodes[q] + 1.0);
      sum += 0.5 * weights[q] * cubic_bspline(t) * std::pow(y + t, a - 4.0);
    }
  }
  return c4 * sum;
}

}  // namespace detail

inline CoefficientSequence centered_difference_coeffs(double gamma, std::size_t count) {
  detail::require_order(gamma, "centered_difference_coeffs");
  detail::require_count(count, "centered_difference_coeffs");
  std::vector<double> s(count);
  const double g0 = gamma_function(gamma / 2.0 + 1.0);
  s[0] = gamma_function(gamma + 1.0) / (g0 * g0);
  for (std::size_t k = 0; k + 1 < count; ++k) {
    s[k + 1] = (1.0 - (gamma + 1.0) / (gamma / 2.0 + static_cast<double>(k) + 1.0)) * s[k];
  }
  return {Scheme::CenteredDifference, gamma, std::move(s)};
}

inline CoefficientSequence shifted_grunwald_coeffs(double gamma, std::size_t count) {
  detail::require_order(gamma, "shifted_grunwald_coeffs");
  detail::require_count(count, "shifted_grunwald_coeffs");
  std::vector<double> g(count + 2);
  g[0] = -1.0;
  for (std::size_t k = 0; k + 1 < g.size(); ++k) {
    g[k + 1] = (1.0 - (gamma + 1.0) / static_cast<double>(k + 1)) * g[k];
  }
  const double q = -1.0 / (2.0 * std::cos(gamma * std::numbers::pi / 2.0));
  std::vector<double> s(count);
  s[0] = q * 2.0 * g[1];
  if (count > 1) s[1] = q * (g[0] + g[2]);
  for (std::size_t k = 2; k < count; ++k) s[k] = q * g[k + 1];
  return {Scheme::ShiftedGrunwald, gamma, std::move(s)};
}

inline CoefficientSequence cubic_spline_coeffs(double gamma, std::size_t count) {
  detail::require_order(gamma, "cubic_spline_coeffs");
  detail::require_count(count, "cubic_spline_coeffs");
  const double a = 3.0 - gamma;
  auto pw = [a](double k) { return std::pow(k, a); };
  std::vector<double> p(count + 2);
  p[0] = -1.0;
  p[1] = 4.0 - pw(2.0);
  p[2] = -pw(3.0) + 4.0 * pw(2.0) - 6.0;
  for (std::size_t k = 3; k < p.size(); ++k) {
    const double kk = static_cast<double>(k);
    if (k < 16) {
      p[k] = -pw(kk + 1.0) + 4.0 * pw(kk) - 6.0 * pw(kk - 1.0) + 4.0 * pw(kk - 2.0) - pw(kk - 3.0);
    } else {
      p[k] = -detail::fourth_difference_of_power(a, kk - 3.0);
    }
  }
  const double nu =
      -1.0 / (2.0 * std::cos(gamma * std::numbers::pi / 2.0) * gamma_function(4.0 - gamma));
  std::vector<double> s(count);
  s[0] = nu * 2.0 * p[1];
  if (count > 1) s[1] = nu * (p[0] + p[2]);
  for (std::size_t k = 2; k < count; ++k) s[k] = nu * p[k + 1];
  return {Scheme::CubicSpline, gamma, std::move(s)};
}

inline CoefficientSequence make_coefficients(Scheme scheme, double gamma, std::size_t count) {
  switch (scheme) {
    case Scheme::CenteredDifference: return centered_difference_coeffs(gamma, count);
    case Scheme::ShiftedGrunwald: return shifted_grunwald_coeffs(gamma, count);
    case Scheme::CubicSpline: return cubic_spline_coeffs(gamma, count);
  }
  throw DomainError("make_coefficients: unknown scheme");
}

/// Outcome of one Property 1 item; `first_failure` is the first offending index.
struct PropertyCheck {
  bool pass = true;
  std::optional<std::size_t> first_failure;
};

struct PropertyReport {
  PropertyCheck decay;              // (i)  sup |s_k|(1+k)^{1+gamma} bounded on the prefix
  PropertyCheck leading_positive;   // (ii) s_0 > 0
  PropertyCheck tail_nonpositive;   // (ii) s_k <= 0 for k >= 1
  PropertyCheck scaled_sums;        // (iii) (m+1)^gamma (s_0 + 2 sum_{k<m} s_k) > 0
  PropertyCheck monotone_tail;      // (iv) s_k <= s_{k+1} for k >= 1
  double decay_constant = 0.0;      // C = max_k |s_k|(1+k)^{1+gamma}
  double min_scaled_sum = 0.0;
  bool scaled_sum_bounded_below = true;  // min over m >= 64 stays above half the m = 64 value

  bool all_pass() const {
    return decay.pass && leading_positive.pass && tail_nonpositive.pass && scaled_sums.pass &&
           monotone_tail.pass;
  }

  /// Name of the first failing item, empty when everything passes.
  std::string first_failed() const {
    if (!decay.pass) return "decay";
    if (!leading_positive.pass) return "leading_positive";
    if (!tail_nonpositive.pass) return "tail_nonpositive";
    if (!scaled_sums.pass) return "scaled_sums";
    if (!monotone_tail.pass) return "monotone_tail";
    return {};
  }
};

/// sup_k |s_k|(1+k)^{1+gamma} over the available prefix (finite proxy of the D_gamma norm).
inline double d_gamma_norm_proxy(const CoefficientSequence& seq) {
  double c = 0.0;
  for (std::size_t k = 0; k < seq.size(); ++k) {
    c = std::max(c, std::abs(seq[k]) * std::pow(1.0 + static_cast<double>(k), 1.0 + seq.gamma()));
  }
  return c;
}

/// `decay_growth` bounds how much larger the second-half maximum of |s_k|(1+k)^{1+gamma}
/// may be than the first-half maximum before item (i) is declared unbounded.
inline PropertyReport validate_properties(const CoefficientSequence& seq, double decay_growth = 1.25) {
  PropertyReport r;
  const auto& s = seq.values();
  const std::size_t n = s.size();
  const double g = seq.gamma();

  auto fail = [](PropertyCheck& c, std::size_t k) {
    if (c.pass) c.first_failure = k;
    c.pass = false;
  };

  // (i): finite, and no growth between the first and second half of the prefix.
  double first_half = 0.0, second_half = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const double w = std::abs(s[k]) * std::pow(1.0 + static_cast<double>(k), 1.0 + g);
    if (!std::isfinite(w)) fail(r.decay, k);
    double& half = (2 * k < n) ? first_half : second_half;
    half = std::max(half, w);
  }
  r.decay_constant = std::max(first_half, second_half);
  if (r.decay.pass && n >= 4 && second_half > decay_growth * first_half) fail(r.decay, n / 2);

  if (!(s[0] > 0.0)) fail(r.leading_positive, 0);
  for (std::size_t k = 1; k < n; ++k) {
    if (!(s[k] <= 0.0)) fail(r.tail_nonpositive, k);
  }
  for (std::size_t k = 1; k + 1 < n; ++k) {
    if (!(s[k] <= s[k + 1])) fail(r.monotone_tail, k);
  }

  // (iii) with compensated summation; the partial sums decay like m^{-gamma}.
  double sum = s[0], comp = 0.0;
  double at64 = 0.0;
  r.min_scaled_sum = std::numeric_limits<double>::infinity();
  double min_after64 = std::numeric_limits<double>::infinity();
  for (std::size_t m = 1; m <= n; ++m) {
    if (m >= 2) {
      const double term = 2.0 * s[m - 1];
      const double t = sum + term;
      comp += std::abs(sum) >= std::abs(term) ? (sum - t) + term : (term - t) + sum;
      sum = t;
    }
    const double scaled = std::pow(static_cast<double>(m + 1), g) * (sum + comp);
    if (!(scaled > 0.0)) fail(r.scaled_sums, m);
    r.min_scaled_sum = std::min(r.min_scaled_sum, scaled);
    if (m == 64) at64 = scaled;
    if (m >= 64) min_after64 = std::min(min_after64, scaled);
  }
  if (n >= 64) r.scaled_sum_bounded_below = min_after64 >= 0.5 * at64;
  return r;
}

}  // namespace tausfde

#endif  // TAUSFDE_COEFFICIENTS_HPP
