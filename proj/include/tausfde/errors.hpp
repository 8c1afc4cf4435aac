#ifndef TAUSFDE_ERRORS_HPP
#define TAUSFDE_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace tausfde {

/// Argument outside the mathematical domain of an operation, or mismatched sizes.
class DomainError : public std::domain_error {
public:
  using std::domain_error::domain_error;
};

/// NaN/Inf encountered, or an iteration broke down without converging.
class NumericError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// A dense (oracle/analysis) path refused because the problem exceeds its size guard.
class GuardError : public std::length_error {
public:
  using std::length_error::length_error;
};

namespace detail {

inline void require(bool ok, const std::string& what) {
  if (!ok) throw DomainError(what);
}

inline void require_size(std::size_t got, std::size_t expected, const char* where) {
  if (got != expected) {
    throw DomainError(std::string(where) + ": size mismatch (got " + std::to_string(got) +
                      ", expected " + std::to_string(expected) + ")");
  }
}

inline void guard(std::size_t n, std::size_t limit, const char* where) {
  if (n > limit) {
    throw GuardError(std::string(where) + ": size " + std::to_string(n) + " exceeds dense guard " +
                     std::to_string(limit));
  }
}

}  // namespace detail
}  // namespace tausfde

#endif  // TAUSFDE_ERRORS_HPP
