#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace pell {

/// Base of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Input rejected by a precondition check (dimension mismatch, out-of-domain
/// parameter, malformed schema).
class InputError : public Error {
 public:
  using Error::Error;
};

/// A numerical routine failed to reach its tolerance. Carries whatever the
/// routine had computed before giving up.
class NumericalError : public Error {
 public:
  NumericalError(const std::string& what, double best_value, std::size_t evaluations)
      : Error(what), best_value_(best_value), evaluations_(evaluations) {}

  double best_value() const noexcept { return best_value_; }
  std::size_t evaluations() const noexcept { return evaluations_; }

 private:
  double best_value_;
  std::size_t evaluations_;
};

/// Results that contradict a structural property the algorithm relies on
/// (e.g. a margin curve that is not concave in t).
class InconsistencyError : public Error {
 public:
  using Error::Error;
};

namespace detail {

inline void require(bool condition, const std::string& message) {
  if (!condition) throw InputError(message);
}

}  // namespace detail
}  // namespace pell
