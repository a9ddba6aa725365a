#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace ergo {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Precondition on an argument was violated.
class DomainError : public Error {
 public:
  using Error::Error;
};

// Non-finite state, cusp escape, or singular jacobian along an orbit.
// `index()` is the orbit step at which the problem was detected.
class DivergenceError : public Error {
 public:
  DivergenceError(const std::string& what, long index)
      : Error(what + " (step " + std::to_string(index) + ")"), detail_(what), index_(index) {}
  long index() const { return index_; }
  const std::string& detail() const { return detail_; }
  // Same failure, re-indexed relative to an enclosing orbit.
  DivergenceError shifted(long offset) const { return {detail_, index_ + offset}; }

 private:
  std::string detail_;
  long index_;
};

// An estimator could not produce a resolved value from the data it was given.
class UnresolvedError : public Error {
 public:
  using Error::Error;
};

}  // namespace ergo
