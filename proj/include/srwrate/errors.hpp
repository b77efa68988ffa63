#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace srwrate {

// Base of everything the library throws on purpose.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad input: violated preconditions, malformed files, non-orthonormal bases.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

// Solver produced something non-finite or failed its own certificate check.
class NumericalError : public Error {
 public:
  using Error::Error;
};

class PackingNotFound : public Error {
 public:
  PackingNotFound(std::size_t attempts, std::size_t found, std::size_t target)
      : Error("packing-not-found: " + std::to_string(found) + " of " + std::to_string(target) +
              " separated points after " + std::to_string(attempts) + " rejected draws"),
        attempts_(attempts),
        found_(found) {}

  std::size_t attempts() const noexcept { return attempts_; }
  std::size_t found() const noexcept { return found_; }

 private:
  std::size_t attempts_;
  std::size_t found_;
};

class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, double violation)
      : Error(what + " (final marginal violation " + std::to_string(violation) + ")"),
        violation_(violation) {}

  double violation() const noexcept { return violation_; }

 private:
  double violation_;
};

}  // namespace srwrate
