#pragma once

#include <stdexcept>
#include <string>

namespace hierctl {

// Malformed arguments: dimension mismatches, non-SPD weights, out-of-range
// parameters.
class InputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A task mapping J W^-1 J^T that is singular or too badly conditioned to
// invert.
class SingularityError : public std::runtime_error {
 public:
  SingularityError(const std::string& what, double smallest_singular_value)
      : std::runtime_error(what), smallest_singular_value_(smallest_singular_value) {}

  // Smallest singular value of J W^{-1/2}.
  double smallest_singular_value() const noexcept { return smallest_singular_value_; }

 private:
  double smallest_singular_value_;
};

// Simulation blew up (command above the configured cap, non-finite state).
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace hierctl
