#pragma once

#include <stdexcept>
#include <string>

namespace stochns {

/// Invalid configuration detected before any computation.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A numerical procedure failed (singular factorization, residual contract
/// violated, fixed-point iteration did not converge).
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class PicardError : public NumericalError {
 public:
  PicardError(const std::string& what, int step, int iterations, double last_ratio, double last_change)
      : NumericalError(what), step(step), iterations(iterations), last_ratio(last_ratio),
        last_change(last_change) {}
  int step;
  int iterations;
  double last_ratio;
  double last_change;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace stochns
