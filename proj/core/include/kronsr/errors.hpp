#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace kronsr {

/// Shapes or lengths of the arguments do not agree.
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// The input admits no answer (zero measurement, zero matrix, bad config).
class InvalidInput : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// An iterative solver produced a non-finite iterate or a failed factorization.
class NumericalError : public std::runtime_error {
 public:
  NumericalError(const std::string& what, int iteration)
      : std::runtime_error(what + " (iteration " + std::to_string(iteration) + ")"),
        iteration_(iteration) {}
  int iteration() const noexcept { return iteration_; }

 private:
  int iteration_;
};

/// One of the per-factor sub-problems of a decomposition-based solve failed.
class FactorSolveError : public std::runtime_error {
 public:
  FactorSolveError(std::size_t factor, const std::string& cause)
      : std::runtime_error("sub-problem for factor " + std::to_string(factor) +
                           " failed: " + cause),
        factor_(factor) {}
  std::size_t factor() const noexcept { return factor_; }

 private:
  std::size_t factor_;
};

}  // namespace kronsr
