#pragma once

#include <stdexcept>
#include <string>

namespace biped {

/// Any failure of the numerical pipeline (as opposed to bad input).
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& what, double smallest_singular_value = 0.0)
      : std::runtime_error(what), smallest_singular_value_(smallest_singular_value) {}
  double smallest_singular_value() const { return smallest_singular_value_; }

 private:
  double smallest_singular_value_;
};

class KinematicSingularity : public NumericalError {
  using NumericalError::NumericalError;
};

class ConstraintDegeneracy : public NumericalError {
  using NumericalError::NumericalError;
};

class ImpactDegeneracy : public NumericalError {
  using NumericalError::NumericalError;
};

}  // namespace biped
