#pragma once

#include <stdexcept>
#include <string>

namespace ntkx {

// Base of every error raised by the library; callers that only care about
// "this cell failed" catch this one.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define NTKX_DEFINE_ERROR(Name) \
  class Name : public Error {   \
   public:                      \
    using Error::Error;         \
  }

NTKX_DEFINE_ERROR(DimensionError);
NTKX_DEFINE_ERROR(DegenerateDirection);
NTKX_DEFINE_ERROR(InvalidInput);
NTKX_DEFINE_ERROR(InvalidRegularization);
NTKX_DEFINE_ERROR(FeatureMismatch);
NTKX_DEFINE_ERROR(BoundaryTooClose);
NTKX_DEFINE_ERROR(EvaluationError);
NTKX_DEFINE_ERROR(FitFailure);
NTKX_DEFINE_ERROR(DivergenceError);
NTKX_DEFINE_ERROR(NaNError);
NTKX_DEFINE_ERROR(ConfigError);

#undef NTKX_DEFINE_ERROR

// Raised when a factorization breaks down; carries a condition estimate so
// sweeps can record how ill-posed the cell was.
class NumericalFailure : public Error {
 public:
  NumericalFailure(const std::string& what, double condition_estimate)
      : Error(what), condition_estimate_(condition_estimate) {}
  double condition_estimate() const noexcept { return condition_estimate_; }

 private:
  double condition_estimate_;
};

}  // namespace ntkx
