#pragma once

#include <stdexcept>
#include <string>

namespace nhknot {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad input: unknown preset, malformed config, violated precondition. CLI exit code 1.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

// Anything numerical that the caller could fix by changing parameters. CLI exit code 2.
class NumericalError : public Error {
 public:
  using Error::Error;
};

class BandsInseparable : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class ExceptionalPoint : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class GridTooCoarse : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class StepSizeTooLarge : public NumericalError {
 public:
  StepSizeTooLarge(const std::string& what, double suggested)
      : NumericalError(what), suggested_step(suggested) {}
  double suggested_step;
};

class NoDominantBand : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class Unidentifiable : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class DilationInfeasible : public NumericalError {
 public:
  DilationInfeasible(const std::string& what, double when)
      : NumericalError(what), violation_time(when) {}
  double violation_time;
};

class ConvergenceFailure : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

}  // namespace nhknot
