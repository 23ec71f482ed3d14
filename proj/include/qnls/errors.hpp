#pragma once

#include <stdexcept>
#include <string>

namespace qnls {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Coefficient bundle violates one of the structural assumptions.
class ParameterError : public Error {
 public:
  using Error::Error;
};

class MassResonanceViolated : public ParameterError {
 public:
  using ParameterError::ParameterError;
};
class DissipativityViolated : public ParameterError {
 public:
  using ParameterError::ParameterError;
};
class MuKappaMismatch : public ParameterError {
 public:
  using ParameterError::ParameterError;
};
class RegularityRangeError : public ParameterError {
 public:
  using ParameterError::ParameterError;
};
class ZeroCoefficient : public ParameterError {
 public:
  using ParameterError::ParameterError;
};
class NotStrict : public ParameterError {
 public:
  using ParameterError::ParameterError;
};
class NonDissipative : public ParameterError {
 public:
  using ParameterError::ParameterError;
};

/// A caller passed arguments outside an operation's precondition.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

class NonFinite : public Error {
 public:
  using Error::Error;
};
class ShapeMismatch : public Error {
 public:
  using Error::Error;
};
class ZeroTime : public Error {
 public:
  using Error::Error;
};
class ScalingOutOfRange : public Error {
 public:
  using Error::Error;
};

/// Solution density reached the edge of the periodic box.
class DomainEscape : public Error {
 public:
  DomainEscape(const std::string& what, double t) : Error(what), time_(t) {}
  double time() const noexcept { return time_; }

 private:
  double time_;
};

class InsufficientSpan : public Error {
 public:
  using Error::Error;
};
class InsufficientSamples : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  using Error::Error;
};
class ConfigError : public Error {
 public:
  using Error::Error;
};
class MissingArtifacts : public Error {
 public:
  using Error::Error;
};

}  // namespace qnls
