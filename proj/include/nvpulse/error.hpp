#pragma once

#include <stdexcept>
#include <string>

namespace nvpulse {

// Base for every failure raised by the library. Callers that only care about
// "did the physics check out" can catch this one type.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define NVPULSE_DEFINE_ERROR(Name)        \
  class Name : public Error {             \
   public:                                \
    using Error::Error;                   \
  };

NVPULSE_DEFINE_ERROR(NonHermitianInput)
NVPULSE_DEFINE_ERROR(DimensionMismatch)
NVPULSE_DEFINE_ERROR(InvalidState)
NVPULSE_DEFINE_ERROR(ZeroDistance)
NVPULSE_DEFINE_ERROR(ValidityViolation)
NVPULSE_DEFINE_ERROR(InvalidGeometry)
NVPULSE_DEFINE_ERROR(QuadratureNotConverged)
NVPULSE_DEFINE_ERROR(FOutOfRange)
NVPULSE_DEFINE_ERROR(SingularEndpoint)
NVPULSE_DEFINE_ERROR(StepTooCoarse)
NVPULSE_DEFINE_ERROR(UnitError)

#undef NVPULSE_DEFINE_ERROR

// Config errors carry the offending field path (e.g. "system.nuclei[1].species").
class ParseError : public Error {
 public:
  ParseError(std::string field, const std::string& what)
      : Error(field.empty() ? what : field + ": " + what), field_(std::move(field)) {}
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

}  // namespace nvpulse
