#pragma once

#include <stdexcept>
#include <string>

namespace psifno {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define PSIFNO_DEFINE_ERROR(Name)   \
  class Name : public Error {       \
   public:                          \
    using Error::Error;             \
  };

PSIFNO_DEFINE_ERROR(HermitianViolation)
PSIFNO_DEFINE_ERROR(BadTruncation)
PSIFNO_DEFINE_ERROR(DimensionMismatch)
PSIFNO_DEFINE_ERROR(UnknownActivation)
PSIFNO_DEFINE_ERROR(InsufficientResolution)
PSIFNO_DEFINE_ERROR(BadParameters)
PSIFNO_DEFINE_ERROR(CoercivityViolation)
PSIFNO_DEFINE_ERROR(NonFiniteIterate)
PSIFNO_DEFINE_ERROR(CflViolation)
PSIFNO_DEFINE_ERROR(NonFiniteState)
PSIFNO_DEFINE_ERROR(CalibrationFailed)
PSIFNO_DEFINE_ERROR(ConfigInvalid)
PSIFNO_DEFINE_ERROR(DegenerateFit)
PSIFNO_DEFINE_ERROR(FormatError)

#undef PSIFNO_DEFINE_ERROR

}  // namespace psifno
