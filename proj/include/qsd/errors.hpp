#pragma once

#include <stdexcept>
#include <string>

namespace qsd {

// Base for every error raised by the library. Each subclass names one
// failure mode so callers and tests can catch precisely.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define QSD_DEFINE_ERROR(Name)            \
  class Name : public Error {             \
   public:                                \
    using Error::Error;                   \
  };

QSD_DEFINE_ERROR(InvalidInput)
QSD_DEFINE_ERROR(NotDefinite)
QSD_DEFINE_ERROR(SingularConjugation)
QSD_DEFINE_ERROR(EmptyThreshold)
QSD_DEFINE_ERROR(TooLarge)
QSD_DEFINE_ERROR(BadSector)
QSD_DEFINE_ERROR(UnknownSynthetic)
QSD_DEFINE_ERROR(ShapeError)
QSD_DEFINE_ERROR(NotToeplitz)
QSD_DEFINE_ERROR(BoundViolation)
QSD_DEFINE_ERROR(NotDefinitePair)
QSD_DEFINE_ERROR(BoundVacuous)
QSD_DEFINE_ERROR(HypothesisViolated)
QSD_DEFINE_ERROR(ConditionTooPoor)
QSD_DEFINE_ERROR(GapTooSmall)
QSD_DEFINE_ERROR(BadAngle)
QSD_DEFINE_ERROR(OverlapTooSmall)
QSD_DEFINE_ERROR(SectorMismatch)
QSD_DEFINE_ERROR(ParseError)
QSD_DEFINE_ERROR(ValidationError)
QSD_DEFINE_ERROR(ConfigError)

#undef QSD_DEFINE_ERROR

}  // namespace qsd
