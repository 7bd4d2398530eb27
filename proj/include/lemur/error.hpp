#pragma once

#include <stdexcept>
#include <string>

namespace lemur {

// Base of every error raised by the library. The concrete type names the
// failure class; what() carries a human-readable diagnostic.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define LEMUR_DEFINE_ERROR(Name)          \
  class Name : public Error {             \
   public:                                \
    using Error::Error;                   \
  };

// config-core
LEMUR_DEFINE_ERROR(MalformedConfig)
LEMUR_DEFINE_ERROR(InvalidRange)
LEMUR_DEFINE_ERROR(EmptyChoiceSet)

// registry
LEMUR_DEFINE_ERROR(CorruptStore)
LEMUR_DEFINE_ERROR(IoError)
LEMUR_DEFINE_ERROR(NameCollision)
LEMUR_DEFINE_ERROR(UnknownCode)
LEMUR_DEFINE_ERROR(ConflictError)
LEMUR_DEFINE_ERROR(MalformedFixture)
LEMUR_DEFINE_ERROR(MalformedDocument)
LEMUR_DEFINE_ERROR(ReferencedEntity)

// hpo
LEMUR_DEFINE_ERROR(NonFinite)

// metrics / stats
LEMUR_DEFINE_ERROR(EmptyBatch)
LEMUR_DEFINE_ERROR(NoValidClass)
LEMUR_DEFINE_ERROR(NoGroundTruth)
LEMUR_DEFINE_ERROR(LengthMismatch)
LEMUR_DEFINE_ERROR(EmptyInput)

// report
LEMUR_DEFINE_ERROR(EmptySeries)
LEMUR_DEFINE_ERROR(EmptyWorkbook)

// harness
LEMUR_DEFINE_ERROR(SpawnError)
LEMUR_DEFINE_ERROR(ProtocolError)
LEMUR_DEFINE_ERROR(UnsupportedSpace)
LEMUR_DEFINE_ERROR(TrialFailed)
LEMUR_DEFINE_ERROR(Timeout)
LEMUR_DEFINE_ERROR(BadHyperparameter)

#undef LEMUR_DEFINE_ERROR

}  // namespace lemur
