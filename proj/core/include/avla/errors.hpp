#pragma once

#include <stdexcept>
#include <string>

namespace avla {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define AVLA_DEFINE_ERROR(Name)                                 \
  class Name : public Error {                                   \
   public:                                                      \
    explicit Name(const std::string& what) : Error(#Name ": " + what) {} \
  }

AVLA_DEFINE_ERROR(UnknownInstruction);
AVLA_DEFINE_ERROR(MissingEntity);
AVLA_DEFINE_ERROR(InvalidTask);
AVLA_DEFINE_ERROR(DimensionMismatch);
AVLA_DEFINE_ERROR(NonFiniteLogits);
AVLA_DEFINE_ERROR(IndexOutOfRange);
AVLA_DEFINE_ERROR(ProviderUnavailable);
AVLA_DEFINE_ERROR(EmptyInstruction);
AVLA_DEFINE_ERROR(VersionMismatch);
AVLA_DEFINE_ERROR(EmptyNeighborSet);
AVLA_DEFINE_ERROR(CorruptBank);
AVLA_DEFINE_ERROR(GroupTooSmall);
AVLA_DEFINE_ERROR(NonFiniteGradient);
AVLA_DEFINE_ERROR(ConfigError);

#undef AVLA_DEFINE_ERROR

}  // namespace avla
