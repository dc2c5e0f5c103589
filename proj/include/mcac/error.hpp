#pragma once

#include <stdexcept>
#include <string>

namespace mcac {

/// Base class for every failure raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

#define MCAC_DEFINE_ERROR(Name)                                   \
    class Name : public Error {                                   \
    public:                                                       \
        explicit Name(const std::string& what) : Error(what) {}   \
    };

MCAC_DEFINE_ERROR(SingularMap)
MCAC_DEFINE_ERROR(EmptyContour)
MCAC_DEFINE_ERROR(NonFiniteGradient)
MCAC_DEFINE_ERROR(DegenerateRow)
MCAC_DEFINE_ERROR(RankDeficient)
MCAC_DEFINE_ERROR(DimensionMismatch)
MCAC_DEFINE_ERROR(VanishingGradient)
MCAC_DEFINE_ERROR(StalledStep)
MCAC_DEFINE_ERROR(InfeasibleStart)
MCAC_DEFINE_ERROR(InvalidArgument)
MCAC_DEFINE_ERROR(FormatError)
MCAC_DEFINE_ERROR(ConfigError)

#undef MCAC_DEFINE_ERROR

}  // namespace mcac
