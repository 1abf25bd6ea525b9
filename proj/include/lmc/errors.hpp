#pragma once

#include <stdexcept>
#include <string>

namespace lmc {

// Base class for every failure raised by the toolkit.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

#define LMC_DEFINE_ERROR(Name)                       \
    class Name : public Error {                      \
    public:                                          \
        explicit Name(const std::string& what)       \
            : Error(std::string(#Name ": ") + what) {} \
    }

LMC_DEFINE_ERROR(InvalidArgument);
LMC_DEFINE_ERROR(SingularRotation);
LMC_DEFINE_ERROR(GridTooSmall);
LMC_DEFINE_ERROR(RadiusOutOfRange);
LMC_DEFINE_ERROR(TooManyModes);
LMC_DEFINE_ERROR(OutOfDomain);
LMC_DEFINE_ERROR(ShapeMismatch);
LMC_DEFINE_ERROR(DidNotConverge);
LMC_DEFINE_ERROR(LinearSolveFailure);
LMC_DEFINE_ERROR(PhaseOutOfRange);
LMC_DEFINE_ERROR(WindowTooSmall);
LMC_DEFINE_ERROR(IllConditioned);
LMC_DEFINE_ERROR(NotHarmonic);
LMC_DEFINE_ERROR(DegenerateRadii);
LMC_DEFINE_ERROR(TailModelMissing);
LMC_DEFINE_ERROR(DomainTooSmall);
LMC_DEFINE_ERROR(ConfigError);
LMC_DEFINE_ERROR(FormatError);

#undef LMC_DEFINE_ERROR

}  // namespace lmc
