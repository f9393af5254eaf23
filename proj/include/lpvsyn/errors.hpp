#pragma once

#include <stdexcept>
#include <string>

namespace lpvsyn {

// Base class for all domain errors raised by the library. The CLI maps these
// to exit code 1; anything else escaping is a bug.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

#define LPVSYN_DEFINE_ERROR(name)                                   \
    class name : public Error {                                     \
    public:                                                         \
        explicit name(const std::string& msg) : Error(#name ": " + msg) {} \
    }

// Data ingestion
LPVSYN_DEFINE_ERROR(MissingCell);
LPVSYN_DEFINE_ERROR(NonMonotoneGrid);
LPVSYN_DEFINE_ERROR(NanSample);
LPVSYN_DEFINE_ERROR(UnknownChannel);
LPVSYN_DEFINE_ERROR(InvalidArgument);
LPVSYN_DEFINE_ERROR(IoError);

// LTI machinery
LPVSYN_DEFINE_ERROR(NonFiniteExponential);
LPVSYN_DEFINE_ERROR(SingularResolvent);
LPVSYN_DEFINE_ERROR(NotStabilizable);
LPVSYN_DEFINE_ERROR(NotDetectable);
LPVSYN_DEFINE_ERROR(ResidualTooLarge);

// Scheduling / parameterization
LPVSYN_DEFINE_ERROR(OutOfRange);
LPVSYN_DEFINE_ERROR(UnsupportedBasis);

// Conic solver
LPVSYN_DEFINE_ERROR(IllFormedProgram);
LPVSYN_DEFINE_ERROR(NumericalBreakdown);

// Synthesis
LPVSYN_DEFINE_ERROR(InfeasibleAtUpperBound);

// Analysis
LPVSYN_DEFINE_ERROR(NearOrigin);
LPVSYN_DEFINE_ERROR(GridTooCoarse);

// Simulation
LPVSYN_DEFINE_ERROR(Divergence);

#undef LPVSYN_DEFINE_ERROR

}  // namespace lpvsyn
