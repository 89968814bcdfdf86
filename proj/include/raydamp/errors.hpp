#pragma once

#include <stdexcept>
#include <string>

namespace raydamp {

// Base of every error raised by the library. Each subclass maps to one
// failure mode so callers can catch narrowly.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

#define RAYDAMP_ERROR(Name)                                                    \
  class Name : public Error {                                                  \
  public:                                                                      \
    explicit Name(const std::string& what) : Error(#Name ": " + what) {}       \
  }

// profiles
RAYDAMP_ERROR(ClassViolation);
RAYDAMP_ERROR(NonSymmetric);
RAYDAMP_ERROR(DegenerateCurvature);
RAYDAMP_ERROR(OutOfRange);

// rayleigh_core
RAYDAMP_ERROR(SingularEvaluation);
RAYDAMP_ERROR(NoConvergence);

// singular_integrals
RAYDAMP_ERROR(EndpointTooClose);
RAYDAMP_ERROR(NotEven);
RAYDAMP_ERROR(NonzeroOrigin);

// spectral_quantities / kernels
RAYDAMP_ERROR(DegenerateBoundary);
RAYDAMP_ERROR(SpectralDegeneracy);
RAYDAMP_ERROR(ParityViolation);

// evolution
RAYDAMP_ERROR(UnderResolved);
RAYDAMP_ERROR(SingularAssembly);
RAYDAMP_ERROR(DegenerateSeries);

// oracle
RAYDAMP_ERROR(NearSingular);
RAYDAMP_ERROR(StepFailure);

// cli
RAYDAMP_ERROR(ConfigError);
RAYDAMP_ERROR(MissingRun);

#undef RAYDAMP_ERROR

} // namespace raydamp
