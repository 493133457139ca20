#pragma once
// Failure types thrown by the numerical routines. Everything derives from
// Error so callers that only care about pass/fail can catch one type.

#include <stdexcept>
#include <string>

namespace allab {

struct Error : std::runtime_error {
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

#define ALLAB_ERROR_TYPE(Name)                                  \
  struct Name : Error {                                         \
    explicit Name(const std::string& msg) : Error(msg) {}       \
  }

// spectral machinery
ALLAB_ERROR_TYPE(ZeroSpectralParameter);
ALLAB_ERROR_TYPE(NoConvergence);
ALLAB_ERROR_TYPE(NotSimpleCritical);
ALLAB_ERROR_TYPE(BranchAmbiguity);

// mode frame
ALLAB_ERROR_TYPE(DegenerateDenominator);
ALLAB_ERROR_TYPE(SingularModeSystem);
ALLAB_ERROR_TYPE(ZeroCarrier);

// Darboux machinery and closed-form orbits
ALLAB_ERROR_TYPE(ZeroEigenfunction);
ALLAB_ERROR_TYPE(EigenfunctionResidualTooLarge);
ALLAB_ERROR_TYPE(PoleInLambda);

// Melnikov layer
ALLAB_ERROR_TYPE(DegenerateF1);
ALLAB_ERROR_TYPE(NoRoot);
ALLAB_ERROR_TYPE(DegenerateRoot);
ALLAB_ERROR_TYPE(ToleranceNotMet);

// resonant annulus
ALLAB_ERROR_TYPE(ZeroModulus);
ALLAB_ERROR_TYPE(NegativeModulus);
ALLAB_ERROR_TYPE(BoundaryCase);
ALLAB_ERROR_TYPE(ContinuationFailure);
ALLAB_ERROR_TYPE(IndeterminateKind);
ALLAB_ERROR_TYPE(NoSaddle);

// time stepping
ALLAB_ERROR_TYPE(StepSizeUnderflow);
ALLAB_ERROR_TYPE(InsufficientDecade);

#undef ALLAB_ERROR_TYPE

}
