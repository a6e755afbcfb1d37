#pragma once

#include <stdexcept>
#include <string>

namespace loopflow {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Size/shape mismatch between grid and spectral data.
struct DimensionError : Error {
  using Error::Error;
};

// Time grids that were required to coincide do not.
struct GridError : Error {
  using Error::Error;
};

struct ConfigError : Error {
  using Error::Error;
};

// Newton iteration exhausted its budget.
struct NoConvergence : Error {
  using Error::Error;
};

// Linearized critical-point system numerically singular.
struct SingularJacobian : Error {
  using Error::Error;
};

// An eigenvalue sits inside the degeneracy tolerance: hyperbolicity fails.
struct DegenerateCriticalPoint : Error {
  using Error::Error;
};

// Backward time requested outside the finite-dimensional subspace group.
struct NegativeTimeOnPlus : Error {
  using Error::Error;
};

// Corrector pass moved the state by more than step_tol.
struct StepRejected : Error {
  using Error::Error;
};

// Oracle integrator step size collapsed.
struct StiffnessAbort : Error {
  using Error::Error;
};

// Fixed-point iteration ceased to contract.
struct ContractionStall : Error {
  using Error::Error;
};

// Input violates the ball precondition of a contraction solve.
struct BallViolation : Error {
  using Error::Error;
};

// Endpoint conditions of a mixed solve exceed fiber_tol.
struct FiberMiss : Error {
  using Error::Error;
};

// Action level could not be bracketed inside the chart.
struct BisectionFail : Error {
  using Error::Error;
};

}  // namespace loopflow
