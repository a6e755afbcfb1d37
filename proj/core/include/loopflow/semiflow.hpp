#pragma once

#include <limits>

#include "loopflow/model.hpp"
#include "loopflow/spectral.hpp"
#include "loopflow/trajectory.hpp"

namespace loopflow {

struct FlowOptions {
  TimeGridSpec grid = TimeGridSpec::graded(0.002);
  // Chart radius; a state beyond it flags LeftChart and truncates.
  double rho0 = std::numeric_limits<double>::infinity();
  // Rejection threshold for the corrector change of a single step.
  double step_tol = 1e-2;
};

// Forward integration of zeta' + A zeta = f(zeta) by per-step Duhamel
// stepping: exact per-eigenmode kernels for the linear part, piecewise-linear
// interpolation of f between endpoint evaluations, one corrector pass.
Trajectory evolve(const SpectralDecomposition& dec, const TorusModel& model,
                  const CriticalLoop& x, const LoopField& z, double T,
                  const FlowOptions& opts = {});

struct OracleOptions {
  double abs_tol = 1e-9;
  double rel_tol = 1e-9;
  double store_dt = 0.01;
  double min_step = 1e-10;
  double initial_dt = 1e-6;
};

// Independent cross-check: method of lines on the collocation grid (4th-order
// periodic finite differences for the second derivative, pointwise potential
// gradient) driven by an adaptive explicit Runge-Kutta pair.
Trajectory evolve_oracle(const TorusModel& model, const CriticalLoop& x,
                         const LoopField& z, double T,
                         const OracleOptions& opts = {});

// Max W^{1,2} discrepancy between the stored states and the right-hand side
// of the integral representation of the Cauchy problem, with the minus-part
// terms anchored at the node T_split (default: the final node).
double residual_representation(const SpectralDecomposition& dec,
                               const TorusModel& model, const CriticalLoop& x,
                               const Trajectory& traj, double T_split = -1.0);

// Action of x + zeta(s) at every node.
std::vector<double> action_along(const TorusModel& model, const CriticalLoop& x,
                                 const Trajectory& traj);

}  // namespace loopflow
