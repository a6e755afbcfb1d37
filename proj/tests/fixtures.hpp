#pragma once

// Shared pendulum/torus fixtures and closed-form pendulum flow used as the
// independent oracle across the test suites.

#include <cmath>

#include "loopflow/graphmaps.hpp"

namespace fixtures {

using namespace loopflow;

inline TorusModel pendulum_model(double a = 1.0) {
  PotentialTerm t;
  t.amplitude = a;
  t.wavevector = Eigen::VectorXi::Ones(1);
  t.time_mode = 0;
  t.phase = 0.0;
  t.kind = PotentialTerm::Kind::Cos;
  return TorusModel(1, {t});
}

inline TorusModel torus2_model(double a1 = 1.0, double a2 = 0.5) {
  PotentialTerm t1, t2;
  t1.amplitude = a1;
  t1.wavevector = (Eigen::VectorXi(2) << 1, 0).finished();
  t1.kind = PotentialTerm::Kind::Cos;
  t2.amplitude = a2;
  t2.wavevector = (Eigen::VectorXi(2) << 0, 1).finished();
  t2.kind = PotentialTerm::Kind::Cos;
  return TorusModel(2, {t1, t2});
}

inline TorusModel zero_model(int dim = 1) { return TorusModel(dim, {}); }

inline LoopField const_field(double v, int J, int n = 1) {
  return LoopField::constant(Eigen::VectorXd::Constant(n, v), J);
}

// Pendulum chart at the hyperbolic critical loop x = pi.
inline Chart pendulum_chart(int J = 32) {
  return make_chart(pendulum_model(), const_field(3.0, J));
}

inline Chart torus2_chart(int J = 16) {
  TorusModel m = torus2_model();
  return make_chart(m, LoopField::constant(
                           Eigen::VectorXd::Constant(2, 3.0), J));
}

inline ConstantsLedger pendulum_ledger(double rho0 = 1.7, double rho = 0.8,
                                       double r = 0.85, double eps = 0.3,
                                       double mu = 0.5) {
  ConstantsLedger led;
  led.c = 1.0;
  led.rho0 = rho0;
  led.rho = rho;
  led.r = r;
  led.eps = eps;
  led.mu = mu;
  led.kappa_rho = 0.28;
  led.kappa_star = 0.6;
  led.T1 = ConstantsLedger::time_to_fiber(r, rho0, mu);
  led.T2 = 0.0;
  led.T0 = led.T1;
  led.mode = ConstantsLedger::Mode::Empirical;
  return led;
}

// zeta' = sin(zeta): the spatially constant pendulum chart dynamics.
inline double pend_flow(double z0, double s) {
  return 2.0 * std::atan(std::tan(0.5 * z0) * std::exp(s));
}

inline double rel_err(double got, double want) {
  return std::abs(got - want) / std::max(1e-300, std::abs(want));
}

}  // namespace fixtures
