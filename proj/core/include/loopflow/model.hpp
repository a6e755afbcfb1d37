#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <limits>
#include <vector>

#include "loopflow/loopfield.hpp"

namespace loopflow {

// One term amp * cos(k.q + 2 pi m t + phase) (or sin) of a trigonometric
// polynomial potential on the flat torus. All derivatives are exact.
struct PotentialTerm {
  enum class Kind { Cos, Sin };

  double amplitude = 0.0;
  Eigen::VectorXi wavevector;  // k, one integer per target component
  int time_mode = 0;           // m
  double phase = 0.0;
  Kind kind = Kind::Cos;
};

// Flat torus target R^n mod 2pi with a time-periodic trig-polynomial
// potential V(t, q). Curvature vanishes, so the covariant derivatives of the
// exponential map reduce to the identities E_1 = E_2 = 1, E_ij = 0; the
// curvature hook below is the extension point where a curved target would
// contribute and is empty for every flat model.
class TorusModel {
 public:
  TorusModel() = default;  // empty placeholder, assign before use
  TorusModel(int dim, std::vector<PotentialTerm> terms);

  int dim() const { return dim_; }
  const std::vector<PotentialTerm>& terms() const { return terms_; }

  double potential(double t, const Eigen::VectorXd& q) const;
  Eigen::VectorXd grad_potential(double t, const Eigen::VectorXd& q) const;
  Eigen::MatrixXd hess_potential(double t, const Eigen::VectorXd& q) const;

  // Curvature contribution R(zeta, x') x' of a curved target; identically
  // zero here. Kept as the documented slot where the remaining terms of the
  // chart nonlinearity would enter off flat space.
  Eigen::VectorXd curvature_term(double /*t*/, const Eigen::VectorXd& /*xdot*/,
                                 const Eigen::VectorXd& zeta) const {
    return Eigen::VectorXd::Zero(zeta.size());
  }

 private:
  int dim_ = 0;
  std::vector<PotentialTerm> terms_;
};

struct CriticalLoop {
  LoopField x;
  double action = 0.0;
  double residual = 0.0;  // L2 norm of -x'' - grad V_t(x)
};

// S_V(u) = int (|u'|^2 / 2 - V_t(u)) dt; kinetic part spectral, potential by
// the rectangle rule on the collocation grid.
double action(const TorusModel& model, const LoopField& u);

// L2 gradient -u'' - grad V_t(u) as a LoopField.
LoopField action_gradient(const TorusModel& model, const LoopField& u);

// Galerkin matrix of zeta -> -zeta'' - Hess V_t(u(t)) zeta in the real
// orthonormal Fourier basis; symmetric by construction.
Eigen::MatrixXd galerkin_operator_matrix(const TorusModel& model,
                                         const LoopField& u);

struct NewtonOptions {
  double tol = 1e-10;
  int max_iter = 50;
  double singular_tol = 1e-12;
};

CriticalLoop find_critical_loop(const TorusModel& model, const LoopField& guess,
                                const NewtonOptions& opts = {});

// Chart nonlinearity of the local Cauchy problem, pointwise on the grid:
//   f(zeta)(t) = grad V_t(x + zeta) - grad V_t(x) - Hess V_t(x) zeta.
// f(0) = 0 and df(0) = 0 hold exactly. Exceeding rho0_warn does not fail;
// the warning surfaces through the returned flag of solvers instead.
LoopField nonlinearity(const TorusModel& model, const CriticalLoop& x,
                       const LoopField& zeta,
                       double rho0_warn = std::numeric_limits<double>::infinity());

// df(zeta) v = (Hess V_t(x + zeta) - Hess V_t(x)) v, pointwise on the grid.
LoopField dnonlinearity(const TorusModel& model, const CriticalLoop& x,
                        const LoopField& zeta, const LoopField& v);

// Empirical lower estimates of the Lipschitz data of f on the rho-ball:
//   kappa(rho)      from ||f(xi)-f(eta)||_L1 / ||xi-eta||_W12,
//   kappa_star      from the df difference quotient,
//   sup_ratio_c_inf from ||xi||_inf / ||xi||_W12 (discrete Sobolev ratio).
// Sample shapes are drawn from the seed and scaled by rho, so estimates are
// nondecreasing in rho for a fixed seed.
struct KappaEstimate {
  double kappa = 0.0;
  double kappa_star = 0.0;
  double sup_ratio_c_inf = 0.0;
};

KappaEstimate estimate_kappa(const TorusModel& model, const CriticalLoop& x,
                             double rho, int samples, std::uint64_t seed);

}  // namespace loopflow
