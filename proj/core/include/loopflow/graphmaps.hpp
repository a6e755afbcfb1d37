#pragma once

#include <limits>
#include <string>
#include <vector>

#include "loopflow/model.hpp"
#include "loopflow/semiflow.hpp"
#include "loopflow/spectral.hpp"
#include "loopflow/trajectory.hpp"

namespace loopflow {

// Immutable local-chart data around one hyperbolic critical loop.
struct Chart {
  TorusModel model;
  CriticalLoop x;
  SpectralDecomposition dec;
};

Chart make_chart(const TorusModel& model, const LoopField& guess,
                 const NewtonOptions& newton = {}, double mu_fraction = 0.5,
                 double degeneracy_tol = 1e-8);

// The constants bundle with the smallness inequalities of the hyperbolic
// estimates as machine-checked validity conditions. In empirical mode the
// inequalities are reported but validity is certified a posteriori by the
// measured contraction ratio of a probe solve.
struct ConstantsLedger {
  enum class Mode { Theoretical, Empirical };

  double c = 1.0;          // semigroup constant (audited or manual)
  double rho0 = 0.0;       // chart radius
  double rho = 0.0;        // contraction-space radius
  double r = 0.0;          // fiber radius
  double eps = 0.0;        // action drop of the descending sphere
  double mu = 0.0;         // rate in the spectral gap
  double kappa_star = 0.0; // Lipschitz constant of df
  double kappa_rho = 0.0;  // Lipschitz constant of f on the rho-ball
  double T1 = 0.0, T2 = 0.0, T0 = 0.0;
  Mode mode = Mode::Empirical;

  double plus_ball_radius() const { return rho / (2.0 * c); }

  static double time_to_fiber(double r, double rho0, double mu) {
    return -(2.0 / mu) * std::log(r / rho0);
  }
};

struct LedgerCheck {
  std::string name;
  double lhs = 0.0;
  double rhs = 0.0;
  bool pass = false;
};

struct LedgerReport {
  std::vector<LedgerCheck> checks;
  bool theoretical_valid = false;  // all smallness inequalities hold
  bool geometry_valid = false;     // positivity and radius/time consistency
  double probe_ratio = -1.0;       // measured contraction ratio, if probed
  bool valid = false;              // verdict per the ledger's mode
};

LedgerReport validate_ledger(const ConstantsLedger& ledger);

struct ContractionOptions {
  double fp_tol = 1e-10;
  int max_iter = 200;
  double stall_ratio = 0.9;
  double fiber_tol = 1e-6;
  TimeGridSpec grid = TimeGridSpec::graded(0.01);
  double tail_start = 10.0;  // stretch steps beyond this time
  double tail_ratio = 1.08;
  double tail_max_step = 0.5;
  double horizon_cap = 200.0;  // cap on the T = infinity truncation horizon
  double unstable_pad = 15.0;  // backward horizon beyond -T
};

// Result of a graph-map solve. For finite T the underlying trajectory is the
// mixed-problem semiflow line on [0, T]; for T = infinity it lives on the
// truncated horizon [0, S_max].
struct GraphPoint {
  double T = std::numeric_limits<double>::infinity();
  LoopField gamma;       // descending-sphere anchor (zero field for T = inf)
  LoopField z_plus;
  LoopField value;       // full graph point: trajectory state at s = 0
  LoopField graph_part;  // minus projection of the value
  Trajectory trajectory;
  int iters = 0;
  std::vector<double> ratios;  // per-iteration contraction factors, exp norm
  double fixed_point_residual = 0.0;
  double endpoint_fiber_residual = 0.0;  // ||pi_- xi(T) - gamma||_W12
  double endpoint_distance = 0.0;        // ||xi(T) - gamma||_W12
  bool endpoint_within_r = true;
  bool below_T0 = false;  // solve ran with 0 <= T < T0 (allowed, warned)
};

// Stable-manifold graph point: fixed point of the forward contraction with
// prescribed plus part z_plus, horizon truncated per the ledger.
GraphPoint solve_stable(const Chart& chart, const ConstantsLedger& ledger,
                        const LoopField& z_plus,
                        const ContractionOptions& opts = {});

struct UnstablePoint {
  Trajectory trajectory;  // grid on [-S, 0]
  LoopField endpoint;     // state at s = 0
  int iters = 0;
  std::vector<double> ratios;
  double fixed_point_residual = 0.0;
};

// Backward trajectory in the unstable manifold with pi_- endpoint z_minus.
// A caller-built grid (increasing, ending at 0) may be supplied.
UnstablePoint solve_unstable(const Chart& chart, const ConstantsLedger& ledger,
                             const LoopField& z_minus,
                             const ContractionOptions& opts = {},
                             const std::vector<double>* grid = nullptr);

struct SpherePoint {
  LoopField gamma;
  Eigen::VectorXd direction;  // unit vector in the minus eigen coordinates
  double delta = 0.0;         // scale of the generating z_minus
  double action_value = 0.0;
  Trajectory trajectory;      // generating backward trajectory
};

// Samples the descending sphere: per unstable direction, bisects the scale of
// z_minus until the endpoint action equals c - eps within action_tol.
// Morse index 1 gives two points, index 2 an equal-angle circle.
std::vector<SpherePoint> descending_sphere(const Chart& chart,
                                           const ConstantsLedger& ledger,
                                           double eps, int n_sphere = 16,
                                           double action_tol = 1e-8,
                                           const ContractionOptions& opts = {});

// Backward flow point on the unstable manifold at time -T through gamma.
LoopField backward_point(const Chart& chart, const ConstantsLedger& ledger,
                         const LoopField& gamma, double T,
                         const ContractionOptions& opts = {});

// Mixed Cauchy solve: plus part of the initial state and minus part of the
// time-T state prescribed; returns the time-T graph point over z_plus.
GraphPoint solve_mixed(const Chart& chart, const ConstantsLedger& ledger,
                       double T, const LoopField& gamma,
                       const LoopField& z_plus,
                       const ContractionOptions& opts = {});

// Linearized fixed point along the stored base trajectory; returns the
// derivative of the graph map at z_plus applied to v (finite T and infinite
// horizon alike, depending on the base point).
LoopField linearized_graph(const Chart& chart, const ConstantsLedger& ledger,
                           const GraphPoint& base, const LoopField& v,
                           const ContractionOptions& opts = {});

// Smallest 4t such that the backward flow at time -t maps every sampled
// sphere point into the rho-ball, read off the stored trajectories.
double find_T2(const Chart& chart, const ConstantsLedger& ledger,
               const std::vector<SpherePoint>& sphere);

// Pure inequality checks plus a probe solve measuring contraction ratios;
// required for declaring an empirical ledger valid.
LedgerReport validate_ledger_with_probe(const Chart& chart,
                                        const ConstantsLedger& ledger,
                                        const std::vector<SpherePoint>& sphere,
                                        const ContractionOptions& opts = {});

}  // namespace loopflow
