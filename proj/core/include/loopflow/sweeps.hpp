#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "loopflow/graphmaps.hpp"
#include "loopflow/semiflow.hpp"

namespace loopflow {

struct SweepSpec {
  std::vector<double> T_list;  // increasing, all >= T0 for the headline claims
  int gamma_count = 2;
  int zplus_count = 5;               // random samples; id 0 is always zero
  double zplus_radius_fraction = 0.5;  // of the plus ball rho/2c
  int v_count = 3;  // id 0 is the lowest plus eigenvector, rest random
  std::uint64_t seed = 0;
};

struct SweepRow {
  double T = 0.0;
  int gamma_id = -1;
  int zplus_id = -1;
  int v_id = -1;
  double dist_w12 = 0.0;     // ||Gamma^T(z+) - Gamma^inf(z+)||_W12
  double c1_dist_l2 = 0.0;   // ||X_v(0) - Y_v(0)||_L2
  double xnorm_ratio = 0.0;  // ||X_v(0)||_L2 / ||v||_L2
  double ynorm_dev = 0.0;    // ||Y_v(0) - v||_L2 / ||v||_L2
  double fiber_residual = 0.0;
  double endpoint_distance = 0.0;
  double max_ratio = 0.0;
  int iters = 0;
  std::string status = "ok";
};

struct SweepResult {
  std::vector<SweepRow> rows;
  double fitted_rate = 0.0;  // pooled decay rate (positive means decay)
  double bound_rate = 0.0;   // mu/4
  std::vector<double> group_rates;
  bool all_rows_ok = true;
};

// Deterministic sample sets shared by the sweeps.
std::vector<LoopField> sample_zplus(const Chart& chart,
                                    const ConstantsLedger& ledger, int count,
                                    double radius_fraction, std::uint64_t seed);
std::vector<LoopField> sample_directions(const Chart& chart, int count,
                                         std::uint64_t seed);

// Common-slope least squares of log(dist) against T with one intercept per
// group; returns the slope (groups must share the T grid).
double pooled_log_slope(const std::vector<std::vector<std::pair<double, double>>>& groups);

// Distance sweep behind the uniform-convergence claim: for every
// (T, gamma, z+) solves the mixed and infinite-horizon problems and fits the
// exponential decay rate of their distance.
SweepResult sweep_convergence(const Chart& chart, const ConstantsLedger& ledger,
                              const std::vector<SpherePoint>& sphere,
                              const SweepSpec& spec,
                              const ContractionOptions& opts, int jobs = 1);

// Linearization sweep behind the C1 claims: L2 bounds of the linearized graph
// maps and the decay rate of their difference.
SweepResult sweep_c1(const Chart& chart, const ConstantsLedger& ledger,
                     const std::vector<SpherePoint>& sphere,
                     const SweepSpec& spec, const ContractionOptions& opts,
                     int jobs = 1);

struct RoundtripRow {
  double T = 0.0;
  int gamma_id = -1;
  int zplus_id = -1;
  double fiber_residual = 0.0;      // ||pi_- phi_T(.) - gamma|| via evolve
  double endpoint_distance = 0.0;   // ||phi_T(.) - gamma|| via evolve
  double oracle_fiber_residual = 0.0;
  double oracle_disagreement = 0.0;  // |evolve - oracle| fiber residual gap
  bool within_r = false;
  std::string status = "ok";
};

struct RoundtripReport {
  std::vector<RoundtripRow> rows;
  double max_fiber_residual = 0.0;
  double max_oracle_disagreement = 0.0;
  bool all_within_r = true;
  bool all_rows_ok = true;
};

// Forward-evolves every graph point by T with both integrators and reports
// the fiber residuals of the time-T endpoint.
RoundtripReport roundtrip_audit(const Chart& chart, const ConstantsLedger& ledger,
                                const std::vector<SpherePoint>& sphere,
                                const SweepSpec& spec,
                                const ContractionOptions& opts,
                                const FlowOptions& flow, int jobs = 1);

struct LipschitzRow {
  double T = 0.0;
  double tau = 0.0;
  int gamma_id = -1;
  int zplus_id = -1;
  double quotient = 0.0;  // ||Gamma^{T+tau} - Gamma^T|| / tau
};

struct LipschitzReport {
  std::vector<LipschitzRow> rows;
  double max_quotient = 0.0;
  bool quotients_stabilize = true;  // successive tau-refinements settle
};

// Finite-difference Lipschitz-in-T audit of the graph map at a base time.
LipschitzReport lipschitz_in_T_audit(const Chart& chart,
                                     const ConstantsLedger& ledger,
                                     const std::vector<SpherePoint>& sphere,
                                     double T_base,
                                     const std::vector<double>& taus,
                                     const SweepSpec& spec,
                                     const ContractionOptions& opts);

}  // namespace loopflow
