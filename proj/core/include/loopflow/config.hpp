#pragma once

#include <cstdint>
#include <string>

#include "loopflow/graphmaps.hpp"
#include "loopflow/semiflow.hpp"
#include "loopflow/sweeps.hpp"

namespace loopflow {

// Run configuration ingested from a single JSON file. Unknown keys are
// rejected; every numeric knob below carries its default.
struct RunConfig {
  // model
  int dim = 1;
  std::vector<PotentialTerm> terms;
  int truncation_J = 32;
  Eigen::VectorXd guess;  // constant initial loop for the Newton solve

  TimeGridSpec flow_grid = TimeGridSpec::graded(0.002);
  TimeGridSpec solver_grid = TimeGridSpec::graded(0.01);
  double tail_start = 10.0;
  double tail_ratio = 1.08;
  double tail_max_step = 0.5;
  double unstable_pad = 15.0;
  double horizon_cap = 200.0;

  struct LedgerConfig {
    std::string mode = "empirical";  // or "theoretical"
    double c = -1.0;                 // negative: measure via smoothing audit
    double rho0 = 1.5;
    double rho = 0.6;
    double r = 0.75;
    double eps = 0.3;
    double mu = -1.0;          // explicit rate, or negative: use mu_fraction
    double mu_fraction = 0.5;  // of the spectral gap
    double kappa = -1.0;       // negative: estimate by sampling
    double kappa_star = -1.0;  // negative: estimate by sampling
    int kappa_samples = 200;
  } ledger;

  struct Tolerances {
    double fp_tol = 1e-10;
    double fiber_tol = 1e-6;
    double action_tol = 1e-8;
    double degeneracy_tol = 1e-8;
    double rate_tol_fraction = 0.05;  // of mu
    double newton_tol = 1e-10;
    double step_tol = 1e-2;
    double stall_ratio = 0.9;
  } tol;

  struct SweepConfig {
    std::vector<double> T_offsets = {0.0, 0.5, 1.0, 1.5, 2.0, 2.5, 3.0, 3.5, 4.0};
    int gamma_count = 2;
    int zplus_count = 5;
    double zplus_radius_fraction = 0.5;
    int v_count = 3;
    int n_sphere = 16;
  } sweep;

  std::string output_dir = "out";
  std::uint64_t seed = 1;
  int jobs = 1;

  std::string canonical_json;  // sorted-key dump of the parsed file
};

RunConfig parse_config_text(const std::string& json_text);
RunConfig load_config(const std::string& path);

// FNV-1a hash of the canonical JSON dump, as 16 hex digits.
std::string config_hash(const RunConfig& cfg);

// Everything the subcommands need, resolved once per run: chart, ledger
// (constants measured or taken from the config), sphere samples, validation.
struct Session {
  RunConfig cfg;
  Chart chart;
  ConstantsLedger ledger;
  std::vector<SpherePoint> sphere;
  LedgerReport report;
  std::string hash;

  ContractionOptions contraction_options() const;
  FlowOptions flow_options() const;
  SweepSpec sweep_spec() const;
};

Session build_session(const RunConfig& cfg);

// Parse a field literal: {"constant":[...]} or
// {"harmonics":[{"j":1,"m":0,"cos":0.05,"sin":0.0}, ...]} (cos/sin are the
// coefficients of cos(2 pi j t) and sin(2 pi j t)).
LoopField parse_field_text(const std::string& json_text, int dim, int modes);

}  // namespace loopflow
