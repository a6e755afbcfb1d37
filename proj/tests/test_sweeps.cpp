#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "fixtures.hpp"
#include "loopflow/io.hpp"
#include "loopflow/sweeps.hpp"

using namespace loopflow;
using namespace fixtures;

namespace {

struct SweepFixture {
  Chart chart = pendulum_chart(16);
  ConstantsLedger ledger;
  std::vector<SpherePoint> sphere;
  ContractionOptions opts;
  SweepSpec spec;

  SweepFixture() {
    ledger = pendulum_ledger();
    sphere = descending_sphere(chart, ledger, ledger.eps, 16, 1e-8, opts);
    ledger.T2 = find_T2(chart, ledger, sphere);
    ledger.T0 = std::max(ledger.T1, ledger.T2);
    spec.T_list = {ledger.T0, ledger.T0 + 1.0, ledger.T0 + 2.0};
    spec.gamma_count = 1;
    spec.zplus_count = 2;
    spec.zplus_radius_fraction = 0.5;
    spec.v_count = 2;
    spec.seed = 5;
  }
};

const SweepFixture& fx() {
  static SweepFixture f;
  return f;
}

}  // namespace

TEST_CASE("convergence sweep: identities, monotonicity, rate") {
  const SweepResult res = sweep_convergence(fx().chart, fx().ledger, fx().sphere,
                                            fx().spec, fx().opts, 2);
  CHECK(res.all_rows_ok);
  REQUIRE(res.rows.size() == 3 * 1 * 3);  // T x gamma x (zero + 2 samples)

  SUBCASE("z+ = 0 rows equal the backward-flow norm") {
    // backward_point and the mixed solve discretize the same trajectory on
    // different grids, so they agree to quadrature accuracy (~h^2), not to
    // fixed-point tolerance.
    for (const SweepRow& row : res.rows) {
      if (row.zplus_id != 0) continue;
      const LoopField gT = backward_point(fx().chart, fx().ledger,
                                          fx().sphere[row.gamma_id].gamma,
                                          row.T, fx().opts);
      CHECK(std::abs(row.dist_w12 - norm(gT, NormKind::w12())) <=
            2.0 * fx().opts.fp_tol + 1e-7 * (1.0 + norm(gT, NormKind::w12())));
    }
  }
  SUBCASE("distances shrink in T and the pooled rate clears the bound") {
    for (int z = 0; z < 3; ++z) {
      std::vector<double> d;
      for (const SweepRow& row : res.rows)
        if (row.zplus_id == z) d.push_back(row.dist_w12);
      REQUIRE(d.size() == 3);
      CHECK(d[1] <= d[0] * (1 + 1e-9) + 2 * fx().opts.fp_tol);
      CHECK(d[2] <= d[1] * (1 + 1e-9) + 2 * fx().opts.fp_tol);
    }
    const double rate_tol = 0.05 * fx().ledger.mu;
    CHECK(res.fitted_rate >= res.bound_rate - rate_tol);
    CHECK(res.bound_rate == doctest::Approx(fx().ledger.mu / 4).epsilon(1e-15));
  }
  SUBCASE("contraction ratios stay certified") {
    for (const SweepRow& row : res.rows) CHECK(row.max_ratio <= 0.6);
  }
}

TEST_CASE("c1 sweep: L2 bounds and decay of the derivative distance") {
  const SweepResult res = sweep_c1(fx().chart, fx().ledger, fx().sphere,
                                   fx().spec, fx().opts, 2);
  CHECK(res.all_rows_ok);
  REQUIRE(res.rows.size() == 3 * 1 * 3 * 2);
  for (const SweepRow& row : res.rows) {
    CHECK(row.xnorm_ratio <= 2.0);
    CHECK(row.ynorm_dev <= 0.25);
    // absolute form with the measured semigroup constant (v is L2-normalized)
    CHECK(row.c1_dist_l2 <=
          3.0 * fx().ledger.c * std::exp(-row.T * fx().ledger.mu / 4.0));
  }
  const double rate_tol = 0.05 * fx().ledger.mu;
  CHECK(res.fitted_rate >= res.bound_rate - rate_tol);
}

TEST_CASE("roundtrip audit: fibers reached within r, oracle agrees") {
  SweepSpec spec = fx().spec;
  spec.zplus_count = 1;
  FlowOptions flow;
  flow.rho0 = fx().ledger.rho0;
  // errors in the graph point and in the forward flow are both amplified by
  // e^{T |lambda_1|}; refine both quadratures so the z+ = 0 rows reach the
  // closed-form roundtrip level
  flow.grid = TimeGridSpec::graded(0.0005);
  ContractionOptions fine = fx().opts;
  fine.grid = TimeGridSpec::graded(0.0025);
  const RoundtripReport rep = roundtrip_audit(fx().chart, fx().ledger,
                                              fx().sphere, spec, fine,
                                              flow, 2);
  CHECK(rep.all_rows_ok);
  CHECK(rep.all_within_r);
  CHECK(rep.max_fiber_residual < 1e-5);
  CHECK(rep.max_oracle_disagreement < 1e-5);
  for (const RoundtripRow& row : rep.rows) {
    CHECK(row.endpoint_distance <= fx().ledger.r);
    if (row.zplus_id == 0) CHECK(row.fiber_residual < 1e-6);
  }
}

TEST_CASE("Lipschitz-in-T quotients are bounded and settle") {
  SweepSpec spec = fx().spec;
  spec.zplus_count = 1;
  const LipschitzReport rep =
      lipschitz_in_T_audit(fx().chart, fx().ledger, fx().sphere, fx().ledger.T0,
                           {0.1, 0.05, 0.025}, spec, fx().opts);
  CHECK(rep.quotients_stabilize);
  // bound of the form rho0 * c1 with c1 = 2(c^2 |lambda_1| + 1)
  const double c1 = 2.0 * (fx().ledger.c * fx().ledger.c * 1.0 + 1.0);
  CHECK(rep.max_quotient <= fx().ledger.rho0 * c1);

  SUBCASE("z+ = 0 quotient matches the closed-form time derivative") {
    const double zg = fx().sphere[0].gamma.coeff(0, 0).real();
    const double T = fx().ledger.T0;
    const double tau = 0.02;
    const GraphPoint lo = solve_mixed(fx().chart, fx().ledger, T - tau,
                                      fx().sphere[0].gamma, LoopField(1, 16),
                                      fx().opts);
    const GraphPoint hi = solve_mixed(fx().chart, fx().ledger, T + tau,
                                      fx().sphere[0].gamma, LoopField(1, 16),
                                      fx().opts);
    const double quotient =
        norm(hi.value - lo.value, NormKind::w12()) / (2 * tau);
    // d/dT of the backward flow point is minus the vector field there
    const double want = std::abs(std::sin(pend_flow(zg, -T)));
    CHECK(rel_err(quotient, want) < 1e-4);
  }
}

TEST_CASE("sweeps are deterministic") {
  SweepSpec spec = fx().spec;
  spec.zplus_count = 1;
  const SweepResult a = sweep_convergence(fx().chart, fx().ledger, fx().sphere,
                                          spec, fx().opts, 1);
  const SweepResult b = sweep_convergence(fx().chart, fx().ledger, fx().sphere,
                                          spec, fx().opts, 3);
  CHECK(io::sweep_csv(a) == io::sweep_csv(b));
  CHECK(a.fitted_rate == b.fitted_rate);
}

TEST_CASE("pooled slope with per-group intercepts") {
  // two groups with identical slope -2 but different offsets
  std::vector<std::vector<std::pair<double, double>>> groups(2);
  for (double t : {0.0, 1.0, 2.0, 3.0}) {
    groups[0].push_back({t, 5.0 - 2.0 * t});
    groups[1].push_back({t, 1.0 - 2.0 * t});
  }
  CHECK(pooled_log_slope(groups) == doctest::Approx(-2.0).epsilon(1e-13));
}
