#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "fixtures.hpp"
#include "loopflow/semiflow.hpp"
#include "loopflow/sweeps.hpp"

#include <utility>

using namespace loopflow;
using namespace fixtures;

namespace {

// Shared pendulum fixture at J = 16 (spectrally converged for these fields;
// keeps the suite fast).
struct Fixture {
  Chart chart = pendulum_chart(16);
  ConstantsLedger ledger = pendulum_ledger();
  ContractionOptions opts;
};

const Fixture& fix() {
  static Fixture f;
  return f;
}

LoopField plus_unit_w12(const Chart& chart, int which = 0) {
  LoopField v = chart.dec.eigenfield(chart.dec.morse_index() + which);
  v *= 1.0 / norm(v, NormKind::w12());
  return v;
}

// A plus-part direction whose cube has nonzero mean (same-phase first and
// second harmonics), so the graph value is genuinely curved: the pendulum
// nonlinearity is odd and the leading graph response is cubic in the scale.
LoopField mixed_plus_direction(const Chart& chart) {
  LoopField f(1, chart.dec.modes());
  f.set_coeff(1, 0, {0.5, 0.0});   // cos(2 pi t)
  f.set_coeff(2, 0, {0.25, 0.0});  // 0.5 cos(4 pi t)
  LoopField p = project(chart.dec, f, Part::Plus);
  p *= 1.0 / norm(p, NormKind::w12());
  return p;
}

}  // namespace

TEST_CASE("ledger validation evaluates the smallness inequalities") {
  SUBCASE("bracket value at c = kappa* = 1, mu = 1/2") {
    ConstantsLedger led;
    led.c = 1.0;
    led.kappa_star = 1.0;
    led.kappa_rho = 0.0;
    led.mu = 0.5;
    led.rho0 = 7e-3;
    led.rho = 3e-3;
    led.r = 5e-3;
    led.eps = 0.1;
    led.T1 = ConstantsLedger::time_to_fiber(led.r, led.rho0, led.mu);
    led.T0 = led.T1;
    led.mode = ConstantsLedger::Mode::Theoretical;
    const LedgerReport rep = validate_ledger(led);
    const double bracket = 9.0 / std::pow(0.5, 0.25) + 4.0 / 1.5 + 4.0;
    CHECK(bracket == doctest::Approx(17.369530701691156).epsilon(1e-12));
    for (const LedgerCheck& c : rep.checks)
      if (c.name == "rho0_smallness")
        CHECK(c.lhs == doctest::Approx(led.rho0 * bracket).epsilon(1e-12));
    CHECK(rep.valid);  // 7e-3 < 1/(8 * 17.3695...) = 7.1965e-3

    led.rho0 = 8e-3;
    led.T1 = ConstantsLedger::time_to_fiber(led.r, led.rho0, led.mu);
    led.T0 = led.T1;
    CHECK_FALSE(validate_ledger(led).theoretical_valid);
  }
  SUBCASE("time to reach the fiber") {
    CHECK(ConstantsLedger::time_to_fiber(0.05, 0.1, 0.5) ==
          doctest::Approx(2.772588722239781).epsilon(1e-12));
  }
  SUBCASE("r >= rho0 invalidates the ledger") {
    ConstantsLedger led = pendulum_ledger();
    led.r = led.rho0 * 1.5;
    led.T1 = 0.0;
    led.T0 = led.T2;
    const LedgerReport rep = validate_ledger(led);
    bool r_checked = false;
    for (const LedgerCheck& c : rep.checks)
      if (c.name == "r_below_rho0") {
        CHECK_FALSE(c.pass);
        r_checked = true;
      }
    CHECK(r_checked);
    CHECK_FALSE(rep.valid);
  }
}

TEST_CASE("stable solve at z+ = 0 returns the fixed point itself") {
  const GraphPoint gp = solve_stable(fix().chart, fix().ledger,
                                     LoopField(1, 16), fix().opts);
  CHECK(gp.value.real_coeffs().cwiseAbs().maxCoeff() == 0.0);
  CHECK(gp.graph_part.real_coeffs().cwiseAbs().maxCoeff() == 0.0);
  CHECK(gp.fixed_point_residual == 0.0);
}

TEST_CASE("graph value is quadratically tangent at the origin") {
  const LoopField dir = mixed_plus_direction(fix().chart);
  const double base = fix().ledger.plus_ball_radius();
  std::vector<double> scales{1.0, 0.5, 0.25, 0.125};
  std::vector<double> gnorm;
  for (double sc : scales) {
    LoopField zp = dir;
    zp *= base * sc;
    const GraphPoint gp = solve_stable(fix().chart, fix().ledger, zp, fix().opts);
    gnorm.push_back(norm(gp.graph_part, NormKind::w12()));
  }
  // log-log slope between successive halvings stays >= 2 - tol
  for (std::size_t i = 1; i < scales.size(); ++i) {
    const double slope = std::log(gnorm[i - 1] / gnorm[i]) / std::log(2.0);
    CHECK(slope >= 2.0 - 0.1);
  }
  CHECK(gnorm.front() > 1e-8);  // the graph is genuinely curved here
}

TEST_CASE("stable trajectory lives in the exponential space and decays") {
  LoopField zp = plus_unit_w12(fix().chart);
  zp *= 0.5 * fix().ledger.plus_ball_radius();
  const GraphPoint gp = solve_stable(fix().chart, fix().ledger, zp, fix().opts);
  const double mu = fix().ledger.mu;

  // membership in the weighted space: e^{s mu/2} ||eta(s)|| <= rho
  for (int i = 0; i < gp.trajectory.size(); ++i) {
    const double v = std::exp(0.5 * mu * gp.trajectory.grid[i]) *
                     norm(gp.trajectory.states[i], NormKind::w12());
    CHECK(v <= fix().ledger.rho * (1.0 + 1e-9));
  }

  // independent forward evolution from the graph point decays accordingly
  const Trajectory fwd = evolve(fix().chart.dec, fix().chart.model, fix().chart.x,
                                gp.value, 2.0);
  const double n0 = norm(gp.value, NormKind::w12());
  CHECK(norm(fwd.back(), NormKind::w12()) <=
        n0 * std::exp(-0.5 * mu * 2.0) * (1.0 + 1e-6));

  // fitted slope of log ||eta(s)|| over s in [1, 10] decays at least mu/2
  std::vector<std::pair<double, double>> pts;
  for (int i = 0; i < gp.trajectory.size(); ++i) {
    const double sgrid = gp.trajectory.grid[i];
    if (sgrid < 1.0 || sgrid > 10.0) continue;
    const double w = norm(gp.trajectory.states[i], NormKind::w12());
    if (w > 0) pts.emplace_back(sgrid, std::log(w));
  }
  REQUIRE(pts.size() >= 5);
  const double slope = pooled_log_slope({pts});
  CHECK(slope <= -0.5 * mu);
}

TEST_CASE("unstable solve reproduces the constant-mode backward flow") {
  SUBCASE("zero data stays at the fixed point") {
    const UnstablePoint up = solve_unstable(fix().chart, fix().ledger,
                                            LoopField(1, 16), fix().opts);
    CHECK(up.endpoint.real_coeffs().cwiseAbs().maxCoeff() == 0.0);
  }
  SUBCASE("closed form for constant data") {
    const double delta = 0.3;
    const UnstablePoint up = solve_unstable(fix().chart, fix().ledger,
                                            const_field(delta, 16), fix().opts);
    CHECK(norm(up.endpoint - const_field(delta, 16), NormKind::w12()) < 1e-9);
    for (int i = 0; i < up.trajectory.size(); ++i) {
      const double s = up.trajectory.grid[i];
      const double want = pend_flow(delta, s);
      CHECK(norm(up.trajectory.states[i] - const_field(want, 16),
                 NormKind::w12()) < 1e-6);
    }
  }
  SUBCASE("backward decay inside the weighted ball") {
    const UnstablePoint up = solve_unstable(fix().chart, fix().ledger,
                                            const_field(0.5, 16), fix().opts);
    const double mu = fix().ledger.mu;
    for (int i = 0; i < up.trajectory.size(); ++i) {
      const double v = std::exp(-0.5 * mu * up.trajectory.grid[i]) *
                       norm(up.trajectory.states[i], NormKind::w12());
      CHECK(v <= fix().ledger.rho * (1.0 + 1e-9));
    }
  }
  SUBCASE("data outside the rho ball is rejected") {
    CHECK_THROWS_AS(solve_unstable(fix().chart, fix().ledger,
                                   const_field(2.0, 16), fix().opts),
                    BallViolation);
  }
}

TEST_CASE("descending sphere of the pendulum") {
  SUBCASE("eps = 1/2 gives constant loops at +-arccos(1/2)") {
    ConstantsLedger led = pendulum_ledger(2.4, 1.15, 1.2, 0.5);
    const auto sphere =
        descending_sphere(fix().chart, led, 0.5, 16, 1e-8, fix().opts);
    REQUIRE(sphere.size() == 2);
    const double want = std::acos(0.5);  // = pi/3 = 1.0471975...
    CHECK(want == doctest::Approx(1.0471975511965976).epsilon(1e-12));
    CHECK(std::abs(sphere[0].gamma.coeff(0, 0).real() - want) < 1e-6);
    CHECK(std::abs(sphere[1].gamma.coeff(0, 0).real() + want) < 1e-6);
    for (const SpherePoint& sp : sphere)
      CHECK(std::abs(sp.action_value - (1.0 - 0.5)) <= 1e-8);
  }
  SUBCASE("sphere collapses to the critical point as eps -> 0") {
    double prev = 1e9;
    for (double eps : {0.3, 0.15, 0.075}) {
      const auto sphere = descending_sphere(fix().chart, fix().ledger, eps, 16,
                                            1e-8, fix().opts);
      const double reach = norm(sphere[0].gamma, NormKind::w12());
      CHECK(reach < 0.8 * prev);
      prev = reach;
    }
  }
  SUBCASE("action level outside the admissible ball fails loudly") {
    CHECK_THROWS_AS(descending_sphere(fix().chart, fix().ledger, 1.9, 16, 1e-8,
                                      fix().opts),
                    BisectionFail);
  }
}

TEST_CASE("index-2 sphere on the product model hits the level set") {
  const Chart chart = torus2_chart(12);
  ConstantsLedger led = pendulum_ledger(2.1, 1.0, 1.0, 0.2, 0.25);
  const double c = chart.x.action;
  CHECK(c == doctest::Approx(1.5).epsilon(1e-12));
  const auto sphere = descending_sphere(chart, led, 0.2, 8, 1e-8, fix().opts);
  REQUIRE(sphere.size() == 8);
  for (const SpherePoint& sp : sphere) {
    CHECK(std::abs(sp.action_value - (c - 0.2)) <= 1e-8);
    CHECK(std::abs(action(chart.model, chart.x.x + sp.gamma) - (c - 0.2)) <=
          1e-8);
  }
}

TEST_CASE("backward flow point on the unstable manifold") {
  SUBCASE("closed form at gamma = pi/2, T = ln 2") {
    ConstantsLedger led = pendulum_ledger(3.3, 1.6, 1.65, 1.0);
    const LoopField gamma = const_field(M_PI / 2, 16);
    // the trajectory is strongly curved out here; refine the quadrature grid
    ContractionOptions fine = fix().opts;
    fine.grid = TimeGridSpec::graded(0.0025);
    const LoopField got =
        backward_point(fix().chart, led, gamma, std::log(2.0), fine);
    const double want = 2.0 * std::atan(0.5);  // = 0.92729521...
    CHECK(want == doctest::Approx(0.9272952180016122).epsilon(1e-12));
    CHECK(norm(got - const_field(want, 16), NormKind::w12()) < 1e-6);
  }
  SUBCASE("T = 0 is the identity") {
    const LoopField gamma = const_field(0.4, 16);
    const LoopField got = backward_point(fix().chart, fix().ledger, gamma, 0.0,
                                         fix().opts);
    CHECK(norm(got - gamma, NormKind::w12()) == 0.0);
  }
  SUBCASE("decay bound for T >= T2") {
    const auto sphere = descending_sphere(fix().chart, fix().ledger,
                                          fix().ledger.eps, 16, 1e-8, fix().opts);
    ConstantsLedger led = fix().ledger;
    led.T2 = find_T2(fix().chart, led, sphere);
    for (double T : {led.T2 + 0.5, led.T2 + 1.5, led.T2 + 3.0}) {
      const LoopField gT =
          backward_point(fix().chart, led, sphere[0].gamma, T, fix().opts);
      CHECK(norm(gT, NormKind::w12()) <=
            led.rho * std::exp(-0.5 * led.mu * T) * (1.0 + 1e-9));
    }
  }
}

TEST_CASE("mixed solve: endpoint conditions, ratios, identities") {
  const auto sphere = descending_sphere(fix().chart, fix().ledger,
                                        fix().ledger.eps, 16, 1e-8, fix().opts);
  ConstantsLedger led = fix().ledger;
  led.T2 = find_T2(fix().chart, led, sphere);
  led.T0 = std::max(led.T1, led.T2);
  const double T = led.T0 + 0.5;
  const LoopField gamma = sphere[0].gamma;

  SUBCASE("z+ = 0 recovers the backward flow point") {
    const GraphPoint gp =
        solve_mixed(fix().chart, led, T, gamma, LoopField(1, 16), fix().opts);
    const LoopField gT = backward_point(fix().chart, led, gamma, T, fix().opts);
    CHECK(norm(gp.value - gT, NormKind::w12()) < 1e-6);
    // closed form through the sphere coordinate
    const double zg = gamma.coeff(0, 0).real();
    const double want = pend_flow(zg, -T);
    CHECK(norm(gp.value - const_field(want, 16), NormKind::w12()) < 1e-6);
    CHECK(gp.endpoint_fiber_residual < 1e-10);
  }

  LoopField zp = plus_unit_w12(fix().chart);
  zp *= 0.5 * led.plus_ball_radius();
  const GraphPoint gp = solve_mixed(fix().chart, led, T, gamma, zp, fix().opts);

  SUBCASE("plus part of the value is exactly z+") {
    const LoopField pp = project(fix().chart.dec, gp.value, Part::Plus);
    CHECK(norm(pp - zp, NormKind::w12()) < 1e-13);
  }
  SUBCASE("contraction certificate and fixed-point residual") {
    for (double r : gp.ratios) CHECK(r <= 0.6);
    CHECK(gp.fixed_point_residual < 10 * fix().opts.fp_tol);
    CHECK(gp.endpoint_within_r);
    CHECK_FALSE(gp.below_T0);
  }
  SUBCASE("roundtrip: forward evolution lands on the fiber") {
    FlowOptions flow;
    flow.rho0 = led.rho0;
    const Trajectory fwd = evolve(fix().chart.dec, fix().chart.model,
                                  fix().chart.x, gp.value, T, flow);
    const LoopField end = fwd.back();
    CHECK(norm(project(fix().chart.dec, end, Part::Minus) -
                   project(fix().chart.dec, gamma, Part::Minus),
               NormKind::w12()) < 1e-5);
    CHECK(norm(end - gamma, NormKind::w12()) <= led.r);
  }
  SUBCASE("bi-Lipschitz bounds over sampled pairs") {
    const std::vector<LoopField> zs =
        sample_zplus(fix().chart, led, 3, 0.5, 99);
    std::vector<GraphPoint> gps;
    for (const LoopField& z : zs)
      gps.push_back(solve_mixed(fix().chart, led, T, gamma, z, fix().opts));
    for (std::size_t i = 0; i < zs.size(); ++i)
      for (std::size_t j = i + 1; j < zs.size(); ++j) {
        const double dz = norm(zs[i] - zs[j], NormKind::w12());
        const double dg = norm(gps[i].value - gps[j].value, NormKind::w12());
        CHECK(dg >= 0.5 * dz * (1 - 1e-9));
        CHECK(dg <= 2.0 * led.c * dz * (1 + 1e-9));
      }
  }
  SUBCASE("below T0 is allowed and flagged") {
    const GraphPoint low =
        solve_mixed(fix().chart, led, 0.5 * led.T0, gamma, zp, fix().opts);
    CHECK(low.below_T0);
    CHECK(low.endpoint_fiber_residual < 1e-10);
  }
  SUBCASE("ball violations are rejected") {
    LoopField big = plus_unit_w12(fix().chart);
    big *= 2.0 * led.plus_ball_radius();
    CHECK_THROWS_AS(solve_mixed(fix().chart, led, T, gamma, big, fix().opts),
                    BallViolation);
  }
}

TEST_CASE("linearized graph maps") {
  const auto sphere = descending_sphere(fix().chart, fix().ledger,
                                        fix().ledger.eps, 16, 1e-8, fix().opts);
  ConstantsLedger led = fix().ledger;
  led.T2 = find_T2(fix().chart, led, sphere);
  led.T0 = std::max(led.T1, led.T2);

  SUBCASE("dGamma at the origin is the inclusion of X+") {
    const GraphPoint base = solve_stable(fix().chart, led, LoopField(1, 16),
                                         fix().opts);
    LoopField v = plus_unit_w12(fix().chart);
    const LoopField got = linearized_graph(fix().chart, led, base, v, fix().opts);
    CHECK(norm(got - v, NormKind::w12()) < 1e-13);
  }
  SUBCASE("finite-difference consistency and the L2 bound") {
    const double T = led.T0 + 1.0;
    LoopField zp = plus_unit_w12(fix().chart);
    zp *= 0.5 * led.plus_ball_radius();
    const GraphPoint base =
        solve_mixed(fix().chart, led, T, sphere[0].gamma, zp, fix().opts);
    LoopField v = mixed_plus_direction(fix().chart);
    v *= 1.0 / norm(v, NormKind::l2());
    const LoopField xv = linearized_graph(fix().chart, led, base, v, fix().opts);

    const double h = 1e-4;
    LoopField hv = v;
    hv *= h;
    const GraphPoint shifted =
        solve_mixed(fix().chart, led, T, sphere[0].gamma, zp + hv, fix().opts);
    LoopField fd = shifted.value - base.value;
    fd *= 1.0 / h;
    CHECK(norm(xv - fd, NormKind::w12()) / norm(xv, NormKind::w12()) < 1e-3);
    CHECK(norm(xv, NormKind::l2()) <= 2.0 * norm(v, NormKind::l2()));
  }
  SUBCASE("near-identity of the infinite-horizon linearization on L2") {
    LoopField zp = plus_unit_w12(fix().chart);
    zp *= 0.5 * led.plus_ball_radius();
    const GraphPoint base = solve_stable(fix().chart, led, zp, fix().opts);
    for (int which : {0, 1}) {
      LoopField v = plus_unit_w12(fix().chart, which);
      v *= 1.0 / norm(v, NormKind::l2());
      const LoopField yv =
          linearized_graph(fix().chart, led, base, v, fix().opts);
      CHECK(norm(yv - v, NormKind::l2()) <= 0.25 * norm(v, NormKind::l2()));
    }
  }
}

TEST_CASE("mixed solve on the two-component product model") {
  const Chart chart = torus2_chart(12);
  ConstantsLedger led = pendulum_ledger(2.1, 1.0, 1.0, 0.2, 0.25);
  const auto sphere = descending_sphere(chart, led, led.eps, 8, 1e-8, fix().opts);
  led.T2 = find_T2(chart, led, sphere);
  led.T0 = std::max(led.T1, led.T2);

  LoopField zp = chart.dec.eigenfield(chart.dec.morse_index());
  zp *= 0.5 * led.plus_ball_radius() / norm(zp, NormKind::w12());
  const GraphPoint gp =
      solve_mixed(chart, led, led.T0 + 0.5, sphere[1].gamma, zp, fix().opts);
  CHECK(norm(project(chart.dec, gp.value, Part::Plus) - zp, NormKind::w12()) <
        1e-12);
  CHECK(gp.endpoint_fiber_residual < 1e-8);
  CHECK(gp.endpoint_within_r);
  for (double r : gp.ratios) CHECK(r <= 0.6);

  FlowOptions flow;
  flow.rho0 = led.rho0;
  const Trajectory fwd = evolve(chart.dec, chart.model, chart.x, gp.value,
                                gp.T, flow);
  CHECK(norm(fwd.back() - sphere[1].gamma, NormKind::w12()) <= led.r);
}

TEST_CASE("theoretical ledger: validated inequalities, contraction factor 1/2") {
  // At the radii the smallness inequalities actually admit, every check
  // passes and the measured iteration ratio clears the proven factor 1/2.
  const KappaEstimate est =
      estimate_kappa(fix().chart.model, fix().chart.x, 3e-3, 120, 41);
  ConstantsLedger led;
  led.mode = ConstantsLedger::Mode::Theoretical;
  led.c = 1.0;
  led.mu = 0.5;
  led.rho0 = 7e-3;
  led.rho = 3e-3;
  led.r = 5e-3;
  led.eps = 4e-6;
  led.kappa_rho = est.kappa;
  led.kappa_star = std::max(est.kappa_star, 0.6);
  led.T1 = ConstantsLedger::time_to_fiber(led.r, led.rho0, led.mu);
  const auto sphere = descending_sphere(fix().chart, led, led.eps, 16, 1e-10,
                                        fix().opts);
  led.T2 = find_T2(fix().chart, led, sphere);
  led.T0 = std::max(led.T1, led.T2);

  const LedgerReport rep =
      validate_ledger_with_probe(fix().chart, led, sphere, fix().opts);
  CHECK(rep.theoretical_valid);
  CHECK(rep.valid);
  CHECK(rep.probe_ratio <= 0.5);

  LoopField zp = plus_unit_w12(fix().chart);
  zp *= 0.5 * led.plus_ball_radius();
  const GraphPoint gp = solve_mixed(fix().chart, led, led.T0 + 1.0,
                                    sphere[0].gamma, zp, fix().opts);
  for (double r : gp.ratios) CHECK(r <= 0.5);
  CHECK(gp.endpoint_within_r);
}

TEST_CASE("T2 search covers the sampled sphere") {
  const auto sphere = descending_sphere(fix().chart, fix().ledger,
                                        fix().ledger.eps, 16, 1e-8, fix().opts);
  const double T2 = find_T2(fix().chart, fix().ledger, sphere);
  CHECK(T2 >= 0.0);
  for (const SpherePoint& sp : sphere) {
    const LoopField moved =
        backward_point(fix().chart, fix().ledger, sp.gamma, T2 / 4.0, fix().opts);
    CHECK(norm(moved, NormKind::w12()) <= fix().ledger.rho * (1 + 1e-9));
  }
}

TEST_CASE("probe validation certifies the empirical ledger") {
  const auto sphere = descending_sphere(fix().chart, fix().ledger,
                                        fix().ledger.eps, 16, 1e-8, fix().opts);
  ConstantsLedger led = fix().ledger;
  led.T2 = find_T2(fix().chart, led, sphere);
  led.T0 = std::max(led.T1, led.T2);
  const LedgerReport rep =
      validate_ledger_with_probe(fix().chart, led, sphere, fix().opts);
  CHECK(rep.probe_ratio >= 0.0);
  CHECK(rep.probe_ratio <= 0.6);
  CHECK(rep.valid);
  CHECK_FALSE(rep.theoretical_valid);  // empirical regime by construction
}
