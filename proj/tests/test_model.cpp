#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "fixtures.hpp"
#include "loopflow/model.hpp"

using namespace loopflow;
using namespace fixtures;

TEST_CASE("pendulum potential derivatives at q = pi") {
  const TorusModel m = pendulum_model();
  const Eigen::VectorXd q = Eigen::VectorXd::Constant(1, M_PI);
  CHECK(m.grad_potential(0.0, q)[0] == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(m.hess_potential(0.0, q)(0, 0) == doctest::Approx(1.0).epsilon(1e-14));

  const TorusModel z = zero_model();
  CHECK(z.grad_potential(0.3, q).norm() == 0.0);
}

TEST_CASE("time-dependent sin term differentiates exactly") {
  PotentialTerm t;
  t.amplitude = 0.7;
  t.wavevector = (Eigen::VectorXi(2) << 2, -1).finished();
  t.time_mode = 3;
  t.phase = 0.4;
  t.kind = PotentialTerm::Kind::Sin;
  const TorusModel m(2, {t});
  const Eigen::VectorXd q = (Eigen::VectorXd(2) << 0.3, -1.1).finished();
  const double tt = 0.17;
  const double th = 2 * q[0] - q[1] + 2 * M_PI * 3 * tt + 0.4;
  CHECK(m.potential(tt, q) == doctest::Approx(0.7 * std::sin(th)).epsilon(1e-14));
  CHECK(m.grad_potential(tt, q)[0] ==
        doctest::Approx(0.7 * std::cos(th) * 2).epsilon(1e-14));
  CHECK(m.hess_potential(tt, q)(0, 1) ==
        doctest::Approx(-0.7 * std::sin(th) * 2 * (-1)).epsilon(1e-14));
}

TEST_CASE("action of constant pendulum loops") {
  const TorusModel m = pendulum_model();
  const int J = 16;
  CHECK(action(m, const_field(M_PI, J)) == doctest::Approx(1.0).epsilon(1e-13));
  CHECK(action(m, const_field(0.0, J)) == doctest::Approx(-1.0).epsilon(1e-13));
  CHECK(action(zero_model(), const_field(M_PI, J)) ==
        doctest::Approx(0.0).epsilon(1e-15));
}

TEST_CASE("action directional derivative matches the L2 gradient") {
  const TorusModel m = pendulum_model();
  const int J = 16;
  std::mt19937_64 gen(3);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (int rep = 0; rep < 5; ++rep) {
    LoopField u = const_field(2.5, J);
    LoopField v(1, J);
    for (int j = 1; j <= 4; ++j) {
      u.set_coeff(j, 0, {0.1 * normal(gen) / j, 0.1 * normal(gen) / j});
      v.set_coeff(j, 0, {normal(gen) / j, normal(gen) / j});
    }
    v.set_coeff(0, 0, normal(gen));
    const double h = 1e-5;
    LoopField up = u, um = u;
    LoopField hv = v;
    hv *= h;
    up += hv;
    um -= hv;
    const double fd = (action(m, up) - action(m, um)) / (2 * h);
    const double pairing =
        action_gradient(m, u).real_coeffs().dot(v.real_coeffs());
    CHECK(rel_err(fd, pairing) < 1e-6);
  }
}

TEST_CASE("Newton finds the pendulum equilibria") {
  const TorusModel m = pendulum_model();
  const int J = 16;
  SUBCASE("unstable equilibrium from guess 3.0") {
    const CriticalLoop c = find_critical_loop(m, const_field(3.0, J));
    CHECK(c.residual < 1e-10);
    CHECK(c.x.coeff(0, 0).real() == doctest::Approx(M_PI).epsilon(1e-9));
    CHECK(c.action == doctest::Approx(1.0).epsilon(1e-12));
  }
  SUBCASE("stable equilibrium from guess 0.2") {
    const CriticalLoop c = find_critical_loop(m, const_field(0.2, J));
    CHECK(c.residual < 1e-10);
    CHECK(std::abs(c.x.coeff(0, 0).real()) < 1e-9);
    CHECK(c.action == doctest::Approx(-1.0).epsilon(1e-12));
  }
  SUBCASE("zero potential: every constant loop is critical") {
    const CriticalLoop c = find_critical_loop(zero_model(), const_field(0.77, J));
    CHECK(c.residual == 0.0);
    CHECK(c.x.coeff(0, 0).real() == doctest::Approx(0.77).epsilon(1e-15));
  }
  SUBCASE("nonautonomous perturbation shifts the loop") {
    PotentialTerm base;  // cos q
    base.amplitude = 1.0;
    base.wavevector = Eigen::VectorXi::Ones(1);
    base.kind = PotentialTerm::Kind::Cos;
    PotentialTerm wobble;  // 0.05 sin(q + 2 pi t)
    wobble.amplitude = 0.05;
    wobble.wavevector = Eigen::VectorXi::Ones(1);
    wobble.time_mode = 1;
    wobble.kind = PotentialTerm::Kind::Sin;
    const TorusModel m2(1, {base, wobble});
    const CriticalLoop c = find_critical_loop(m2, const_field(3.0, 16));
    CHECK(c.residual < 1e-10);
    CHECK(std::abs(c.x.coeff(1, 0)) > 1e-4);  // genuinely nonconstant
  }
  SUBCASE("singular linearization is reported") {
    CHECK_THROWS_AS(find_critical_loop(m, const_field(M_PI / 2, J)),
                    SingularJacobian);
  }
  SUBCASE("iteration budget is enforced") {
    NewtonOptions opts;
    opts.max_iter = 1;
    CHECK_THROWS_AS(find_critical_loop(m, const_field(2.2, J), opts),
                    NoConvergence);
  }
}

TEST_CASE("chart nonlinearity of the pendulum at x = pi") {
  const TorusModel m = pendulum_model();
  const int J = 16;
  const CriticalLoop x = find_critical_loop(m, const_field(3.0, J));

  SUBCASE("f(0) = 0 exactly") {
    const LoopField f = nonlinearity(m, x, LoopField(1, J));
    CHECK(f.real_coeffs().cwiseAbs().maxCoeff() == 0.0);
  }
  SUBCASE("constant inputs: f(z) = sin z - z") {
    const LoopField fp = nonlinearity(m, x, const_field(0.1, J));
    CHECK(fp.coeff(0, 0).real() ==
          doctest::Approx(std::sin(0.1) - 0.1).epsilon(1e-10));
    CHECK(fp.coeff(0, 0).real() ==
          doctest::Approx(-1.6658335317184769e-4).epsilon(1e-9));
    const LoopField fm = nonlinearity(m, x, const_field(-0.1, J));
    CHECK(fm.coeff(0, 0).real() ==
          doctest::Approx(1.6658335317184769e-4).epsilon(1e-9));
  }
  SUBCASE("df(0) = 0 exactly and df(0.2)(1) = cos 0.2 - 1") {
    const LoopField d0 = dnonlinearity(m, x, LoopField(1, J), const_field(1.0, J));
    CHECK(d0.real_coeffs().cwiseAbs().maxCoeff() == 0.0);
    // f(z) = sin z - z for constant data, so df(z)v = (cos z - 1) v; the
    // magnitude is 1 - cos 0.2 = 0.019933...
    const LoopField d = dnonlinearity(m, x, const_field(0.2, J), const_field(1.0, J));
    CHECK(d.coeff(0, 0).real() ==
          doctest::Approx(std::cos(0.2) - 1.0).epsilon(1e-12));
    CHECK(std::abs(d.coeff(0, 0).real()) ==
          doctest::Approx(0.019933422158758374).epsilon(1e-12));
  }
  SUBCASE("df matches the directional finite difference") {
    std::mt19937_64 gen(5);
    std::normal_distribution<double> normal(0.0, 1.0);
    LoopField zeta(1, J), v(1, J);
    zeta.set_coeff(0, 0, 0.21);
    v.set_coeff(0, 0, 0.6);
    for (int j = 1; j <= 5; ++j) {
      zeta.set_coeff(j, 0, {0.05 * normal(gen) / j, 0.05 * normal(gen) / j});
      v.set_coeff(j, 0, {normal(gen) / j, normal(gen) / j});
    }
    const double h = 1e-6;
    LoopField hv = v;
    hv *= h;
    const LoopField fd_num =
        nonlinearity(m, x, zeta + hv) - nonlinearity(m, x, zeta);
    const LoopField analytic = dnonlinearity(m, x, zeta, v);
    const double fd_scale = norm(analytic, NormKind::l2());
    CHECK(norm(fd_num - h * analytic, NormKind::l2()) / (h * fd_scale) < 1e-4);
  }
}

TEST_CASE("f(0) = 0 and df(0) = 0 for a generic model and loop") {
  PotentialTerm t1, t2;
  t1.amplitude = 0.8;
  t1.wavevector = (Eigen::VectorXi(2) << 1, 1).finished();
  t1.time_mode = 2;
  t1.phase = 0.9;
  t1.kind = PotentialTerm::Kind::Sin;
  t2.amplitude = 0.3;
  t2.wavevector = (Eigen::VectorXi(2) << 0, 2).finished();
  t2.kind = PotentialTerm::Kind::Cos;
  const TorusModel m(2, {t1, t2});
  CriticalLoop x;  // f(0) = 0 needs no criticality of the base loop
  x.x = LoopField(2, 12);
  x.x.set_coeff(0, 0, 0.4);
  x.x.set_coeff(2, 1, {0.2, -0.1});
  const LoopField zero(2, 12);
  LoopField v(2, 12);
  v.set_coeff(1, 0, {1.0, 2.0});
  CHECK(nonlinearity(m, x, zero).real_coeffs().cwiseAbs().maxCoeff() == 0.0);
  CHECK(dnonlinearity(m, x, zero, v).real_coeffs().cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("empirical Lipschitz estimates") {
  const TorusModel m = pendulum_model();
  const int J = 16;
  const CriticalLoop x = find_critical_loop(m, const_field(3.0, J));

  SUBCASE("zero potential gives kappa = 0") {
    const CriticalLoop x0 = find_critical_loop(zero_model(), const_field(0.5, J));
    const KappaEstimate est = estimate_kappa(zero_model(), x0, 0.4, 50, 9);
    CHECK(est.kappa == 0.0);
    CHECK(est.kappa_star == 0.0);
  }
  SUBCASE("estimates are nondecreasing in rho (nested samples)") {
    const KappaEstimate e1 = estimate_kappa(m, x, 0.1, 80, 17);
    const KappaEstimate e2 = estimate_kappa(m, x, 0.2, 80, 17);
    const KappaEstimate e3 = estimate_kappa(m, x, 0.4, 80, 17);
    CHECK(e1.kappa <= e2.kappa);
    CHECK(e2.kappa <= e3.kappa);
    CHECK(e1.kappa > 0.0);
  }
  SUBCASE("kappa is controlled by the pointwise derivative bound") {
    const double rho = 0.3;
    const KappaEstimate est = estimate_kappa(m, x, rho, 200, 23);
    // |f(a)-f(b)| <= sup_{|z| <= c_inf rho} |1 - cos z| |a-b| pointwise
    const double reach = std::min(M_PI, est.sup_ratio_c_inf * rho);
    CHECK(est.kappa <= (1.0 - std::cos(reach)) * (1.0 + 1e-9));
  }
}
