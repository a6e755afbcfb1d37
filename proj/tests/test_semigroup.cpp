#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "fixtures.hpp"
#include "loopflow/semigroup.hpp"

using namespace loopflow;
using namespace fixtures;

namespace {
LoopField random_field(int n, int J, std::mt19937_64& gen) {
  std::normal_distribution<double> normal(0.0, 1.0);
  LoopField f(n, J);
  for (int i = 0; i < f.dim(); ++i) f.real_coeffs()[i] = normal(gen);
  return f;
}

// -d^2/dt^2 + 1: hyperbolic with empty minus part.
Chart shifted_free_chart(int J = 8) {
  return make_chart(pendulum_model(), const_field(0.2, J));
}
}  // namespace

TEST_CASE("semigroup on the minus part: growth forward, decay backward") {
  const Chart chart = pendulum_chart(8);
  const LoopField ones = const_field(1.0, 8);
  // lambda_1 = -1: e^{-s A^-} scales the constant mode by e^{s}
  const LoopField fwd = apply(chart.dec, {1.0, Part::Minus}, ones);
  CHECK(fwd.coeff(0, 0).real() == doctest::Approx(std::exp(1.0)).epsilon(1e-12));
  const LoopField bwd = apply(chart.dec, {-2.0, Part::Minus}, ones);
  CHECK(bwd.coeff(0, 0).real() == doctest::Approx(std::exp(-2.0)).epsilon(1e-12));
  CHECK(bwd.coeff(0, 0).real() == doctest::Approx(0.1353352832366127).epsilon(1e-12));
}

TEST_CASE("time zero reduces to the spectral projection") {
  const Chart chart = pendulum_chart(8);
  std::mt19937_64 gen(3);
  const LoopField z = random_field(1, 8, gen);
  for (Part part : {Part::Full, Part::Plus, Part::Minus}) {
    const LoopField a = apply(chart.dec, {0.0, part}, z);
    const LoopField b = project(chart.dec, z, part);
    CHECK(norm(a - b, NormKind::w12()) < 1e-13 * norm(z, NormKind::w12()));
  }
}

TEST_CASE("negative time outside the minus part is rejected") {
  const Chart chart = pendulum_chart(8);
  const LoopField z = const_field(1.0, 8);
  CHECK_THROWS_AS(apply(chart.dec, {-0.5, Part::Plus}, z), NegativeTimeOnPlus);
  CHECK_THROWS_AS(apply(chart.dec, {-0.5, Part::Full}, z), NegativeTimeOnPlus);
  CHECK_THROWS_AS(
      operator_norm(chart.dec, -0.5, Part::Plus, NormKind::l2(), NormKind::l2()),
      NegativeTimeOnPlus);
}

TEST_CASE("semigroup law and commutation with projections") {
  const Chart chart = pendulum_chart(8);
  std::mt19937_64 gen(5);
  for (int rep = 0; rep < 5; ++rep) {
    const LoopField z = random_field(1, 8, gen);
    const double s = 0.03 + 0.02 * rep, t = 0.01 + 0.03 * rep;
    const LoopField ab =
        apply(chart.dec, {t, Part::Full}, apply(chart.dec, {s, Part::Full}, z));
    const LoopField once = apply(chart.dec, {s + t, Part::Full}, z);
    CHECK(norm(ab - once, NormKind::w12()) <
          1e-10 * std::max(1.0, norm(once, NormKind::w12())));

    for (Part part : {Part::Plus, Part::Minus}) {
      const LoopField left =
          apply(chart.dec, {s, Part::Full}, project(chart.dec, z, part));
      const LoopField right =
          project(chart.dec, apply(chart.dec, {s, Part::Full}, z), part);
      CHECK(norm(left - right, NormKind::w12()) <
            1e-10 * std::max(1.0, norm(right, NormKind::w12())));
    }
  }
}

TEST_CASE("splitting into subspace semigroups is exact") {
  const Chart chart = pendulum_chart(8);
  std::mt19937_64 gen(9);
  const LoopField z = random_field(1, 8, gen);
  const double s = 0.07;
  const LoopField full = apply(chart.dec, {s, Part::Full}, z);
  const LoopField split = apply(chart.dec, {s, Part::Minus}, z) +
                          apply(chart.dec, {s, Part::Plus}, z);
  CHECK((full.real_coeffs() - split.real_coeffs()).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("operator norms in the eigenbasis") {
  const Chart chart = pendulum_chart(8);
  const double lam2 = chart.dec.eigenvalues()[1];

  SUBCASE("large-time plus norm is the dominant positive mode") {
    for (double s : {0.5, 1.0, 2.0}) {
      const double got =
          operator_norm(chart.dec, s, Part::Plus, NormKind::l2(), NormKind::l2());
      CHECK(got == doctest::Approx(std::exp(-s * lam2)).epsilon(1e-8));
    }
  }
  SUBCASE("minus norm grows at |lambda_1|") {
    const double got =
        operator_norm(chart.dec, 1.0, Part::Minus, NormKind::l2(), NormKind::l2());
    CHECK(got == doctest::Approx(std::exp(1.0)).epsilon(1e-10));
  }
  SUBCASE("plus semigroup annihilates the minus projection") {
    const LoopField ones = const_field(1.0, 8);  // pure minus-part field
    const LoopField out = apply(chart.dec, {0.3, Part::Plus}, ones);
    CHECK(norm(out, NormKind::w12()) < 1e-13);
  }
}

TEST_CASE("W12 -> W12 norm equals the L2 -> L2 norm on diagonal weights") {
  // For the constant-coefficient pendulum the eigenbasis is Fourier, so all
  // the weighted operator norms collapse to the same diagonal supremum.
  const Chart chart = pendulum_chart(8);
  const double a =
      operator_norm(chart.dec, 0.4, Part::Plus, NormKind::w12(), NormKind::w12());
  const double b =
      operator_norm(chart.dec, 0.4, Part::Plus, NormKind::l2(), NormKind::l2());
  CHECK(a == doctest::Approx(b).epsilon(1e-9));
}

TEST_CASE("smoothing audit on the shifted free operator") {
  const Chart chart = shifted_free_chart();
  // A = -d^2/dt^2 + 1, minus part empty, pi_+ = identity.
  CHECK(chart.dec.morse_index() == 0);
  const double mu = 0.5 * chart.dec.gap();
  const SmoothingReport rep =
      audit_smoothing(chart.dec, log_spaced(1e-3, 10.0, 40), 0.75, mu);
  CHECK(rep.c_hat > 0.0);
  CHECK(std::isfinite(rep.c_hat));
  CHECK(rep.refinement_stable);
}

TEST_CASE("backward decay of the minus group is bounded by e^{s mu}") {
  const Chart chart = pendulum_chart(8);
  const double mu = 0.5;
  for (double s : {-4.0, -2.0, -1.0, -0.25}) {
    const double v =
        operator_norm(chart.dec, s, Part::Minus, NormKind::l2(), NormKind::l2());
    // |lambda_1| = 1 > mu, so e^{-s mu} ||e^{-sA^-}|| = e^{s(1-mu)} <= 1
    CHECK(std::exp(-s * mu) * v <= 1.0 + 1e-12);
  }
}

TEST_CASE("plus part at alpha = 0 stays below 1 + tol when mu < lambda_{k+1}") {
  const Chart chart = pendulum_chart(8);
  const SmoothingReport rep =
      audit_smoothing(chart.dec, log_spaced(1e-2, 8.0, 30), 0.0, 0.5,
                      Part::Plus, NormKind::l2(), NormKind::l2());
  CHECK(rep.c_hat <= 1.0 + 1e-10);
}
