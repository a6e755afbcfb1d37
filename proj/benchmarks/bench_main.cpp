#include <benchmark/benchmark.h>

#include "loopflow/graphmaps.hpp"
#include "loopflow/semiflow.hpp"

using namespace loopflow;

namespace {

TorusModel pendulum() {
  PotentialTerm t;
  t.amplitude = 1.0;
  t.wavevector = Eigen::VectorXi::Ones(1);
  t.kind = PotentialTerm::Kind::Cos;
  return TorusModel(1, {t});
}

LoopField const_field(double v, int J) {
  return LoopField::constant(Eigen::VectorXd::Constant(1, v), J);
}

const Chart& chart32() {
  static Chart c = make_chart(pendulum(), const_field(3.0, 32));
  return c;
}

ConstantsLedger ledger() {
  ConstantsLedger led;
  led.c = 1.0;
  led.rho0 = 1.7;
  led.rho = 0.8;
  led.r = 0.85;
  led.eps = 0.3;
  led.mu = 0.5;
  led.kappa_rho = 0.28;
  led.kappa_star = 0.6;
  led.T1 = ConstantsLedger::time_to_fiber(led.r, led.rho0, led.mu);
  led.T0 = led.T1;
  return led;
}

void BM_TransformRoundtrip(benchmark::State& state) {
  const int J = static_cast<int>(state.range(0));
  GridField g;
  g.values = Eigen::MatrixXd::Random(2 * J + 1, 1);
  for (auto _ : state) benchmark::DoNotOptimize(inverse(transform(g)));
}
BENCHMARK(BM_TransformRoundtrip)->Arg(16)->Arg(32)->Arg(64);

void BM_AssembleOperator(benchmark::State& state) {
  const int J = static_cast<int>(state.range(0));
  const TorusModel m = pendulum();
  const CriticalLoop x = find_critical_loop(m, const_field(3.0, J));
  for (auto _ : state) benchmark::DoNotOptimize(assemble(m, x));
}
BENCHMARK(BM_AssembleOperator)->Arg(16)->Arg(32)->Arg(64);

void BM_Decompose(benchmark::State& state) {
  const int J = static_cast<int>(state.range(0));
  const TorusModel m = pendulum();
  const JacobiOperator op = assemble(m, find_critical_loop(m, const_field(3.0, J)));
  for (auto _ : state) benchmark::DoNotOptimize(decompose(op));
}
BENCHMARK(BM_Decompose)->Arg(16)->Arg(32)->Arg(64);

void BM_Nonlinearity(benchmark::State& state) {
  const Chart& c = chart32();
  const LoopField z = const_field(0.2, 32);
  for (auto _ : state)
    benchmark::DoNotOptimize(nonlinearity(c.model, c.x, z));
}
BENCHMARK(BM_Nonlinearity);

void BM_Evolve(benchmark::State& state) {
  const Chart& c = chart32();
  const LoopField z = const_field(0.1, 32);
  for (auto _ : state)
    benchmark::DoNotOptimize(evolve(c.dec, c.model, c.x, z, 0.5));
}
BENCHMARK(BM_Evolve)->Unit(benchmark::kMillisecond);

void BM_MixedSolve(benchmark::State& state) {
  const Chart& c = chart32();
  const ConstantsLedger led = ledger();
  const LoopField gamma = const_field(0.5, 32);
  LoopField zp = c.dec.eigenfield(c.dec.morse_index());
  zp *= 0.5 * led.plus_ball_radius() / norm(zp, NormKind::w12());
  for (auto _ : state)
    benchmark::DoNotOptimize(solve_mixed(c, led, 3.0, gamma, zp));
}
BENCHMARK(BM_MixedSolve)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
