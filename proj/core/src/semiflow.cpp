#include "loopflow/semiflow.hpp"

#include <boost/numeric/odeint.hpp>
#include <cmath>

#include "engine.hpp"

namespace loopflow {

Trajectory evolve(const SpectralDecomposition& dec, const TorusModel& model,
                  const CriticalLoop& x, const LoopField& z, double T,
                  const FlowOptions& opts) {
  if (z.components() != dec.components() || z.modes() != dec.modes())
    throw DimensionError("initial value shape does not match decomposition");
  const detail::ChartEvaluator chart(model, x);
  const std::vector<double> grid = make_time_grid(opts.grid, T);
  const detail::DuhamelKernels K(grid, dec.eigenvalues());
  const int M = static_cast<int>(grid.size());

  auto f_eigen = [&](const Eigen::VectorXd& y) {
    return dec.to_eigen_coords(chart.f_real(dec.real_from_eigen(y)));
  };

  Trajectory traj;
  traj.meta.method = "duhamel-etd2";
  traj.grid.reserve(M);
  traj.states.reserve(M);

  Eigen::VectorXd y = dec.to_eigen(z);
  traj.grid.push_back(0.0);
  traj.states.push_back(z);
  if (dec.w12_norm_eigen(y) > opts.rho0) {
    traj.meta.left_chart = true;
    traj.meta.exit_time = 0.0;
    return traj;
  }

  Eigen::VectorXd g = f_eigen(y);
  ++traj.meta.rhs_evaluations;
  for (int s = 0; s + 1 < M; ++s) {
    const auto E = K.decay.row(s).transpose().array();
    const auto w1 = K.fw1.row(s).transpose().array();
    const auto w2 = K.fw2.row(s).transpose().array();
    const Eigen::VectorXd base = (E * y.array() + w1 * g.array()).matrix();
    // predictor: previous f held constant over the step
    const Eigen::VectorXd g_pred = f_eigen(base);
    ++traj.meta.rhs_evaluations;
    // corrector: linear interpolation toward f at the predicted endpoint
    const Eigen::VectorXd y_next =
        base + (w2 * (g_pred.array() - g.array())).matrix();
    const double correction = dec.w12_norm_eigen(y_next - base);
    if (correction > opts.step_tol)
      throw StepRejected("corrector change " + std::to_string(correction) +
                         " exceeds step_tol at s=" + std::to_string(grid[s]));
    y = y_next;
    g = f_eigen(y);
    ++traj.meta.rhs_evaluations;
    traj.grid.push_back(grid[s + 1]);
    traj.states.push_back(dec.from_eigen(y));
    if (dec.w12_norm_eigen(y) > opts.rho0) {
      traj.meta.left_chart = true;
      traj.meta.exit_time = grid[s + 1];
      break;
    }
  }
  return traj;
}

namespace {

struct CollocationRhs {
  const detail::ChartEvaluator* chart;
  int n, N;
  double inv12h2;

  void operator()(const std::vector<double>& v, std::vector<double>& dvdt,
                  double /*t*/) const {
    // 4th-order periodic second difference plus the potential increment.
    for (int m = 0; m < n; ++m) {
      const double* z = v.data() + m * N;
      double* out = dvdt.data() + m * N;
      for (int i = 0; i < N; ++i) {
        const int im2 = (i - 2 + N) % N, im1 = (i - 1 + N) % N;
        const int ip1 = (i + 1) % N, ip2 = (i + 2) % N;
        out[i] = (-z[im2] + 16.0 * z[im1] - 30.0 * z[i] + 16.0 * z[ip1] -
                  z[ip2]) *
                 inv12h2;
      }
    }
    for (const detail::TermData& td : chart->terms) {
      for (int i = 0; i < N; ++i) {
        double kz = 0.0;
        for (int m = 0; m < n; ++m) kz += td.k[m] * v[m * N + i];
        const double th = td.base[i] + kz;
        const double d = td.is_cos ? -td.amplitude * std::sin(th)
                                   : td.amplitude * std::cos(th);
        const double inc = d - td.grad0[i];
        for (int m = 0; m < n; ++m) dvdt[m * N + i] += inc * td.k[m];
      }
    }
  }
};

}  // namespace

Trajectory evolve_oracle(const TorusModel& model, const CriticalLoop& x,
                         const LoopField& z, double T,
                         const OracleOptions& opts) {
  namespace ode = boost::numeric::odeint;
  const detail::ChartEvaluator chart(model, x);
  const int n = chart.n, N = chart.N;
  const double h = 1.0 / N;

  CollocationRhs rhs{&chart, n, N, 1.0 / (12.0 * h * h)};

  std::vector<double> state(static_cast<std::size_t>(n) * N);
  {
    const GridField g0 = inverse(z);
    for (int m = 0; m < n; ++m)
      for (int i = 0; i < N; ++i) state[m * N + i] = g0.values(i, m);
  }

  Trajectory traj;
  traj.meta.method = "mol-rk45";
  traj.grid.push_back(0.0);
  traj.states.push_back(z);

  std::vector<double> store = make_time_grid(TimeGridSpec::uniform(opts.store_dt), T);
  auto stepper = ode::make_controlled(opts.abs_tol, opts.rel_tol,
                                      ode::runge_kutta_dopri5<std::vector<double>>());
  double t = 0.0;
  double dt = opts.initial_dt;
  for (std::size_t k = 1; k < store.size(); ++k) {
    const double target = store[k];
    while (t < target - 1e-14) {
      dt = std::min(dt, target - t);
      const auto result = stepper.try_step(rhs, state, t, dt);
      ++traj.meta.rhs_evaluations;
      if (result == ode::fail) {
        ++traj.meta.rejected_steps;
        if (dt < opts.min_step)
          throw StiffnessAbort("oracle step collapsed below min_step");
      }
    }
    GridField g;
    g.values.resize(N, n);
    for (int m = 0; m < n; ++m)
      for (int i = 0; i < N; ++i) g.values(i, m) = state[m * N + i];
    traj.grid.push_back(target);
    traj.states.push_back(transform(g));
  }
  return traj;
}

double residual_representation(const SpectralDecomposition& dec,
                               const TorusModel& model, const CriticalLoop& x,
                               const Trajectory& traj, double T_split) {
  if (traj.size() < 2) throw GridError("trajectory too short");
  const detail::ChartEvaluator chart(model, x);
  const int M = traj.size();
  const int d = dec.dim();
  const int anchor =
      T_split < 0.0 ? M - 1 : traj.node_index(T_split);

  Eigen::MatrixXd Y(d, M), G(d, M);
  for (int m = 0; m < M; ++m) {
    Y.col(m) = dec.to_eigen(traj.states[m]);
    G.col(m) = dec.to_eigen_coords(chart.f_real(traj.states[m].real_coeffs()));
  }

  std::vector<char> plus(d), minus(d);
  for (int i = 0; i < d; ++i) {
    plus[i] = dec.in_part(i, Part::Plus);
    minus[i] = dec.in_part(i, Part::Minus);
  }
  const detail::DuhamelKernels K(traj.grid, dec.eigenvalues());
  Eigen::MatrixXd F, B;
  detail::forward_prefix(K, G, plus, F);
  detail::backward_suffix(K, G, minus, anchor, B);

  double worst = 0.0;
  for (int m = 0; m <= anchor; ++m) {
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(d);
    for (int i = 0; i < d; ++i) {
      const double lam = dec.eigenvalues()[i];
      if (plus[i]) {
        rhs[i] = std::exp(-traj.grid[m] * lam) * Y(i, 0) + F(i, m);
      } else {
        rhs[i] = std::exp(-(traj.grid[m] - traj.grid[anchor]) * lam) *
                     Y(i, anchor) -
                 B(i, m);
      }
    }
    worst = std::max(worst, dec.w12_norm_eigen(rhs - Y.col(m)));
  }
  return worst;
}

std::vector<double> action_along(const TorusModel& model, const CriticalLoop& x,
                                 const Trajectory& traj) {
  std::vector<double> out;
  out.reserve(traj.size());
  for (const LoopField& zeta : traj.states)
    out.push_back(action(model, x.x + zeta));
  return out;
}

}  // namespace loopflow
