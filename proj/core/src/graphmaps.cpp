#include "loopflow/graphmaps.hpp"

#include <algorithm>
#include <cmath>

#include "engine.hpp"

namespace loopflow {

Chart make_chart(const TorusModel& model, const LoopField& guess,
                 const NewtonOptions& newton, double mu_fraction,
                 double degeneracy_tol) {
  Chart chart{model, find_critical_loop(model, guess, newton), {}};
  chart.dec = decompose(assemble(model, chart.x), mu_fraction, degeneracy_tol);
  return chart;
}

LedgerReport validate_ledger(const ConstantsLedger& led) {
  LedgerReport rep;
  auto add = [&rep](const std::string& name, double lhs, double rhs, bool pass) {
    rep.checks.push_back({name, lhs, rhs, pass});
    return pass;
  };
  const double mu = led.mu;
  const double positive = std::min({led.c, led.rho0, led.rho, led.r, led.eps, mu});
  const bool pos_ok = add("positive_fields", positive, 0.0,
                          positive > 0.0 && led.kappa_star >= 0.0 && led.kappa_rho >= 0.0);

  double lhs0 = std::numeric_limits<double>::infinity();
  double lhs1 = lhs0;
  if (mu > 0.0) {
    const double bracket0 = 9.0 / std::pow(mu, 0.25) + 4.0 / (3.0 * mu) + 4.0;
    lhs0 = led.c * led.c * led.rho0 * led.kappa_star * bracket0;
    const double bracket1 =
        9.0 / std::pow(mu, 0.25) + 4.0 * led.c / (3.0 * mu) + 4.0 * led.c;
    lhs1 = led.c * led.kappa_rho * bracket1;
  }
  const bool ineq0 = add("rho0_smallness", lhs0, 0.125, lhs0 <= 0.125);
  const bool ineq1 = add("rho_smallness", lhs1, 0.125, lhs1 <= 0.125);
  const bool half = add("rho_le_half_rho0", led.rho, led.rho0 / 2.0,
                        led.rho <= led.rho0 / 2.0);
  const bool r_ok = add("r_below_rho0", led.r, led.rho0, led.r < led.rho0);
  double t1 = std::numeric_limits<double>::quiet_NaN();
  bool t1_ok = false;
  if (r_ok && pos_ok) {
    t1 = ConstantsLedger::time_to_fiber(led.r, led.rho0, mu);
    t1_ok = std::abs(led.T1 - t1) <= 1e-9 * std::max(1.0, std::abs(t1));
  }
  add("T1_consistent", led.T1, t1, t1_ok);
  const bool t0_ok = std::abs(led.T0 - std::max(led.T1, led.T2)) <= 1e-12;
  add("T0_is_max_T1_T2", led.T0, std::max(led.T1, led.T2), t0_ok);

  rep.geometry_valid = pos_ok && half && r_ok && t1_ok && t0_ok;
  rep.theoretical_valid = rep.geometry_valid && ineq0 && ineq1;
  rep.valid = led.mode == ConstantsLedger::Mode::Theoretical
                  ? rep.theoretical_valid
                  : rep.geometry_valid;
  return rep;
}

namespace {

using detail::ChartEvaluator;
using detail::DuhamelKernels;

struct FixedPointSetup {
  std::vector<double> grid;
  Eigen::MatrixXd inhom;  // d x M first terms (iterate-independent)
  std::vector<char> plus_mask, minus_mask;
  int anchor = 0;          // node of the minus-part upper limit
  double weight = 0.0;     // exp-norm weight exponent (mu/2 or -mu/2)
};

struct FixedPointOutcome {
  Eigen::MatrixXd Y;
  int iters = 0;
  std::vector<double> ratios;
  double fixed_point_residual = 0.0;
};

// g evaluated columnwise at the iterate; nonlinear and linearized solves
// differ only here.
template <typename GFun>
Eigen::MatrixXd eval_g(const GFun& g_of_col, const Eigen::MatrixXd& Y) {
  Eigen::MatrixXd G(Y.rows(), Y.cols());
  for (int m = 0; m < Y.cols(); ++m) G.col(m) = g_of_col(Y.col(m), m);
  return G;
}

template <typename GFun>
Eigen::MatrixXd apply_map(const FixedPointSetup& fp, const DuhamelKernels& K,
                          const GFun& g_of_col, const Eigen::MatrixXd& Y,
                          Eigen::MatrixXd& F, Eigen::MatrixXd& B) {
  const Eigen::MatrixXd G = eval_g(g_of_col, Y);
  detail::forward_prefix(K, G, fp.plus_mask, F);
  detail::backward_suffix(K, G, fp.minus_mask, fp.anchor, B);
  Eigen::MatrixXd out = fp.inhom;
  const int d = static_cast<int>(Y.rows());
  for (int m = 0; m < Y.cols(); ++m)
    for (int i = 0; i < d; ++i) {
      if (fp.plus_mask[i]) out(i, m) += F(i, m);
      if (fp.minus_mask[i]) out(i, m) -= B(i, m);
    }
  return out;
}

double weighted_norm(const SpectralDecomposition& dec, const FixedPointSetup& fp,
                     const Eigen::MatrixXd& D) {
  double best = 0.0;
  for (int m = 0; m < D.cols(); ++m) {
    const double v =
        std::exp(fp.weight * fp.grid[m]) * dec.w12_norm_eigen(D.col(m));
    best = std::max(best, v);
  }
  return best;
}

template <typename GFun>
FixedPointOutcome iterate_contraction(const SpectralDecomposition& dec,
                                      const FixedPointSetup& fp,
                                      const GFun& g_of_col,
                                      const Eigen::MatrixXd& Y0,
                                      const ContractionOptions& opts,
                                      const char* what) {
  const DuhamelKernels K(fp.grid, dec.eigenvalues());
  FixedPointOutcome out;
  out.Y = Y0;
  Eigen::MatrixXd F, B;
  double prev_delta = -1.0;
  int stall_run = 0;
  for (int it = 0; it < opts.max_iter; ++it) {
    const Eigen::MatrixXd next = apply_map(fp, K, g_of_col, out.Y, F, B);
    const double delta = weighted_norm(dec, fp, next - out.Y);
    out.Y = next;
    out.iters = it + 1;
    if (prev_delta > 1e-13) {
      const double ratio = delta / prev_delta;
      out.ratios.push_back(ratio);
      stall_run = ratio > opts.stall_ratio ? stall_run + 1 : 0;
      if (stall_run >= 3)
        throw ContractionStall(std::string(what) +
                               ": contraction ratio exceeded stall_ratio three "
                               "times in a row (ledger invalid or rho too large)");
    }
    prev_delta = delta;
    if (delta < opts.fp_tol) {
      const Eigen::MatrixXd check = apply_map(fp, K, g_of_col, out.Y, F, B);
      out.fixed_point_residual = weighted_norm(dec, fp, check - out.Y);
      return out;
    }
  }
  throw ContractionStall(std::string(what) +
                         ": fixed-point iteration exhausted max_iter");
}

std::vector<char> part_mask(const SpectralDecomposition& dec, Part p) {
  std::vector<char> mask(dec.dim());
  for (int i = 0; i < dec.dim(); ++i) mask[i] = dec.in_part(i, p);
  return mask;
}

Trajectory to_trajectory(const SpectralDecomposition& dec,
                         const FixedPointSetup& fp, const Eigen::MatrixXd& Y,
                         const char* method) {
  Trajectory traj;
  traj.grid = fp.grid;
  traj.meta.method = method;
  traj.states.reserve(Y.cols());
  for (int m = 0; m < Y.cols(); ++m) traj.states.push_back(dec.from_eigen(Y.col(m)));
  return traj;
}

// Backward grid on [-S, -T_head] + shifted head grid; increasing, ends at 0.
std::vector<double> backward_grid(const ContractionOptions& opts, double span) {
  std::vector<double> fwd = make_time_grid_with_tail(
      opts.grid, span, opts.tail_start, opts.tail_ratio, opts.tail_max_step);
  std::vector<double> g(fwd.rbegin(), fwd.rend());
  for (double& s : g) s = -s;
  return g;
}

}  // namespace

GraphPoint solve_stable(const Chart& chart, const ConstantsLedger& ledger,
                        const LoopField& z_plus, const ContractionOptions& opts) {
  const SpectralDecomposition& dec = chart.dec;
  const double ball = ledger.plus_ball_radius();
  if (norm(z_plus, NormKind::w12()) > ball * (1.0 + 1e-12))
    throw BallViolation("z_plus outside the admissible ball of radius rho/2c");

  const double horizon = std::min(
      opts.horizon_cap,
      (2.0 / ledger.mu) * std::log(std::max(10.0 * ledger.rho / opts.fp_tol, 10.0)));
  FixedPointSetup fp;
  fp.grid = make_time_grid_with_tail(opts.grid, horizon, opts.tail_start,
                                     opts.tail_ratio, opts.tail_max_step);
  fp.plus_mask = part_mask(dec, Part::Plus);
  fp.minus_mask = part_mask(dec, Part::Minus);
  fp.anchor = static_cast<int>(fp.grid.size()) - 1;
  fp.weight = 0.5 * ledger.mu;

  const int d = dec.dim();
  const int M = static_cast<int>(fp.grid.size());
  Eigen::VectorXd zp = dec.to_eigen(z_plus);
  for (int i = 0; i < d; ++i)
    if (!fp.plus_mask[i]) zp[i] = 0.0;
  fp.inhom.setZero(d, M);
  for (int m = 0; m < M; ++m)
    for (int i = 0; i < d; ++i)
      if (fp.plus_mask[i])
        fp.inhom(i, m) = std::exp(-fp.grid[m] * dec.eigenvalues()[i]) * zp[i];

  const ChartEvaluator eval(chart.model, chart.x);
  auto g_of_col = [&](const Eigen::VectorXd& y, int) {
    return dec.to_eigen_coords(eval.f_real(dec.real_from_eigen(y)));
  };
  FixedPointOutcome fpo =
      iterate_contraction(dec, fp, g_of_col, fp.inhom, opts, "stable solve");

  GraphPoint gp;
  gp.T = std::numeric_limits<double>::infinity();
  gp.gamma = LoopField(dec.components(), dec.modes());
  gp.z_plus = z_plus;
  gp.trajectory = to_trajectory(dec, fp, fpo.Y, "stable-contraction");
  gp.value = gp.trajectory.states.front();
  gp.graph_part = project(dec, gp.value, Part::Minus);
  gp.iters = fpo.iters;
  gp.ratios = std::move(fpo.ratios);
  gp.fixed_point_residual = fpo.fixed_point_residual;
  gp.endpoint_fiber_residual =
      norm(gp.trajectory.states.back(), NormKind::w12());
  gp.endpoint_distance = gp.endpoint_fiber_residual;
  return gp;
}

UnstablePoint solve_unstable(const Chart& chart, const ConstantsLedger& ledger,
                             const LoopField& z_minus,
                             const ContractionOptions& opts,
                             const std::vector<double>* grid) {
  const SpectralDecomposition& dec = chart.dec;
  if (norm(z_minus, NormKind::w12()) > ledger.rho * (1.0 + 1e-12))
    throw BallViolation("z_minus outside the admissible ball of radius rho");
  FixedPointSetup fp;
  fp.grid = grid ? *grid : backward_grid(opts, opts.unstable_pad);
  if (fp.grid.empty() || std::abs(fp.grid.back()) > 1e-12)
    throw GridError("unstable grid must be increasing and end at 0");
  fp.plus_mask = part_mask(dec, Part::Plus);
  fp.minus_mask = part_mask(dec, Part::Minus);
  fp.anchor = static_cast<int>(fp.grid.size()) - 1;
  fp.weight = -0.5 * ledger.mu;

  const int d = dec.dim();
  const int M = static_cast<int>(fp.grid.size());
  Eigen::VectorXd zm = dec.to_eigen(z_minus);
  for (int i = 0; i < d; ++i)
    if (!fp.minus_mask[i]) zm[i] = 0.0;
  fp.inhom.setZero(d, M);
  for (int m = 0; m < M; ++m)
    for (int i = 0; i < d; ++i)
      if (fp.minus_mask[i])
        fp.inhom(i, m) = std::exp(-fp.grid[m] * dec.eigenvalues()[i]) * zm[i];

  const ChartEvaluator eval(chart.model, chart.x);
  auto g_of_col = [&](const Eigen::VectorXd& y, int) {
    return dec.to_eigen_coords(eval.f_real(dec.real_from_eigen(y)));
  };
  FixedPointOutcome fpo =
      iterate_contraction(dec, fp, g_of_col, fp.inhom, opts, "unstable solve");

  UnstablePoint up;
  up.trajectory = to_trajectory(dec, fp, fpo.Y, "unstable-contraction");
  up.endpoint = up.trajectory.states.back();
  up.iters = fpo.iters;
  up.ratios = std::move(fpo.ratios);
  up.fixed_point_residual = fpo.fixed_point_residual;
  return up;
}

std::vector<SpherePoint> descending_sphere(const Chart& chart,
                                           const ConstantsLedger& ledger,
                                           double eps, int n_sphere,
                                           double action_tol,
                                           const ContractionOptions& opts) {
  const SpectralDecomposition& dec = chart.dec;
  const int k = dec.morse_index();
  if (k < 1)
    throw Error("descending sphere needs Morse index >= 1");
  if (k > 2)
    throw Error("descending sphere sampling supports Morse index 1 or 2");

  std::vector<Eigen::VectorXd> directions;
  if (k == 1) {
    Eigen::VectorXd d = Eigen::VectorXd::Zero(dec.dim());
    d[0] = 1.0;
    directions.push_back(d);
    directions.push_back(-d);
  } else {
    for (int i = 0; i < n_sphere; ++i) {
      const double th = 2.0 * M_PI * i / n_sphere;
      Eigen::VectorXd d = Eigen::VectorXd::Zero(dec.dim());
      d[0] = std::cos(th);
      d[1] = std::sin(th);
      directions.push_back(d);
    }
  }

  const double c_level = chart.x.action - eps;
  std::vector<SpherePoint> points;
  for (const Eigen::VectorXd& dir : directions) {
    auto endpoint_action = [&](double delta) {
      const LoopField zm = dec.from_eigen(delta * dir);
      UnstablePoint up = solve_unstable(chart, ledger, zm, opts);
      return std::make_pair(action(chart.model, chart.x.x + up.endpoint),
                            std::move(up));
    };
    // Bracket: the action at the endpoint decreases from c as delta grows.
    // The probe scale stays inside the admissible z_minus ball.
    auto scale_cap = [&] {
      const double dnorm = norm(dec.from_eigen(dir), NormKind::w12());
      return 0.999999 * ledger.rho / dnorm;
    }();
    double lo = 0.0;
    double hi = std::min({0.25 * ledger.rho0, 0.1, scale_cap});
    auto [act_hi, up_hi] = endpoint_action(hi);
    int grow = 0;
    while (act_hi > c_level) {
      lo = hi;
      if (hi >= scale_cap || ++grow > 60)
        throw BisectionFail(
            "action level c - eps not bracketed inside the z_minus ball");
      hi = std::min(hi * 1.6, scale_cap);
      std::tie(act_hi, up_hi) = endpoint_action(hi);
    }
    double delta = hi;
    double act = act_hi;
    UnstablePoint up = std::move(up_hi);
    for (int it = 0; it < 200 && std::abs(act - c_level) > action_tol; ++it) {
      const double mid = 0.5 * (lo + hi);
      auto [act_mid, up_mid] = endpoint_action(mid);
      if (act_mid > c_level)
        lo = mid;
      else
        hi = mid;
      delta = mid;
      act = act_mid;
      up = std::move(up_mid);
    }
    if (std::abs(act - c_level) > action_tol)
      throw BisectionFail("bisection failed to reach action_tol");
    SpherePoint sp;
    sp.gamma = up.endpoint;
    sp.direction = dir;
    sp.delta = delta;
    sp.action_value = act;
    sp.trajectory = std::move(up.trajectory);
    points.push_back(std::move(sp));
  }
  return points;
}

namespace {

// Grid on [-(T+pad), 0] whose restriction to [-T, 0] is the mixed-solve grid
// shifted by -T, so comparison trajectories are node-exact.
std::vector<double> unstable_grid_for(const ContractionOptions& opts, double T) {
  std::vector<double> head = make_time_grid(opts.grid, T);  // [0, T]
  std::vector<double> g;
  if (opts.unstable_pad > 0.0) {
    std::vector<double> tail = make_time_grid_with_tail(
        opts.grid, opts.unstable_pad, std::min(2.0, opts.tail_start),
        opts.tail_ratio, opts.tail_max_step);
    for (std::size_t i = tail.size(); i-- > 1;) g.push_back(-T - tail[i]);
  }
  for (std::size_t i = head.size(); i-- > 0;) g.push_back(-head[i]);
  g.back() = 0.0;
  return g;
}

}  // namespace

LoopField backward_point(const Chart& chart, const ConstantsLedger& ledger,
                         const LoopField& gamma, double T,
                         const ContractionOptions& opts) {
  if (T < 0.0) throw Error("backward_point needs T >= 0");
  if (T == 0.0) return gamma;
  const LoopField zm = project(chart.dec, gamma, Part::Minus);
  const std::vector<double> grid = unstable_grid_for(opts, T);
  UnstablePoint up = solve_unstable(chart, ledger, zm, opts, &grid);
  return up.trajectory.states[up.trajectory.node_index(-T)];
}

GraphPoint solve_mixed(const Chart& chart, const ConstantsLedger& ledger,
                       double T, const LoopField& gamma,
                       const LoopField& z_plus, const ContractionOptions& opts) {
  const SpectralDecomposition& dec = chart.dec;
  if (T < 0.0) throw Error("solve_mixed needs T >= 0");
  if (norm(z_plus, NormKind::w12()) >
      ledger.plus_ball_radius() * (1.0 + 1e-12))
    throw BallViolation("z_plus outside the admissible ball of radius rho/2c");
  if (norm(gamma, NormKind::w12()) > ledger.rho0 * (1.0 + 1e-12))
    throw BallViolation("gamma outside the chart ball");

  FixedPointSetup fp;
  fp.grid = make_time_grid(opts.grid, T);
  fp.plus_mask = part_mask(dec, Part::Plus);
  fp.minus_mask = part_mask(dec, Part::Minus);
  fp.anchor = static_cast<int>(fp.grid.size()) - 1;
  fp.weight = 0.5 * ledger.mu;

  const int d = dec.dim();
  const int M = static_cast<int>(fp.grid.size());
  Eigen::VectorXd zp = dec.to_eigen(z_plus);
  Eigen::VectorXd gm = dec.to_eigen(gamma);
  for (int i = 0; i < d; ++i) {
    if (!fp.plus_mask[i]) zp[i] = 0.0;
    if (!fp.minus_mask[i]) gm[i] = 0.0;
  }
  fp.inhom.setZero(d, M);
  for (int m = 0; m < M; ++m)
    for (int i = 0; i < d; ++i) {
      const double lam = dec.eigenvalues()[i];
      if (fp.plus_mask[i])
        fp.inhom(i, m) = std::exp(-fp.grid[m] * lam) * zp[i];
      else
        fp.inhom(i, m) = std::exp((T - fp.grid[m]) * lam) * gm[i];
    }

  // Initial iterate: the backward-flow comparison trajectory through gamma.
  Eigen::MatrixXd Y0(d, M);
  {
    const std::vector<double> ugrid = unstable_grid_for(opts, T);
    UnstablePoint up = solve_unstable(chart, ledger, dec.from_eigen(gm), opts, &ugrid);
    const int offset = up.trajectory.node_index(-T);
    for (int m = 0; m < M; ++m)
      Y0.col(m) = dec.to_eigen(up.trajectory.states[offset + m]);
  }

  const ChartEvaluator eval(chart.model, chart.x);
  auto g_of_col = [&](const Eigen::VectorXd& y, int) {
    return dec.to_eigen_coords(eval.f_real(dec.real_from_eigen(y)));
  };
  FixedPointOutcome fpo =
      iterate_contraction(dec, fp, g_of_col, Y0, opts, "mixed solve");

  GraphPoint gp;
  gp.T = T;
  gp.gamma = gamma;
  gp.z_plus = z_plus;
  gp.below_T0 = T < ledger.T0;
  gp.trajectory = to_trajectory(dec, fp, fpo.Y, "mixed-contraction");
  gp.value = gp.trajectory.states.front();
  gp.graph_part = project(dec, gp.value, Part::Minus);
  gp.iters = fpo.iters;
  gp.ratios = std::move(fpo.ratios);
  gp.fixed_point_residual = fpo.fixed_point_residual;

  const LoopField end = gp.trajectory.states.back();
  gp.endpoint_fiber_residual =
      norm(project(dec, end, Part::Minus) - dec.from_eigen(gm), NormKind::w12());
  gp.endpoint_distance = norm(end - gamma, NormKind::w12());
  gp.endpoint_within_r = gp.endpoint_distance <= ledger.r * (1.0 + 1e-9);
  if (gp.endpoint_fiber_residual > opts.fiber_tol)
    throw FiberMiss("minus-part endpoint misses gamma beyond fiber_tol "
                    "(grid too coarse?)");
  if (T >= ledger.T1 && !gp.endpoint_within_r)
    throw FiberMiss("endpoint left the fiber ball of radius r despite T >= T1");
  return gp;
}

LoopField linearized_graph(const Chart& chart, const ConstantsLedger& ledger,
                           const GraphPoint& base, const LoopField& v,
                           const ContractionOptions& opts) {
  const SpectralDecomposition& dec = chart.dec;
  if (norm(v, NormKind::l2()) == 0.0)
    throw BallViolation("direction v must be nonzero");

  FixedPointSetup fp;
  fp.grid = base.trajectory.grid;
  fp.plus_mask = part_mask(dec, Part::Plus);
  fp.minus_mask = part_mask(dec, Part::Minus);
  fp.anchor = static_cast<int>(fp.grid.size()) - 1;
  fp.weight = 0.5 * ledger.mu;

  const int d = dec.dim();
  const int M = static_cast<int>(fp.grid.size());
  Eigen::VectorXd vp = dec.to_eigen(v);
  for (int i = 0; i < d; ++i)
    if (!fp.plus_mask[i]) vp[i] = 0.0;
  fp.inhom.setZero(d, M);
  for (int m = 0; m < M; ++m)
    for (int i = 0; i < d; ++i)
      if (fp.plus_mask[i])
        fp.inhom(i, m) = std::exp(-fp.grid[m] * dec.eigenvalues()[i]) * vp[i];

  const ChartEvaluator eval(chart.model, chart.x);
  // Frozen df along the stored base trajectory.
  std::vector<std::vector<Eigen::MatrixXd>> dh(M);
  for (int m = 0; m < M; ++m)
    dh[m] = eval.hess_diff(base.trajectory.states[m].real_coeffs());
  auto g_of_col = [&](const Eigen::VectorXd& y, int m) {
    return dec.to_eigen_coords(
        eval.apply_hess_diff(dh[m], dec.real_from_eigen(y)));
  };
  FixedPointOutcome fpo =
      iterate_contraction(dec, fp, g_of_col, fp.inhom, opts, "linearized solve");
  return dec.from_eigen(fpo.Y.col(0));
}

double find_T2(const Chart& /*chart*/, const ConstantsLedger& ledger,
               const std::vector<SpherePoint>& sphere) {
  double worst = 0.0;
  const NormKind w12 = NormKind::w12();
  for (const SpherePoint& sp : sphere) {
    double t_point = -1.0;
    const Trajectory& traj = sp.trajectory;
    for (int m = traj.size() - 1; m >= 0; --m) {
      if (norm(traj.states[m], w12) <= ledger.rho) {
        t_point = -traj.grid[m];  // first node (smallest t) inside the ball
        break;
      }
    }
    if (t_point < 0.0)
      throw Error("backward flow never entered the rho-ball on the stored horizon");
    worst = std::max(worst, t_point);
  }
  return 4.0 * worst;
}

LedgerReport validate_ledger_with_probe(const Chart& chart,
                                        const ConstantsLedger& ledger,
                                        const std::vector<SpherePoint>& sphere,
                                        const ContractionOptions& opts) {
  LedgerReport rep = validate_ledger(ledger);
  double sphere_reach = 0.0;
  for (const SpherePoint& sp : sphere)
    sphere_reach = std::max(sphere_reach, norm(sp.gamma, NormKind::w12()));
  rep.checks.push_back({"sphere_ball_in_chart", sphere_reach + ledger.rho,
                        ledger.rho0,
                        sphere_reach + ledger.rho <= ledger.rho0});

  if (!sphere.empty()) {
    // Probe: one mixed and one stable solve at representative data.
    LoopField zp = chart.dec.eigenfield(chart.dec.morse_index());
    zp *= 0.5 * ledger.plus_ball_radius() / norm(zp, NormKind::w12());
    const double T_probe = std::max(ledger.T0, ledger.T1);
    GraphPoint mixed =
        solve_mixed(chart, ledger, T_probe, sphere.front().gamma, zp, opts);
    GraphPoint stable = solve_stable(chart, ledger, zp, opts);
    double ratio = 0.0;
    for (double r : mixed.ratios) ratio = std::max(ratio, r);
    for (double r : stable.ratios) ratio = std::max(ratio, r);
    rep.probe_ratio = ratio;
    rep.checks.push_back({"probe_contraction_ratio", ratio, 0.6, ratio <= 0.6});
    if (ledger.mode == ConstantsLedger::Mode::Empirical)
      rep.valid = rep.geometry_valid && sphere_reach + ledger.rho <= ledger.rho0 &&
                  ratio <= 0.6;
  }
  return rep;
}

}  // namespace loopflow
