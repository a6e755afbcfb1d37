#pragma once

// Shared internals of the semiflow integrator and the contraction solvers:
// phi-function weights for per-eigenmode exact Duhamel kernels, and a cached
// pointwise evaluator of the chart nonlinearity.

#include <Eigen/Dense>
#include <cmath>
#include <vector>

#include "loopflow/model.hpp"
#include "loopflow/spectral.hpp"

namespace loopflow::detail {

// phi1(z) = (e^z - 1)/z, phi2(z) = (e^z - 1 - z)/z^2, series-switched near 0.
inline double phi1(double z) {
  if (std::abs(z) < 0.5) {
    double term = 1.0, sum = 1.0;
    for (int k = 1; k <= 14; ++k) {
      term *= z / (k + 1);
      sum += term;
    }
    return sum;
  }
  return (std::exp(z) - 1.0) / z;
}

inline double phi2(double z) {
  if (std::abs(z) < 0.5) {
    double term = 0.5, sum = 0.5;
    for (int k = 1; k <= 14; ++k) {
      term *= z / (k + 2);
      sum += term;
    }
    return sum;
  }
  return (std::exp(z) - 1.0 - z) / (z * z);
}

// Potential terms with the loop-dependent phase k.x(t_i) + 2 pi m t_i + phase
// precomputed per collocation node, so the hot loops stay allocation-free.
struct TermData {
  double amplitude;
  bool is_cos;
  Eigen::VectorXd k;      // wavevector as doubles
  Eigen::VectorXd base;   // N phases at zeta = 0
  Eigen::VectorXd grad0;  // N first-derivative factors at zeta = 0
};

// Pointwise chart nonlinearity with the critical-loop data precomputed:
//   f(zeta)(t_i) = grad V(t_i, x_i + zeta_i) - grad V(t_i, x_i) - H_i zeta_i.
struct ChartEvaluator {
  const TorusModel* model;
  int n, J, N;
  Eigen::MatrixXd xg;                  // N x n values of x
  Eigen::MatrixXd grad0;               // N x n values of grad V at x
  std::vector<Eigen::MatrixXd> hess0;  // N Hessians at x
  std::vector<TermData> terms;

  ChartEvaluator(const TorusModel& m, const CriticalLoop& x)
      : model(&m), n(x.x.components()), J(x.x.modes()), N(2 * J + 1) {
    xg = inverse(x.x).values;
    grad0.resize(N, n);
    hess0.resize(N);
    for (int i = 0; i < N; ++i) {
      const double t = static_cast<double>(i) / N;
      const Eigen::VectorXd xi = xg.row(i).transpose();
      grad0.row(i) = model->grad_potential(t, xi).transpose();
      hess0[i] = model->hess_potential(t, xi);
    }
    constexpr double kTwoPi = 6.283185307179586476925286766559;
    for (const PotentialTerm& pt : m.terms()) {
      TermData td;
      td.amplitude = pt.amplitude;
      td.is_cos = pt.kind == PotentialTerm::Kind::Cos;
      td.k = pt.wavevector.cast<double>();
      td.base.resize(N);
      td.grad0.resize(N);
      for (int i = 0; i < N; ++i) {
        const double t = static_cast<double>(i) / N;
        td.base[i] = td.k.dot(xg.row(i).transpose()) +
                     kTwoPi * pt.time_mode * t + pt.phase;
        td.grad0[i] = td.is_cos ? -td.amplitude * std::sin(td.base[i])
                                : td.amplitude * std::cos(td.base[i]);
      }
      terms.push_back(std::move(td));
    }
  }

  const Eigen::MatrixXd& basis() const { return trig_basis(J, N); }

  Eigen::MatrixXd grid_of(const Eigen::VectorXd& a) const {
    const Eigen::MatrixXd& B = basis();
    Eigen::MatrixXd g(N, n);
    for (int m = 0; m < n; ++m) g.col(m) = B * a.segment(m * N, N);
    return g;
  }

  Eigen::VectorXd to_real(const Eigen::MatrixXd& grid) const {
    const Eigen::MatrixXd& B = basis();
    Eigen::VectorXd a(n * N);
    for (int m = 0; m < n; ++m)
      a.segment(m * N, N) = B.transpose() * grid.col(m) / N;
    return a;
  }

  // grad V(x + zeta) - grad V(x), written into out (N x n); zeta as grid.
  void grad_increment_grid(const Eigen::MatrixXd& zg, Eigen::MatrixXd& out) const {
    out.setZero(N, n);
    for (const TermData& td : terms) {
      for (int i = 0; i < N; ++i) {
        double kz = 0.0;
        for (int m = 0; m < n; ++m) kz += td.k[m] * zg(i, m);
        const double th = td.base[i] + kz;
        const double d = td.is_cos ? -td.amplitude * std::sin(th)
                                   : td.amplitude * std::cos(th);
        const double inc = d - td.grad0[i];
        for (int m = 0; m < n; ++m) out(i, m) += inc * td.k[m];
      }
    }
  }

  // f on real coefficients.
  Eigen::VectorXd f_real(const Eigen::VectorXd& a) const {
    const Eigen::MatrixXd zg = grid_of(a);
    Eigen::MatrixXd out(N, n);
    grad_increment_grid(zg, out);
    for (int i = 0; i < N; ++i)
      out.row(i) -= (hess0[i] * zg.row(i).transpose()).transpose();
    return to_real(out);
  }

  // Hess V(x + zeta) - Hess V(x) at every node, for the linearized solves.
  std::vector<Eigen::MatrixXd> hess_diff(const Eigen::VectorXd& a_zeta) const {
    const Eigen::MatrixXd zg = grid_of(a_zeta);
    std::vector<Eigen::MatrixXd> dh(N);
    for (int i = 0; i < N; ++i) {
      const double t = static_cast<double>(i) / N;
      const Eigen::VectorXd xi = xg.row(i).transpose();
      dh[i] = model->hess_potential(t, xi + zg.row(i).transpose()) - hess0[i];
    }
    return dh;
  }

  Eigen::VectorXd apply_hess_diff(const std::vector<Eigen::MatrixXd>& dh,
                                  const Eigen::VectorXd& a_v) const {
    const Eigen::MatrixXd vg = grid_of(a_v);
    Eigen::MatrixXd out(N, n);
    for (int i = 0; i < N; ++i)
      out.row(i) = (dh[i] * vg.row(i).transpose()).transpose();
    return to_real(out);
  }
};

// Per-interval per-mode Duhamel weights on a fixed grid.
//   forward:  int_0^h e^{-(h-tau) lam} (g_a + (tau/h) dg) dtau
//           = h [phi1(-h lam) g_a + phi2(-h lam) dg]
//   backward: int_0^h e^{ tau lam} (g_a + (tau/h) dg) dtau
//           = h [phi1( h lam) g_a + phi2( h lam) dg]
struct DuhamelKernels {
  Eigen::MatrixXd decay;  // e^{-h lam}, (M-1) x dim
  Eigen::MatrixXd fw1, fw2;
  Eigen::MatrixXd grow;  // e^{+h lam}
  Eigen::MatrixXd bw1, bw2;

  DuhamelKernels(const std::vector<double>& grid, const Eigen::VectorXd& lam) {
    const int M = static_cast<int>(grid.size());
    const int d = static_cast<int>(lam.size());
    decay.resize(M - 1, d);
    fw1.resize(M - 1, d);
    fw2.resize(M - 1, d);
    grow.resize(M - 1, d);
    bw1.resize(M - 1, d);
    bw2.resize(M - 1, d);
    for (int s = 0; s + 1 < M; ++s) {
      const double h = grid[s + 1] - grid[s];
      for (int i = 0; i < d; ++i) {
        const double z = -h * lam[i];
        decay(s, i) = std::exp(z);
        fw1(s, i) = h * phi1(z);
        fw2(s, i) = h * phi2(z);
        // backward factors only exist on the group part (lam < 0); leaving
        // them zero elsewhere avoids overflow in entries no mask selects
        const bool group = lam[i] < 0.0;
        grow(s, i) = group ? std::exp(-z) : 0.0;
        bw1(s, i) = group ? h * phi1(-z) : 0.0;
        bw2(s, i) = group ? h * phi2(-z) : 0.0;
      }
    }
  }
};

// Cumulative forward integrals F(m) = int_0^{s_m} e^{-(s_m - t) lam} g(t) dt
// for piecewise-linear g given at the nodes, restricted to a mode mask.
inline void forward_prefix(const DuhamelKernels& K, const Eigen::MatrixXd& g,
                           const std::vector<char>& mask, Eigen::MatrixXd& out) {
  const int M = static_cast<int>(g.cols());
  const int d = static_cast<int>(g.rows());
  out.setZero(d, M);
  for (int s = 0; s + 1 < M; ++s) {
    for (int i = 0; i < d; ++i) {
      if (!mask[i]) continue;
      const double dg = g(i, s + 1) - g(i, s);
      out(i, s + 1) = K.decay(s, i) * out(i, s) + K.fw1(s, i) * g(i, s) +
                      K.fw2(s, i) * dg;
    }
  }
}

// Suffix integrals Bk(m) = int_{s_m}^{s_K} e^{-(s_m - t) lam} g(t) dt for the
// masked modes (stable for negative eigenvalues, where e^{h lam} < 1).
inline void backward_suffix(const DuhamelKernels& K, const Eigen::MatrixXd& g,
                            const std::vector<char>& mask, int anchor,
                            Eigen::MatrixXd& out) {
  const int d = static_cast<int>(g.rows());
  out.setZero(d, g.cols());
  for (int s = anchor - 1; s >= 0; --s) {
    for (int i = 0; i < d; ++i) {
      if (!mask[i]) continue;
      const double dg = g(i, s + 1) - g(i, s);
      out(i, s) = K.grow(s, i) * out(i, s + 1) + K.bw1(s, i) * g(i, s) +
                  K.bw2(s, i) * dg;
    }
  }
}

}  // namespace loopflow::detail
