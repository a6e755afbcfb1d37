#include "loopflow/model.hpp"

#include <cmath>
#include <iostream>
#include <random>

namespace loopflow {

namespace {
constexpr double kTwoPi = 6.283185307179586476925286766559;
}

TorusModel::TorusModel(int dim, std::vector<PotentialTerm> terms)
    : dim_(dim), terms_(std::move(terms)) {
  if (dim < 1) throw ConfigError("model dimension must be >= 1");
  for (const auto& term : terms_)
    if (term.wavevector.size() != dim)
      throw ConfigError("potential term wavevector length must equal dim");
}

double TorusModel::potential(double t, const Eigen::VectorXd& q) const {
  double v = 0.0;
  for (const auto& term : terms_) {
    const double th = term.wavevector.cast<double>().dot(q) +
                      kTwoPi * term.time_mode * t + term.phase;
    v += term.amplitude *
         (term.kind == PotentialTerm::Kind::Cos ? std::cos(th) : std::sin(th));
  }
  return v;
}

Eigen::VectorXd TorusModel::grad_potential(double t,
                                           const Eigen::VectorXd& q) const {
  Eigen::VectorXd g = Eigen::VectorXd::Zero(dim_);
  for (const auto& term : terms_) {
    const double th = term.wavevector.cast<double>().dot(q) +
                      kTwoPi * term.time_mode * t + term.phase;
    const double d = term.kind == PotentialTerm::Kind::Cos
                         ? -term.amplitude * std::sin(th)
                         : term.amplitude * std::cos(th);
    g += d * term.wavevector.cast<double>();
  }
  return g;
}

Eigen::MatrixXd TorusModel::hess_potential(double t,
                                           const Eigen::VectorXd& q) const {
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(dim_, dim_);
  for (const auto& term : terms_) {
    const double th = term.wavevector.cast<double>().dot(q) +
                      kTwoPi * term.time_mode * t + term.phase;
    const double d2 = term.kind == PotentialTerm::Kind::Cos
                          ? -term.amplitude * std::cos(th)
                          : -term.amplitude * std::sin(th);
    const Eigen::VectorXd k = term.wavevector.cast<double>();
    h += d2 * (k * k.transpose());
  }
  return h;
}

double action(const TorusModel& model, const LoopField& u) {
  if (u.components() != model.dim())
    throw DimensionError("field components must match model dimension");
  const Eigen::VectorXd w = derivative_weights(u.components(), u.modes());
  const double kinetic = 0.5 * u.real_coeffs().cwiseProduct(w).dot(u.real_coeffs());
  const GridField g = inverse(u);
  const int N = g.size();
  double pot = 0.0;
  for (int i = 0; i < N; ++i)
    pot += model.potential(static_cast<double>(i) / N, g.values.row(i).transpose());
  return kinetic - pot / N;
}

LoopField action_gradient(const TorusModel& model, const LoopField& u) {
  if (u.components() != model.dim())
    throw DimensionError("field components must match model dimension");
  const Eigen::VectorXd w = derivative_weights(u.components(), u.modes());
  GridField g = inverse(u);
  const int N = g.size();
  GridField gv;
  gv.values.resize(N, u.components());
  for (int i = 0; i < N; ++i)
    gv.values.row(i) = model.grad_potential(static_cast<double>(i) / N, g.values.row(i).transpose()).transpose();
  LoopField out = transform(gv);
  out *= -1.0;  // -grad V term
  out.real_coeffs() += w.cwiseProduct(u.real_coeffs());  // -u'' term
  return out;
}

Eigen::MatrixXd galerkin_operator_matrix(const TorusModel& model,
                                         const LoopField& u) {
  const int n = u.components();
  const int J = u.modes();
  const int N = 2 * J + 1;
  const int dim = n * N;
  // Oversampled quadrature keeps the multiplication-operator entries
  // spectrally accurate; 4N removes aliasing for integrands of bandwidth
  // <= 2J plus a smooth factor.
  const int Nq = 4 * N;
  const Eigen::MatrixXd& B = trig_basis(J, Nq);

  Eigen::MatrixXd M = Eigen::MatrixXd::Zero(dim, dim);
  for (int m = 0; m < n; ++m) {
    Eigen::VectorXd w = derivative_weights(1, J);
    M.block(m * N, m * N, N, N) = w.asDiagonal();
  }

  // Values of u at the quadrature nodes (evaluate the truncated series).
  Eigen::MatrixXd uq(Nq, n);
  for (int m = 0; m < n; ++m)
    uq.col(m) = B * u.real_coeffs().segment(m * N, N);

  // -(1/Nq) sum_i B(i,:)^T Hess(t_i) B(i,:), assembled blockwise; each grid
  // point contributes a symmetric rank-n update, so M stays symmetric.
  std::vector<Eigen::MatrixXd> hess(Nq);
  for (int i = 0; i < Nq; ++i)
    hess[i] = model.hess_potential(static_cast<double>(i) / Nq, uq.row(i).transpose());
  for (int ma = 0; ma < n; ++ma) {
    for (int mb = ma; mb < n; ++mb) {
      Eigen::VectorXd h(Nq);
      for (int i = 0; i < Nq; ++i) h[i] = hess[i](ma, mb);
      const Eigen::MatrixXd blk = B.transpose() * h.asDiagonal() * B / Nq;
      M.block(ma * N, mb * N, N, N) -= blk;
      if (mb != ma) M.block(mb * N, ma * N, N, N) -= blk.transpose();
    }
  }
  return M;
}

CriticalLoop find_critical_loop(const TorusModel& model, const LoopField& guess,
                                const NewtonOptions& opts) {
  LoopField x = guess;
  const NormKind l2 = NormKind::l2();
  double res = norm(action_gradient(model, x), l2);
  for (int it = 0; it < opts.max_iter; ++it) {
    if (res < opts.tol) break;
    const Eigen::MatrixXd A = galerkin_operator_matrix(model, x);
    Eigen::FullPivLU<Eigen::MatrixXd> lu(A);
    lu.setThreshold(opts.singular_tol);
    if (!lu.isInvertible())
      throw SingularJacobian("linearized critical-point system is singular");
    const LoopField F = action_gradient(model, x);
    const Eigen::VectorXd step = lu.solve(-F.real_coeffs());
    x.real_coeffs() += step;
    res = norm(action_gradient(model, x), l2);
  }
  if (!(res < opts.tol))
    throw NoConvergence("Newton did not reach tolerance in max_iter steps");
  CriticalLoop c;
  c.x = x;
  c.residual = res;
  c.action = action(model, x);
  return c;
}

LoopField nonlinearity(const TorusModel& model, const CriticalLoop& x,
                       const LoopField& zeta, double rho0_warn) {
  if (zeta.components() != model.dim() || zeta.modes() != x.x.modes())
    throw DimensionError("nonlinearity argument shape mismatch");
  if (norm(zeta, NormKind::w12()) > rho0_warn)
    std::cerr << "loopflow: nonlinearity evaluated outside the rho0 chart ball\n";
  const GridField xg = inverse(x.x);
  const GridField zg = inverse(zeta);
  const int N = xg.size();
  GridField out;
  out.values.resize(N, model.dim());
  for (int i = 0; i < N; ++i) {
    const double t = static_cast<double>(i) / N;
    const Eigen::VectorXd xi = xg.values.row(i).transpose();
    const Eigen::VectorXd zi = zg.values.row(i).transpose();
    out.values.row(i) = (model.grad_potential(t, xi + zi) -
                         model.grad_potential(t, xi) -
                         model.hess_potential(t, xi) * zi +
                         model.curvature_term(t, xi, zi)).transpose();
  }
  return transform(out);
}

LoopField dnonlinearity(const TorusModel& model, const CriticalLoop& x,
                        const LoopField& zeta, const LoopField& v) {
  if (zeta.components() != model.dim() || v.components() != model.dim())
    throw DimensionError("dnonlinearity argument shape mismatch");
  const GridField xg = inverse(x.x);
  const GridField zg = inverse(zeta);
  const GridField vg = inverse(v);
  const int N = xg.size();
  GridField out;
  out.values.resize(N, model.dim());
  for (int i = 0; i < N; ++i) {
    const double t = static_cast<double>(i) / N;
    const Eigen::VectorXd xi = xg.values.row(i).transpose();
    const Eigen::MatrixXd dh = model.hess_potential(t, xi + zg.values.row(i).transpose()) -
                               model.hess_potential(t, xi);
    out.values.row(i) = (dh * vg.values.row(i).transpose()).transpose();
  }
  return transform(out);
}

namespace {

// Deterministic smooth random field with ||.||_W12 = radius.
LoopField random_field(int n, int J, double radius, std::mt19937_64& gen) {
  std::normal_distribution<double> normal(0.0, 1.0);
  LoopField f(n, J);
  const int N = 2 * J + 1;
  Eigen::VectorXd& a = f.real_coeffs();
  for (int m = 0; m < n; ++m) {
    a[m * N] = normal(gen);
    for (int j = 1; j <= J; ++j) {
      const double decay = 1.0 / (1.0 + kTwoPi * j * kTwoPi * j);
      a[m * N + 2 * j - 1] = decay * normal(gen);
      a[m * N + 2 * j] = decay * normal(gen);
    }
  }
  const double w12 = norm(f, NormKind::w12());
  if (w12 > 0) f *= radius / w12;
  return f;
}

}  // namespace

KappaEstimate estimate_kappa(const TorusModel& model, const CriticalLoop& x,
                             double rho, int samples, std::uint64_t seed) {
  KappaEstimate est;
  if (samples <= 0) return est;
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const int n = model.dim();
  const int J = x.x.modes();
  const NormKind l1 = NormKind::l1();
  const NormKind w12 = NormKind::w12();
  const NormKind linf = NormKind::linf();
  for (int s = 0; s < samples; ++s) {
    // Shapes are rho-independent; radii scale with rho (nested estimates).
    const double r1 = rho * (0.25 + 0.75 * unif(gen));
    const double r2 = rho * (0.25 + 0.75 * unif(gen));
    const LoopField xi = random_field(n, J, r1, gen);
    LoopField eta = random_field(n, J, r2, gen);
    if (s % 3 == 0) {
      // probe small separations as well
      eta = xi + 1e-3 * rho * random_field(n, J, 1.0, gen);
    }
    const LoopField v = random_field(n, J, 1.0, gen);
    const double sep = norm(xi - eta, w12);
    if (sep > 1e-14) {
      const double num = norm(nonlinearity(model, x, xi) - nonlinearity(model, x, eta), l1);
      est.kappa = std::max(est.kappa, num / sep);
      const double dnum = norm(dnonlinearity(model, x, xi, v) - dnonlinearity(model, x, eta, v), l1);
      est.kappa_star = std::max(est.kappa_star, dnum / (sep * norm(v, w12)));
    }
    const double xw = norm(xi, w12);
    if (xw > 1e-14)
      est.sup_ratio_c_inf = std::max(est.sup_ratio_c_inf, norm(xi, linf) / xw);
  }
  return est;
}

}  // namespace loopflow
