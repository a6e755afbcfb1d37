#include "loopflow/loopfield.hpp"

#include <cmath>
#include <map>
#include <memory>
#include <utility>

namespace loopflow {

namespace {
constexpr double kTwoPi = 6.283185307179586476925286766559;
const double kSqrt2 = std::sqrt(2.0);
}  // namespace

LoopField::LoopField(int components, int modes) : n_(components), J_(modes) {
  if (components < 1 || modes < 1)
    throw DimensionError("LoopField needs components >= 1 and modes >= 1");
  a_ = Eigen::VectorXd::Zero(dim());
}

LoopField LoopField::constant(const Eigen::VectorXd& value, int modes) {
  LoopField f(static_cast<int>(value.size()), modes);
  const int N = f.grid_size();
  for (int m = 0; m < f.n_; ++m) f.a_[m * N] = value[m];
  return f;
}

LoopField LoopField::from_real_coeffs(const Eigen::VectorXd& a, int components,
                                      int modes) {
  LoopField f(components, modes);
  if (a.size() != f.dim())
    throw DimensionError("real coefficient vector has wrong size");
  f.a_ = a;
  return f;
}

LoopField LoopField::from_complex_coeffs(const Eigen::MatrixXcd& coeffs,
                                         double tol) {
  const int rows = static_cast<int>(coeffs.rows());
  if (rows < 3 || rows % 2 == 0)
    throw DimensionError("complex coefficients need an odd number 2J+1 >= 3 of rows");
  const int J = (rows - 1) / 2;
  const int n = static_cast<int>(coeffs.cols());
  LoopField f(n, J);
  for (int m = 0; m < n; ++m) {
    if (std::abs(coeffs(J, m).imag()) > tol)
      throw Error("mode 0 must be real for a real-valued field");
    for (int j = 1; j <= J; ++j) {
      const std::complex<double> cj = coeffs(J + j, m);
      const std::complex<double> cmj = coeffs(J - j, m);
      if (std::abs(cmj - std::conj(cj)) > tol)
        throw Error("conjugate symmetry c(-j) = conj(c(j)) violated");
    }
  }
  for (int m = 0; m < n; ++m) {
    f.set_coeff(0, m, coeffs(J, m).real());
    for (int j = 1; j <= J; ++j) f.set_coeff(j, m, coeffs(J + j, m));
  }
  return f;
}

std::complex<double> LoopField::coeff(int j, int m) const {
  if (m < 0 || m >= n_ || j < -J_ || j > J_)
    throw DimensionError("coefficient index out of range");
  const int base = m * grid_size();
  if (j == 0) return {a_[base], 0.0};
  const int aj = std::abs(j);
  const double re = a_[base + 2 * aj - 1] / kSqrt2;
  const double im = -a_[base + 2 * aj] / kSqrt2;
  return j > 0 ? std::complex<double>(re, im) : std::complex<double>(re, -im);
}

void LoopField::set_coeff(int j, int m, std::complex<double> v) {
  if (m < 0 || m >= n_ || j < -J_ || j > J_)
    throw DimensionError("coefficient index out of range");
  const int base = m * grid_size();
  if (j == 0) {
    a_[base] = v.real();
    return;
  }
  if (j < 0) v = std::conj(v);
  const int aj = std::abs(j);
  a_[base + 2 * aj - 1] = kSqrt2 * v.real();
  a_[base + 2 * aj] = -kSqrt2 * v.imag();
}

Eigen::VectorXd LoopField::at(double t) const {
  Eigen::VectorXd out(n_);
  const int N = grid_size();
  for (int m = 0; m < n_; ++m) {
    double v = a_[m * N];
    for (int j = 1; j <= J_; ++j) {
      const double ang = kTwoPi * j * t;
      v += kSqrt2 * (a_[m * N + 2 * j - 1] * std::cos(ang) +
                     a_[m * N + 2 * j] * std::sin(ang));
    }
    out[m] = v;
  }
  return out;
}

LoopField LoopField::derivative() const {
  LoopField d(n_, J_);
  const int N = grid_size();
  for (int m = 0; m < n_; ++m) {
    for (int j = 1; j <= J_; ++j) {
      const double w = kTwoPi * j;
      // d/dt of (c*sqrt2 cos + s*sqrt2 sin) = w*(-c*sqrt2 sin + s*sqrt2 cos)
      d.a_[m * N + 2 * j - 1] = w * a_[m * N + 2 * j];
      d.a_[m * N + 2 * j] = -w * a_[m * N + 2 * j - 1];
    }
  }
  return d;
}

LoopField& LoopField::operator+=(const LoopField& o) {
  if (n_ != o.n_ || J_ != o.J_) throw DimensionError("field shape mismatch");
  a_ += o.a_;
  return *this;
}

LoopField& LoopField::operator-=(const LoopField& o) {
  if (n_ != o.n_ || J_ != o.J_) throw DimensionError("field shape mismatch");
  a_ -= o.a_;
  return *this;
}

LoopField& LoopField::operator*=(double s) {
  a_ *= s;
  return *this;
}

Eigen::VectorXd collocation_nodes(int N) {
  Eigen::VectorXd t(N);
  for (int i = 0; i < N; ++i) t[i] = static_cast<double>(i) / N;
  return t;
}

const Eigen::MatrixXd& trig_basis(int J, int num_points) {
  thread_local std::map<std::pair<int, int>, std::unique_ptr<Eigen::MatrixXd>>
      cache;
  auto key = std::make_pair(J, num_points);
  auto it = cache.find(key);
  if (it == cache.end()) {
    auto B = std::make_unique<Eigen::MatrixXd>(num_points, 2 * J + 1);
    for (int i = 0; i < num_points; ++i) {
      const double t = static_cast<double>(i) / num_points;
      (*B)(i, 0) = 1.0;
      for (int j = 1; j <= J; ++j) {
        const double ang = kTwoPi * j * t;
        (*B)(i, 2 * j - 1) = kSqrt2 * std::cos(ang);
        (*B)(i, 2 * j) = kSqrt2 * std::sin(ang);
      }
    }
    it = cache.emplace(key, std::move(B)).first;
  }
  return *it->second;
}

Eigen::VectorXd w12_weights(int components, int modes) {
  const int N = 2 * modes + 1;
  Eigen::VectorXd w(components * N);
  for (int m = 0; m < components; ++m) {
    w[m * N] = 1.0;
    for (int j = 1; j <= modes; ++j) {
      const double v = 1.0 + kTwoPi * j * kTwoPi * j;
      w[m * N + 2 * j - 1] = v;
      w[m * N + 2 * j] = v;
    }
  }
  return w;
}

Eigen::VectorXd derivative_weights(int components, int modes) {
  Eigen::VectorXd w = w12_weights(components, modes);
  return w.array() - 1.0;
}

LoopField transform(const GridField& g) {
  const int N = g.size();
  if (N < 3 || N % 2 == 0)
    throw DimensionError("transform needs an odd node count N = 2J+1 >= 3");
  const int J = (N - 1) / 2;
  const Eigen::MatrixXd& B = trig_basis(J, N);
  LoopField f(g.components(), J);
  Eigen::VectorXd& a = f.real_coeffs();
  for (int m = 0; m < g.components(); ++m)
    a.segment(m * N, N) = B.transpose() * g.values.col(m) / N;
  return f;
}

GridField inverse(const LoopField& f) {
  const int N = f.grid_size();
  const Eigen::MatrixXd& B = trig_basis(f.modes(), N);
  GridField g;
  g.values.resize(N, f.components());
  const Eigen::VectorXd& a = f.real_coeffs();
  for (int m = 0; m < f.components(); ++m)
    g.values.col(m) = B * a.segment(m * N, N);
  return g;
}

NormKind NormKind::exp_t(double weight_exponent, std::vector<double> grid) {
  if (grid.empty()) throw GridError("ExpT norm needs a nonempty time grid");
  for (std::size_t i = 1; i < grid.size(); ++i)
    if (!(grid[i] > grid[i - 1]))
      throw GridError("ExpT time grid must be strictly increasing");
  NormKind k;
  k.tag = Tag::ExpT;
  k.weight_exponent = weight_exponent;
  k.time_grid = std::move(grid);
  return k;
}

double norm(const LoopField& f, const NormKind& kind) {
  switch (kind.tag) {
    case NormKind::Tag::L2:
      return f.real_coeffs().norm();
    case NormKind::Tag::W12: {
      const Eigen::VectorXd w = w12_weights(f.components(), f.modes());
      return std::sqrt(f.real_coeffs().cwiseProduct(w).dot(f.real_coeffs()));
    }
    case NormKind::Tag::L1:
    case NormKind::Tag::Lp:
    case NormKind::Tag::Linf: {
      const GridField g = inverse(f);
      const int N = g.size();
      const Eigen::VectorXd mag = g.values.rowwise().norm();
      if (kind.tag == NormKind::Tag::Linf) return mag.maxCoeff();
      const double p = kind.tag == NormKind::Tag::L1 ? 1.0 : kind.p;
      if (!(p >= 1.0)) throw Error("Lp norm needs p >= 1");
      double s = 0.0;
      for (int i = 0; i < N; ++i) s += std::pow(mag[i], p);
      return std::pow(s / N, 1.0 / p);
    }
    case NormKind::Tag::ExpT:
      throw GridError("ExpT is a trajectory norm; use traj_norm");
  }
  throw Error("unreachable norm kind");
}

}  // namespace loopflow
