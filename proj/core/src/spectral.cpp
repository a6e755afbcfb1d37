#include "loopflow/spectral.hpp"

#include <cmath>
#include <limits>

namespace loopflow {

JacobiOperator assemble(const TorusModel& model, const CriticalLoop& x) {
  JacobiOperator op;
  op.components = x.x.components();
  op.modes = x.x.modes();
  op.matrix = galerkin_operator_matrix(model, x.x);
  return op;
}

SpectralDecomposition::SpectralDecomposition(Eigen::VectorXd eigenvalues,
                                             Eigen::MatrixXd eigenvectors,
                                             int components, int modes,
                                             double mu_fraction,
                                             double degeneracy_tol)
    : lambda_(std::move(eigenvalues)),
      vectors_(std::move(eigenvectors)),
      n_(components),
      J_(modes) {
  const double min_abs = lambda_.cwiseAbs().minCoeff();
  if (min_abs < degeneracy_tol)
    throw DegenerateCriticalPoint(
        "eigenvalue inside degeneracy tolerance: critical point is not hyperbolic");
  morse_index_ = 0;
  while (morse_index_ < lambda_.size() && lambda_[morse_index_] < 0.0)
    ++morse_index_;
  const double neg = morse_index_ > 0 ? -lambda_[morse_index_ - 1]
                                      : std::numeric_limits<double>::infinity();
  const double pos = morse_index_ < lambda_.size()
                         ? lambda_[morse_index_]
                         : std::numeric_limits<double>::infinity();
  gap_ = std::min(neg, pos);
  if (!(mu_fraction > 0.0 && mu_fraction < 1.0))
    throw ConfigError("mu_fraction must lie in (0,1)");
  mu_ = mu_fraction * gap_;
  const Eigen::VectorXd w = w12_weights(n_, J_);
  w12_gram_ = vectors_.transpose() * w.asDiagonal() * vectors_;
  w12_gram_ = 0.5 * (w12_gram_ + w12_gram_.transpose());
}

LoopField SpectralDecomposition::eigenfield(int i) const {
  return LoopField::from_real_coeffs(vectors_.col(i), n_, J_);
}

Eigen::VectorXd SpectralDecomposition::to_eigen(const LoopField& f) const {
  if (f.components() != n_ || f.modes() != J_)
    throw DimensionError("field shape does not match decomposition");
  return vectors_.transpose() * f.real_coeffs();
}

Eigen::VectorXd SpectralDecomposition::to_eigen_coords(
    const Eigen::VectorXd& real_coeffs) const {
  return vectors_.transpose() * real_coeffs;
}

LoopField SpectralDecomposition::from_eigen(const Eigen::VectorXd& y) const {
  return LoopField::from_real_coeffs(vectors_ * y, n_, J_);
}

Eigen::VectorXd SpectralDecomposition::real_from_eigen(
    const Eigen::VectorXd& y) const {
  return vectors_ * y;
}

double SpectralDecomposition::w12_norm_eigen(const Eigen::VectorXd& y) const {
  return std::sqrt(y.dot(w12_gram_ * y));
}

SpectralDecomposition decompose(const JacobiOperator& op, double mu_fraction,
                                double degeneracy_tol) {
  if (op.symmetry_defect() > 1e-12)
    throw Error("Galerkin matrix lost symmetry beyond 1e-12");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(op.matrix);
  if (solver.info() != Eigen::Success)
    throw Error("symmetric eigendecomposition failed");
  return SpectralDecomposition(solver.eigenvalues(), solver.eigenvectors(),
                               op.components, op.modes, mu_fraction,
                               degeneracy_tol);
}

LoopField project(const SpectralDecomposition& dec, const LoopField& f, Part p) {
  Eigen::VectorXd y = dec.to_eigen(f);
  for (int i = 0; i < y.size(); ++i)
    if (!dec.in_part(i, p)) y[i] = 0.0;
  return dec.from_eigen(y);
}

}  // namespace loopflow
