#pragma once

#include <Eigen/Dense>

#include "loopflow/model.hpp"

namespace loopflow {

// Galerkin matrix of the second-variation operator at a critical loop,
//   zeta -> -zeta'' - Hess V_t(x(t)) zeta,
// in the real orthonormal Fourier basis (dimension n(2J+1)).
struct JacobiOperator {
  Eigen::MatrixXd matrix;
  int components = 0;
  int modes = 0;

  double symmetry_defect() const {
    return (matrix - matrix.transpose()).cwiseAbs().maxCoeff();
  }
};

JacobiOperator assemble(const TorusModel& model, const CriticalLoop& x);

enum class Part { Full, Plus, Minus };

// Full symmetric eigendecomposition with Morse index, spectral gap and the
// sign-split spectral projections. Rejected if an eigenvalue sits inside the
// degeneracy tolerance (hyperbolicity failure).
class SpectralDecomposition {
 public:
  SpectralDecomposition() = default;
  SpectralDecomposition(Eigen::VectorXd eigenvalues, Eigen::MatrixXd eigenvectors,
                        int components, int modes, double mu_fraction,
                        double degeneracy_tol);

  const Eigen::VectorXd& eigenvalues() const { return lambda_; }
  // Columns are L2-orthonormal eigenvectors in the real Fourier basis.
  const Eigen::MatrixXd& eigenvectors() const { return vectors_; }

  int morse_index() const { return morse_index_; }
  double gap() const { return gap_; }
  double mu() const { return mu_; }
  int components() const { return n_; }
  int modes() const { return J_; }
  int dim() const { return static_cast<int>(lambda_.size()); }

  LoopField eigenfield(int i) const;

  // Coordinates in the eigenbasis.
  Eigen::VectorXd to_eigen(const LoopField& f) const;
  Eigen::VectorXd to_eigen_coords(const Eigen::VectorXd& real_coeffs) const;
  LoopField from_eigen(const Eigen::VectorXd& y) const;
  Eigen::VectorXd real_from_eigen(const Eigen::VectorXd& y) const;

  // Gram matrix of the W^{1,2} inner product in eigen coordinates.
  const Eigen::MatrixXd& w12_gram() const { return w12_gram_; }
  double w12_norm_eigen(const Eigen::VectorXd& y) const;
  double l2_norm_eigen(const Eigen::VectorXd& y) const { return y.norm(); }

  bool in_part(int i, Part p) const {
    return p == Part::Full || (p == Part::Minus) == (lambda_[i] < 0.0);
  }

 private:
  Eigen::VectorXd lambda_;
  Eigen::MatrixXd vectors_;
  Eigen::MatrixXd w12_gram_;
  int n_ = 0, J_ = 0;
  int morse_index_ = 0;
  double gap_ = 0.0;
  double mu_ = 0.0;
};

SpectralDecomposition decompose(const JacobiOperator& op,
                                double mu_fraction = 0.5,
                                double degeneracy_tol = 1e-8);

// L2-orthogonal projection onto the span of negative (Minus) or positive
// (Plus) eigenvectors; Full is the identity on the truncated space.
LoopField project(const SpectralDecomposition& dec, const LoopField& f, Part p);

}  // namespace loopflow
