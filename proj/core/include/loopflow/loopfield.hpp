#pragma once

#include <Eigen/Dense>
#include <complex>
#include <vector>

#include "loopflow/errors.hpp"

namespace loopflow {

// A periodic vector field along a loop S^1 -> R^n, truncated at |j| <= J.
// Internally the field is stored in the real orthonormal Fourier basis
//   b=0: 1,  b=2j-1: sqrt(2) cos(2 pi j t),  b=2j: sqrt(2) sin(2 pi j t),
// component-major, so the reality constraint c(-j) = conj(c(j)) holds by
// construction. Complex coefficients are derived views.
class LoopField {
 public:
  LoopField() = default;
  LoopField(int components, int modes);

  static LoopField constant(const Eigen::VectorXd& value, int modes);
  // Validates conjugate symmetry of the given (2J+1) x n coefficient matrix
  // (row j+J holds mode j) to within tol and converts to internal storage.
  static LoopField from_complex_coeffs(const Eigen::MatrixXcd& coeffs,
                                       double tol = 1e-12);
  static LoopField from_real_coeffs(const Eigen::VectorXd& a, int components,
                                    int modes);

  int components() const { return n_; }
  int modes() const { return J_; }
  int grid_size() const { return 2 * J_ + 1; }
  int dim() const { return n_ * (2 * J_ + 1); }

  std::complex<double> coeff(int j, int m) const;
  // Sets mode j and (implicitly) mode -j to the conjugate value.
  void set_coeff(int j, int m, std::complex<double> v);

  const Eigen::VectorXd& real_coeffs() const { return a_; }
  Eigen::VectorXd& real_coeffs() { return a_; }

  // Value of the field at loop parameter t (any real, 1-periodic).
  Eigen::VectorXd at(double t) const;

  LoopField derivative() const;

  LoopField& operator+=(const LoopField& o);
  LoopField& operator-=(const LoopField& o);
  LoopField& operator*=(double s);
  friend LoopField operator+(LoopField a, const LoopField& b) { return a += b; }
  friend LoopField operator-(LoopField a, const LoopField& b) { return a -= b; }
  friend LoopField operator*(double s, LoopField a) { return a *= s; }

 private:
  int n_ = 0;
  int J_ = 0;
  Eigen::VectorXd a_;  // size n*(2J+1), component-major
};

// Samples of a field at the uniform collocation nodes t_i = i/N, N odd.
struct GridField {
  Eigen::MatrixXd values;  // N x n

  int size() const { return static_cast<int>(values.rows()); }
  int components() const { return static_cast<int>(values.cols()); }
};

// Collocation nodes t_i = i/N.
Eigen::VectorXd collocation_nodes(int N);

// Evaluation matrix of the real orthonormal trig basis (2J+1 functions) at
// num_points uniform nodes. Cached per (J, num_points) and thread-local.
const Eigen::MatrixXd& trig_basis(int J, int num_points);

// Diagonal W^{1,2} weights 1 + (2 pi j)^2 in real-basis order, one block per
// component; derivative_weights carries (2 pi j)^2.
Eigen::VectorXd w12_weights(int components, int modes);
Eigen::VectorXd derivative_weights(int components, int modes);

// Grid -> spectral; requires an odd number of nodes N = 2J+1.
LoopField transform(const GridField& g);
// Spectral -> grid on N = 2J+1 nodes; exact inverse of transform.
GridField inverse(const LoopField& f);

struct NormKind {
  enum class Tag { L1, L2, Lp, W12, Linf, ExpT };

  Tag tag = Tag::L2;
  double p = 2.0;                 // exponent for Lp
  double weight_exponent = 0.0;   // ExpT: weight e^{s * weight_exponent}
  std::vector<double> time_grid;  // ExpT: strictly increasing

  static NormKind l1() { return tagged(Tag::L1); }
  static NormKind l2() { return tagged(Tag::L2); }
  static NormKind lp(double p) {
    NormKind k = tagged(Tag::Lp);
    k.p = p;
    return k;
  }
  static NormKind w12() { return tagged(Tag::W12); }
  static NormKind linf() { return tagged(Tag::Linf); }
  static NormKind tagged(Tag t) {
    NormKind k;
    k.tag = t;
    return k;
  }
  static NormKind exp_t(double weight_exponent, std::vector<double> grid);
};

double norm(const LoopField& f, const NormKind& kind);

}  // namespace loopflow
