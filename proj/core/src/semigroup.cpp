#include "loopflow/semigroup.hpp"

#include <Eigen/SVD>
#include <cmath>

namespace loopflow {

LoopField apply(const SpectralDecomposition& dec, const SemigroupQuery& q,
                const LoopField& zeta) {
  if (q.s < 0.0 && q.part != Part::Minus)
    throw NegativeTimeOnPlus("negative time is only defined on the minus part");
  Eigen::VectorXd y = dec.to_eigen(zeta);
  for (int i = 0; i < y.size(); ++i) {
    if (!dec.in_part(i, q.part))
      y[i] = 0.0;
    else
      y[i] *= std::exp(-q.s * dec.eigenvalues()[i]);
  }
  return dec.from_eigen(y);
}

namespace {

Eigen::VectorXd to_weights(const SpectralDecomposition& dec, const NormKind& k) {
  switch (k.tag) {
    case NormKind::Tag::L2:
      return Eigen::VectorXd::Ones(dec.dim());
    case NormKind::Tag::W12:
      return w12_weights(dec.components(), dec.modes());
    default:
      throw Error("operator_norm supports only L2 or W12 on this side");
  }
}

// Matrix of e^{-sA} pi_part in the real Fourier basis.
Eigen::MatrixXd part_matrix(const SpectralDecomposition& dec, double s, Part part) {
  Eigen::VectorXd d(dec.dim());
  for (int i = 0; i < dec.dim(); ++i)
    d[i] = dec.in_part(i, part) ? std::exp(-s * dec.eigenvalues()[i]) : 0.0;
  return dec.eigenvectors() * d.asDiagonal() * dec.eigenvectors().transpose();
}

}  // namespace

double operator_norm(const SpectralDecomposition& dec, double s, Part part,
                     const NormKind& from, const NormKind& to) {
  if (s < 0.0 && part != Part::Minus)
    throw NegativeTimeOnPlus("negative time is only defined on the minus part");
  const Eigen::MatrixXd M = part_matrix(dec, s, part);
  const Eigen::VectorXd wt = to_weights(dec, to);
  const Eigen::VectorXd wt_sqrt = wt.cwiseSqrt();

  if (from.tag == NormKind::Tag::L1) {
    // Extreme points of the discrete L1 ball: mass 1/N at one node in one
    // direction of R^n; the response of a whole node block is measured by
    // the largest singular value over target directions.
    const int n = dec.components();
    const int N = 2 * dec.modes() + 1;
    const Eigen::MatrixXd& B = trig_basis(dec.modes(), N);
    double best = 0.0;
    for (int i = 0; i < N; ++i) {
      Eigen::MatrixXd block(dec.dim(), n);
      for (int m = 0; m < n; ++m) {
        Eigen::VectorXd a = Eigen::VectorXd::Zero(dec.dim());
        // coefficients of a delta of unit value at node i, component m
        a.segment(m * N, N) = B.row(i).transpose() / N;
        block.col(m) = wt_sqrt.cwiseProduct(M * a);
      }
      const double sv = n == 1
                            ? block.norm()
                            : Eigen::JacobiSVD<Eigen::MatrixXd>(block).singularValues()[0];
      best = std::max(best, sv * N);  // ||delta||_{L1} = 1/N
    }
    return best;
  }

  const Eigen::VectorXd wf = to_weights(dec, from);
  const Eigen::VectorXd wf_inv_sqrt = wf.cwiseSqrt().cwiseInverse();
  const Eigen::MatrixXd S =
      wt_sqrt.asDiagonal() * M * wf_inv_sqrt.asDiagonal();
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(S);
  return svd.singularValues()[0];
}

SmoothingReport audit_smoothing(const SpectralDecomposition& dec,
                                const std::vector<double>& s_grid, double alpha,
                                double mu, Part part, const NormKind& from,
                                const NormKind& to) {
  SmoothingReport rep;
  for (double s : s_grid) {
    if (!(s > 0.0)) throw Error("audit grid must lie in (0, inf)");
    SmoothingRow row;
    row.s = s;
    row.opnorm = operator_norm(dec, s, part, from, to);
    row.weighted = std::pow(s, alpha) * std::exp(s * mu) * row.opnorm;
    rep.rows.push_back(row);
    rep.c_hat = std::max(rep.c_hat, row.weighted);
  }
  // Refinement probe toward s -> 0+: insert midpoints below the median s and
  // flag growth beyond 10 percent over the plateau value.
  rep.refined_c_hat = rep.c_hat;
  if (rep.rows.size() >= 2) {
    const std::size_t half = rep.rows.size() / 2;
    for (std::size_t i = 0; i + 1 <= half; ++i) {
      const double s = std::sqrt(rep.rows[i].s * rep.rows[i + 1].s);
      const double v =
          std::pow(s, alpha) * std::exp(s * mu) * operator_norm(dec, s, part, from, to);
      rep.refined_c_hat = std::max(rep.refined_c_hat, v);
    }
    rep.refinement_stable = rep.refined_c_hat <= 1.1 * rep.c_hat;
  }
  return rep;
}

std::vector<double> log_spaced(double lo, double hi, int count) {
  if (!(lo > 0.0) || !(hi > lo) || count < 2)
    throw Error("log_spaced needs 0 < lo < hi and count >= 2");
  std::vector<double> out(count);
  const double l0 = std::log(lo), l1 = std::log(hi);
  for (int i = 0; i < count; ++i)
    out[i] = std::exp(l0 + (l1 - l0) * i / (count - 1));
  return out;
}

}  // namespace loopflow
