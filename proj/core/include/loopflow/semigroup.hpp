#pragma once

#include <vector>

#include "loopflow/spectral.hpp"

namespace loopflow {

struct SemigroupQuery {
  double s = 0.0;
  Part part = Part::Full;
};

// e^{-sA} restricted to the requested spectral part, evaluated in the
// eigenbasis. Negative times are admitted only on the finite-dimensional
// minus part, where the subspace semigroup extends to a group.
LoopField apply(const SpectralDecomposition& dec, const SemigroupQuery& q,
                const LoopField& zeta);

// Induced norm of e^{-sA} pi_part between the discretized normed spaces.
// from = L1 maximizes over collocation column responses (the extreme points
// of the discrete L1 ball); from = L2/W12 uses a weighted singular value.
// Supported pairs: (L1->W12), (L1->L2), (L2->W12), (L2->L2), (W12->W12).
double operator_norm(const SpectralDecomposition& dec, double s, Part part,
                     const NormKind& from, const NormKind& to);

struct SmoothingRow {
  double s = 0.0;
  double opnorm = 0.0;
  double weighted = 0.0;  // s^alpha e^{s mu} opnorm
};

struct SmoothingReport {
  std::vector<SmoothingRow> rows;
  double c_hat = 0.0;          // sup of weighted over the grid
  double refined_c_hat = 0.0;  // sup after inserting midpoints near s -> 0+
  bool refinement_stable = true;
};

// Empirical constant of the regularity-for-singularity bound
//   ||e^{-sA} pi_+||  <=  c s^{-alpha} e^{-s mu}
// measured on a grid; never a certificate for the continuum estimate.
SmoothingReport audit_smoothing(const SpectralDecomposition& dec,
                                const std::vector<double>& s_grid, double alpha,
                                double mu, Part part = Part::Plus,
                                const NormKind& from = NormKind::l1(),
                                const NormKind& to = NormKind::w12());

std::vector<double> log_spaced(double lo, double hi, int count);

}  // namespace loopflow
