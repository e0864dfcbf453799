#pragma once

#include "klyap/dynamics.hpp"
#include "klyap/kernels.hpp"
#include "klyap/types.hpp"

namespace klyap {

/// Fitted estimate of the Koopman adjoint. The operator acts on the span of
/// the sampled canonical features through the coefficient matrix Theta:
/// applying it to the feature of x gives sum_i (Theta k_x)_i kappa(y_i, .)
/// with k_x the vector of kernel evaluations against the x-points. The
/// estimated spectrum equals the eigenvalues of Gamma * Theta.
struct KoopmanModel {
  ProductKernel kern;
  Mat x_pts;  // d x n
  Mat y_pts;  // d x n
  Mat G_xx;   // (i,j) = kappa(x_i, x_j)
  Mat Gamma;  // (i,j) = kappa(x_i, y_j)
  Mat Theta;  // (G_xx + n*ridge*I)^-1
  double ridge = 0.0;
  double delta = 0.0;
  Box domain;
  CVec eigenvalues;  // of Gamma * Theta, sorted by descending modulus
  double spectral_radius = 0.0;

  int n() const { return static_cast<int>(x_pts.cols()); }
};

/// Least-squares fit of the Koopman adjoint over the sampled features, with
/// Tikhonov term n*ridge*I. With ridge = 0 the Gram matrix must be
/// numerically invertible; otherwise an IllConditioningError instructs the
/// caller to set ridge > 0.
KoopmanModel fit_kedmd(const ProductKernel& kern, const SampleSet& data, double ridge);

/// Estimated Koopman eigenvalues, sorted by descending modulus.
const CVec& spectrum(const KoopmanModel& model);

/// RKHS norm of the one-step feature prediction error at each training pair,
/// computed exactly from Gram blocks.
Vec training_residuals(const KoopmanModel& model);

struct Prediction {
  Mat states;  // d x (steps+1) columns, truncated early on divergence
  bool diverged = false;
};

/// Iterates predict-decode: the next state is read off the pushed-forward
/// feature through the coordinate functions, then re-encoded. Truncates with
/// a divergence flag if an iterate escapes twice the training domain box.
Prediction predict_trajectory(const KoopmanModel& model, const Vec& x0, int steps);

}  // namespace klyap
