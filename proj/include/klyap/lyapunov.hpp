#pragma once

#include <functional>
#include <vector>

#include "klyap/koopman.hpp"

namespace klyap {

/// Kernel ridge regression estimate of the decay-rate function
/// w = sum_i omega_i^2. Row i of alpha holds the coefficients of the i-th
/// fitted factor; H = alpha^T alpha is the coefficient matrix of the
/// estimated decay operator, symmetric PSD by construction.
struct DecayModel {
  ProductKernel kern;
  Mat centers;  // d x n (the x-points)
  Mat alpha;    // N x n
  Mat H;        // n x n
  std::vector<double> lambdas;
  std::vector<std::function<double(const Vec&)>> factors;  // analytic omega_i
  double delta = 0.0;

  int n_factors() const { return static_cast<int>(alpha.rows()); }

  /// Analytic w(x) = sum_i omega_i(x)^2.
  double w_true(const Vec& x) const;

  /// Estimated w_hat(x) = |alpha k_x|^2 >= 0.
  double w_hat(const Vec& x) const;
};

DecayModel fit_decay(const ProductKernel& kern, const SampleSet& data,
                     const std::vector<std::function<double(const Vec&)>>& factors,
                     const std::vector<double>& lambdas);

struct SteinSolution {
  Mat Pi;
  double residual = 0.0;         // Frobenius norm of M^T Pi M - Pi + H
  double spectral_radius = 0.0;  // of M, from its Schur form
};

/// Solves M^T Pi M - Pi = -H by Schur decomposition and back-substitution.
/// Refuses with InstabilityError when the spectral radius of M is not below
/// 1 - margin; the output is symmetrized and the residual recorded.
SteinSolution solve_stein(const Mat& M, const Mat& H, double margin = 1e-6);

/// Lyapunov function estimate v_hat(x) = k_x^T Pi k_x anchored at the sample
/// points; v_hat(0) = 0 since the kernel vanishes at the origin.
struct LyapunovModel {
  Mat centers;
  Mat Pi;
  ProductKernel kern;
  double solver_residual = 0.0;
  double spectral_radius = 0.0;
};

/// Forms M = Gamma * Theta and solves the coefficient Lyapunov equation
/// M^T Pi M - Pi = -H. Both models must share centers and kernel.
LyapunovModel estimate_lyapunov(const KoopmanModel& koop, const DecayModel& decay);

double eval_lyapunov(const LyapunovModel& model, const Vec& x);

struct DecayReport {
  double satisfied_fraction = 0.0;
  double worst_violation = 0.0;
  Vec violations;  // delta(x) = v(f(x)) - v(x) + w(x) per grid point
};

/// Decay-inequality audit of an arbitrary candidate v against the true map.
DecayReport check_decay_fn(const std::function<double(const Vec&)>& v,
                           const std::function<double(const Vec&)>& w, const SystemDef& sys,
                           double delta, const Mat& grid, double slack);

/// Same audit for a fitted model, using the decay model's analytic w and
/// sampling interval.
DecayReport check_decay(const LyapunovModel& model, const DecayModel& decay, const SystemDef& sys,
                        const Mat& grid, double slack);

}  // namespace klyap
