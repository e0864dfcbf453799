#pragma once

#include <functional>

#include "klyap/dynamics.hpp"
#include "klyap/types.hpp"

namespace klyap {

/// Ground-truth Koopman spectrum of a linearizable stable system: the
/// multiplicative semigroup generated by the discretized Jacobian
/// eigenvalues, truncated at a total degree, plus the accumulation point 0.
struct SpectrumTruth {
  CVec generators;
  CVec products;  // degree >= 1, deduplicated, sorted by descending modulus
  bool includes_zero = true;
};

/// Enumerates all products of the generators with total degree between 1 and
/// degree_max, deduplicated within 1e-12. Generators must lie strictly
/// inside the unit disk.
SpectrumTruth exact_spectrum(const CVec& generators, int degree_max);

struct SimulatedValue {
  double value = 0.0;
  bool converged = false;
  int steps = 0;
};

/// Accumulates w along the simulated trajectory until the geometric tail
/// bound (local linearization decay rate, safety factor 2) drops below tol,
/// or t_max is reached (flagged unconverged).
SimulatedValue simulate_lyapunov(const SystemDef& sys, const Vec& x,
                                 const std::function<double(const Vec&)>& w, double delta,
                                 double tol, int t_max);

/// Quadratic Lyapunov coefficient matrix of the linearized discrete dynamics:
/// solves F^T P F - P = -W with F = exp(delta * J).
Mat linearized_lyapunov(const Mat& jac_continuous, double delta, const Mat& W);

/// Truncated-series solution sum_t (M^T)^t H M^t of the Stein equation,
/// accumulated until a term's Frobenius norm falls below tol. Test oracle for
/// solve_stein.
Mat series_stein(const Mat& M, const Mat& H, double tol, int max_terms = 100000);

}  // namespace klyap
