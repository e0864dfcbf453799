#pragma once

#include <vector>

#include "klyap/types.hpp"

namespace klyap {

/// Compactly supported piecewise-polynomial radial profile rho, built by
/// applying the integral transform I (phi -> integral of r'*phi(r') from r
/// to the support edge) k times to the truncated power (1-r)^ell, where
/// ell = floor(d/2) + k + 2. The profile is a single polynomial on [0,1],
/// identically zero beyond, and is evaluated as rho(r/scale).
///
/// Coefficients are computed once in exact rational arithmetic, so the
/// evaluation carries no quadrature error.
class WendlandRadial {
 public:
  WendlandRadial(int dim, int smoothness, double scale);

  /// rho(r); exactly zero for r >= scale.
  double operator()(double r) const;

  int dim() const { return dim_; }
  int smoothness() const { return smoothness_; }
  int ell() const { return ell_; }
  double scale() const { return scale_; }

  /// Polynomial coefficients on the unit interval, ascending powers.
  const std::vector<double>& coefficients() const { return coeffs_; }

 private:
  int dim_ = 0;
  int smoothness_ = 0;
  int ell_ = 0;
  double scale_ = 1.0;
  std::vector<double> coeffs_;
};

/// Linear-radial product kernel kappa(x, y) = (x . y) * rho(|x - y|).
/// Vanishes whenever either factor does: kappa(0, .) = 0 and
/// kappa(x, y) = 0 for |x - y| >= scale.
class ProductKernel {
 public:
  explicit ProductKernel(WendlandRadial radial) : radial_(std::move(radial)) {}

  double operator()(const Eigen::Ref<const Vec>& x, const Eigen::Ref<const Vec>& y) const;

  int dim() const { return radial_.dim(); }
  const WendlandRadial& radial() const { return radial_; }

  bool same_as(const ProductKernel& other) const {
    return radial_.dim() == other.radial_.dim() &&
           radial_.smoothness() == other.radial_.smoothness() &&
           radial_.scale() == other.radial_.scale();
  }

  /// Vector (kappa(pts_j, x))_j over the columns of pts.
  Vec column(const Mat& pts, const Eigen::Ref<const Vec>& x) const;

 private:
  WendlandRadial radial_;
};

/// Cross-Gram matrix with (i,j) entry kappa(a_i, b_j); points are columns.
Mat gram(const ProductKernel& kern, const Mat& pts_a, const Mat& pts_b);

/// Symmetric Gram matrix of one point set.
Mat gram(const ProductKernel& kern, const Mat& pts);

}  // namespace klyap
