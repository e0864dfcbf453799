#include "klyap/koopman.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

namespace klyap {

namespace {

CVec sorted_eigenvalues(const Mat& M) {
  Eigen::EigenSolver<Mat> es(M, /*computeEigenvectors=*/false);
  if (es.info() != Eigen::Success)
    throw std::runtime_error("spectrum: dense eigensolver failed to converge");
  CVec ev = es.eigenvalues();
  std::vector<int> order(ev.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    const double ma = std::abs(ev(a)), mb = std::abs(ev(b));
    if (ma != mb) return ma > mb;
    if (ev(a).real() != ev(b).real()) return ev(a).real() > ev(b).real();
    return ev(a).imag() > ev(b).imag();
  });
  CVec out(ev.size());
  for (int i = 0; i < ev.size(); ++i) out(i) = ev(order[i]);
  return out;
}

}  // namespace

KoopmanModel fit_kedmd(const ProductKernel& kern, const SampleSet& data, double ridge) {
  if (data.n() < 1) throw std::invalid_argument("fit_kedmd: empty sample set");
  if (ridge < 0.0) throw std::invalid_argument("fit_kedmd: ridge must be non-negative");
  if (data.dim() != kern.dim()) throw std::invalid_argument("fit_kedmd: dimension mismatch");

  const int n = data.n();
  Mat G = gram(kern, data.x);
  Mat A = G + (n * ridge) * Mat::Identity(n, n);

  Eigen::LDLT<Mat> ldlt(A);
  if (ridge == 0.0) {
    // The paper's closed form needs an invertible Gram matrix; a zero pivot
    // appears e.g. whenever the origin is among the x-points.
    const Vec D = ldlt.vectorD();
    const double dmax = D.maxCoeff();
    const double dmin = D.minCoeff();
    if (!(dmax > 0.0) || dmin <= dmax * 1e-13)
      throw IllConditioningError(
          "fit_kedmd: Gram matrix is singular or numerically rank-deficient; set ridge > 0");
  }
  Mat Theta = ldlt.solve(Mat::Identity(n, n));
  if (ridge == 0.0) {
    const double rel = (A * Theta - Mat::Identity(n, n)).norm() / std::sqrt(double(n));
    if (!(rel <= 1e-8))
      throw IllConditioningError(
          "fit_kedmd: Gram solve residual too large with ridge = 0; set ridge > 0");
  }

  KoopmanModel model{kern,  data.x,     data.y, G,           gram(kern, data.x, data.y), Theta,
                     ridge, data.delta, data.domain, CVec(), 0.0};
  model.eigenvalues = sorted_eigenvalues(model.Gamma * model.Theta);
  model.spectral_radius = model.eigenvalues.size() > 0 ? std::abs(model.eigenvalues(0)) : 0.0;
  return model;
}

const CVec& spectrum(const KoopmanModel& model) { return model.eigenvalues; }

Vec training_residuals(const KoopmanModel& model) {
  const int n = model.n();
  const Mat G_yy = gram(model.kern, model.y_pts);
  const Mat C = model.Theta * model.G_xx;  // column j holds the coefficients of A* kappa(x_j, .)
  const Mat S = G_yy * C;
  Vec res(n);
  for (int j = 0; j < n; ++j) {
    const double sq = G_yy(j, j) - 2.0 * S(j, j) + C.col(j).dot(S.col(j));
    res(j) = std::sqrt(std::max(sq, 0.0));
  }
  return res;
}

Prediction predict_trajectory(const KoopmanModel& model, const Vec& x0, int steps) {
  if (x0.size() != model.kern.dim())
    throw std::invalid_argument("predict_trajectory: state dimension mismatch");
  if (steps < 0) throw std::invalid_argument("predict_trajectory: steps must be >= 0");
  if (!model.domain.contains(x0))
    throw std::invalid_argument("predict_trajectory: initial state outside the training domain");

  Prediction out;
  out.states.resize(model.kern.dim(), steps + 1);
  out.states.col(0) = x0;
  Vec cur = x0;
  int written = 1;
  for (int s = 1; s <= steps; ++s) {
    const Vec k = model.kern.column(model.x_pts, cur);
    const Vec next = model.y_pts * (model.Theta * k);
    if (!next.allFinite() || !model.domain.contains(next, 2.0)) {
      out.diverged = true;
      break;
    }
    out.states.col(s) = next;
    cur = next;
    ++written;
  }
  out.states.conservativeResize(Eigen::NoChange, written);
  return out;
}

}  // namespace klyap
